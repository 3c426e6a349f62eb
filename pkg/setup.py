"""Setup configuration for persistence_templates."""

from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

# Core dependencies required for the package to function
INSTALL_REQUIRES = [
    "numpy>=1.26.0",
    "scipy>=1.11.0",
    "gudhi>=3.9.0",
    "rich>=13.7.0",
    "python-dotenv>=1.0.0",
]

# Development dependencies for testing, linting, etc.
DEV_REQUIRES = [
    "pytest>=8.0.0",
    "pytest-cov>=4.1.0",
    "pytest-env>=1.1.0",
    "black>=24.2.0",
    "isort>=5.13.2",
    "flake8>=7.0.0",
    "mypy>=1.8.0",
    "coverage>=7.4.1",
    "build>=1.0.3",
    "types-python-dotenv>=1.0.0.0",
]

setup(
    name="persistence_templates",
    description="Template-function featurization of persistence diagrams",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    use_scm_version={"fallback_version": "0.0.0"},
    setup_requires=["setuptools_scm>=8.0.0"],
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.10",
    install_requires=INSTALL_REQUIRES,
    extras_require={
        "dev": DEV_REQUIRES,
    },
    entry_points={
        "console_scripts": [
            "persistence-templates=persistence_templates.cli:main",
        ],
    },
)
