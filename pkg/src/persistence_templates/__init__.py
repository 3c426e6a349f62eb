"""Template-function featurization of persistence diagrams."""

import os
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

# Load .env file from the project root
env_path = Path(__file__).resolve().parent.parent.parent / ".env"
load_dotenv(env_path)

# Version
try:
    from persistence_templates._version import __version__  # type: ignore
except ImportError:  # pragma: no cover
    # Package is not installed, version is unknown
    __version__ = "0.0.0"

__all__ = ["__version__", "config"]

# Configuration with defaults
config: Dict[str, Any] = {
    # Reproducibility and scheduling
    "DEFAULT_SEED": int(os.getenv("DEFAULT_SEED", "0")),
    "DEFAULT_JOBS": int(os.getenv("DEFAULT_JOBS", "1")),
    "DEFAULT_OUTPUT_DIR": os.getenv("DEFAULT_OUTPUT_DIR", "results"),
    # Rips computation
    "RIPS_SIMPLEX_BUDGET": int(os.getenv("RIPS_SIMPLEX_BUDGET", "5000000")),
    # Learning
    "DEFAULT_TEST_FRACTION": float(os.getenv("DEFAULT_TEST_FRACTION", "0.33")),
    "DEFAULT_CV_FOLDS": int(os.getenv("DEFAULT_CV_FOLDS", "5")),
    # Debug settings
    "DEBUG": os.getenv("DEBUG", "false").lower() == "true",
    "LOG_LEVEL": os.getenv("LOG_LEVEL", "WARNING"),
}
