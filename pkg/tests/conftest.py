"""Test configuration and fixtures."""

import os
from typing import Any, Dict

import numpy as np
import pytest

from persistence_templates.models.diagram import PersistenceDiagram
from persistence_templates.models.experiment_config import ExperimentConfig
from persistence_templates.models.point_cloud import PointCloud
from persistence_templates.services.filesystem_service import (
    FileSystemService,
    MockFileSystemService,
)


@pytest.fixture
def mock_fs() -> MockFileSystemService:
    """Create a mock file system service.

    Returns:
        MockFileSystemService: Empty in-memory file system
    """
    return MockFileSystemService()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def unit_square() -> PointCloud:
    """Corners of the unit square: one H1 class born at 1, dying at sqrt(2)."""
    return PointCloud([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@pytest.fixture
def small_diagram() -> PersistenceDiagram:
    return PersistenceDiagram.from_pairs([(0.0, 1.0), (1.0, 3.0), (0.5, 1.5)], [1, 2, 1])


def small_experiment_dict(output_dir: str, **overrides: Any) -> Dict[str, Any]:
    """A configuration that runs in a couple of seconds."""
    config: Dict[str, Any] = {
        "experiment": "normal-regress-line",
        "featurizer": "tents",
        "featurizer_params": {"d": 4},
        "seed": 7,
        "runs": 2,
        "jobs": 1,
        "lambda_grid": [0.01, 1.0],
        "cv_folds": 3,
        "output_dir": output_dir,
        "n_diagrams": 30,
        "points_per_diagram": 10,
        "t_steps": 2,
        "diagrams_per_class": 4,
        "points_per_cloud": 30,
        "show_progress": False,
    }
    config.update(overrides)
    return config


@pytest.fixture
def experiment_config(tmp_path) -> ExperimentConfig:
    return ExperimentConfig(small_experiment_dict(os.path.join(str(tmp_path), "results")))


class BaseFileSystemTest:
    """Base class for tests that read and write through a file system service."""

    def setup_method(self) -> None:
        """Set up test method."""
        self.fs_service = self.get_fs_service()

    def get_fs_service(self) -> FileSystemService:
        """Get file system service for tests.

        Returns:
            FileSystemService: File system service instance
        """
        return MockFileSystemService()
