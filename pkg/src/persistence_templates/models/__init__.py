"""Domain types: diagrams, point clouds, featurizers, models and configuration."""

from .diagram import CompactnessReport, DiagramPoint, PersistenceDiagram, WedgeRegion
from .dynamics import RegimeLabel, RosslerConfig, RosslerRun
from .experiment_config import ExperimentConfig
from .featurizer_config import ChebMesh, ColumnKey, FeatureMatrix, TentGrid
from .learning import LabeledDataset, RidgeModel
from .point_cloud import PointCloud

__all__ = [
    "ChebMesh",
    "ColumnKey",
    "CompactnessReport",
    "DiagramPoint",
    "ExperimentConfig",
    "FeatureMatrix",
    "LabeledDataset",
    "PersistenceDiagram",
    "PointCloud",
    "RegimeLabel",
    "RidgeModel",
    "RosslerConfig",
    "RosslerRun",
    "TentGrid",
    "WedgeRegion",
]
