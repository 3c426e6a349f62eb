"""Custom exceptions for persistence-templates."""

from typing import Any, Optional, Tuple


class TemplateFeaturesError(Exception):
    """Base class for persistence-templates errors."""

    pass


class InvalidDiagramError(TemplateFeaturesError):
    """Raised when a diagram point, diagram or wedge region is invalid."""

    pass


class DiagramFormatError(TemplateFeaturesError):
    """Raised when a diagram or point-cloud file cannot be parsed."""

    pass


class PointCloudError(TemplateFeaturesError):
    """Raised when a point cloud is empty, ragged or non-finite."""

    pass


class SimplexBudgetExceededError(TemplateFeaturesError):
    """Raised when a Rips complex would exceed the configured simplex budget."""

    def __init__(self, count: int, budget: int) -> None:
        super().__init__(f"Rips complex has {count:,} simplices, budget is {budget:,}")
        self.count = count
        self.budget = budget

    def __reduce__(self) -> Tuple[Any, Tuple[Any, ...]]:
        return (type(self), (self.count, self.budget))


class UnresolvedClassError(TemplateFeaturesError):
    """Raised when H1 classes are still alive at the maximum filtration scale."""

    pass


class FeaturizerError(TemplateFeaturesError):
    """Raised when featurizer parameters or inputs are invalid."""

    pass


class RaggedDatasetError(FeaturizerError):
    """Raised when homology dimensions are not present consistently across a dataset."""

    pass


class LearningError(TemplateFeaturesError):
    """Raised when a model cannot be fitted or applied."""

    pass


class ScoringError(LearningError):
    """Raised when a score is undefined for the given inputs."""

    pass


class DataGenerationError(TemplateFeaturesError):
    """Raised when a generator receives invalid arguments."""

    pass


class SimulationDivergedError(DataGenerationError):
    """Raised when an ODE integration produces non-finite values."""

    pass


class ConfigValidationError(TemplateFeaturesError):
    """Raised when an experiment configuration is invalid."""

    def __init__(self, problems: list) -> None:
        super().__init__("Invalid configuration: " + "; ".join(problems))
        self.problems = list(problems)

    def __reduce__(self) -> Tuple[Any, Tuple[Any, ...]]:
        return (type(self), (self.problems,))


class ExperimentError(TemplateFeaturesError):
    """Raised when an experiment fails; ``stage`` names the failing stage."""

    def __init__(self, stage: str, message: str, cause: Optional[BaseException] = None) -> None:
        super().__init__(f"Stage '{stage}' failed: {message}")
        self.stage = stage
        self.message = message
        self.cause = cause

    def __reduce__(self) -> Tuple[Any, Tuple[Any, ...]]:
        return (type(self), (self.stage, self.message, self.cause))
