"""Fitted linear models and labeled datasets."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import LearningError
from .featurizer_config import FeatureMatrix

REGRESSION = "regression"
CLASSIFICATION = "classification"


def _as_python(value: Any) -> Any:
    """Convert numpy scalars to plain Python values for JSON and comparisons."""
    return value.item() if isinstance(value, np.generic) else value


@dataclass(frozen=True, eq=False)
class RidgeModel:
    """Ridge model in standardized feature units.

    ``weights`` holds one row per decision function: a single row for
    regression and binary classification, one row per class otherwise.
    Raw features are mapped through ``(x - feature_mean) / feature_scale``
    before the weights are applied.
    """

    weights: np.ndarray
    intercepts: np.ndarray
    lambda_chosen: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    task: str = REGRESSION
    classes: Optional[Tuple[Any, ...]] = None
    cv_errors: Optional[Dict[float, float]] = field(default=None)
    featurizer_ref: Optional[str] = None

    def __post_init__(self) -> None:
        weights = np.atleast_2d(np.array(self.weights, dtype=float))
        intercepts = np.atleast_1d(np.array(self.intercepts, dtype=float))
        mean = np.atleast_1d(np.array(self.feature_mean, dtype=float))
        scale = np.atleast_1d(np.array(self.feature_scale, dtype=float))
        if weights.shape[0] != intercepts.shape[0]:
            raise LearningError("One intercept is required per decision function")
        if mean.shape != (weights.shape[1],) or scale.shape != (weights.shape[1],):
            raise LearningError("Standardization constants do not match the weight length")
        for name, array in (
            ("weights", weights),
            ("intercepts", intercepts),
            ("feature_mean", mean),
            ("feature_scale", scale),
        ):
            if not np.all(np.isfinite(array)):
                raise LearningError(f"Model {name} has non-finite entries")
        if np.any(scale <= 0):
            raise LearningError("Feature scales must be positive")
        if not (math.isfinite(self.lambda_chosen) and self.lambda_chosen > 0):
            raise LearningError(f"lambda must be positive, got {self.lambda_chosen!r}")
        if self.task not in (REGRESSION, CLASSIFICATION):
            raise LearningError(f"Unknown task {self.task!r}")
        if self.task == CLASSIFICATION:
            if not self.classes or len(self.classes) < 2:
                raise LearningError("A classifier needs at least two classes")
            classes = tuple(_as_python(c) for c in self.classes)
            expected_rows = 1 if len(classes) == 2 else len(classes)
            if weights.shape[0] != expected_rows:
                raise LearningError(
                    f"{len(classes)} classes need {expected_rows} weight rows, "
                    f"got {weights.shape[0]}"
                )
            object.__setattr__(self, "classes", classes)
        for array in (weights, intercepts, mean, scale):
            array.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "intercepts", intercepts)
        object.__setattr__(self, "feature_mean", mean)
        object.__setattr__(self, "feature_scale", scale)

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])

    def standardize(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise LearningError(f"Expected {self.n_features} feature columns, got shape {X.shape}")
        return (X - self.feature_mean) / self.feature_scale

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        """Return decision values with shape (rows, decision functions)."""
        return self.standardize(X) @ self.weights.T + self.intercepts

    def predict_from_decision(self, decision: np.ndarray) -> np.ndarray:
        decision = np.atleast_2d(np.asarray(decision, dtype=float))
        if self.task == REGRESSION:
            return decision[:, 0]
        assert self.classes is not None
        classes = np.array(self.classes, dtype=object)
        if len(self.classes) == 2:
            return classes[(decision[:, 0] > 0).astype(int)]
        return classes[np.argmax(decision, axis=1)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_from_decision(self.decision_function(X))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task": self.task,
            "weights": self.weights.tolist(),
            "intercepts": self.intercepts.tolist(),
            "lambda": float(self.lambda_chosen),
            "feature_mean": self.feature_mean.tolist(),
            "feature_scale": self.feature_scale.tolist(),
            "classes": list(self.classes) if self.classes is not None else None,
            "cv_errors": (
                [[float(k), float(v)] for k, v in sorted(self.cv_errors.items())]
                if self.cv_errors
                else None
            ),
            "featurizer": self.featurizer_ref,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RidgeModel":
        try:
            cv_errors = data.get("cv_errors")
            return cls(
                weights=np.array(data["weights"], dtype=float),
                intercepts=np.array(data["intercepts"], dtype=float),
                lambda_chosen=float(data["lambda"]),
                feature_mean=np.array(data["feature_mean"], dtype=float),
                feature_scale=np.array(data["feature_scale"], dtype=float),
                task=data.get("task", REGRESSION),
                classes=tuple(data["classes"]) if data.get("classes") is not None else None,
                cv_errors={float(k): float(v) for k, v in cv_errors} if cv_errors else None,
                featurizer_ref=data.get("featurizer"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise LearningError(f"Malformed model description: {e}") from e


def split_indices(
    n_rows: int, test_fraction: float, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Shuffle ``range(n_rows)`` with ``rng`` and return sorted (train, test) index arrays.

    The test part has ceil(test_fraction * n_rows) rows.
    """
    if not 0 < test_fraction < 1:
        raise LearningError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = int(math.ceil(test_fraction * n_rows))
    if n_test < 1 or n_rows - n_test < 1:
        raise LearningError(f"Cannot split {n_rows} rows with test_fraction {test_fraction}")
    order = rng.permutation(n_rows)
    return np.sort(order[n_test:]), np.sort(order[:n_test])


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with one label per row and its generation metadata."""

    features: FeatureMatrix
    labels: np.ndarray
    task: str = REGRESSION
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != self.features.rows:
            raise LearningError(
                f"{labels.shape[0] if labels.ndim else 0} labels for {self.features.rows} rows"
            )
        if self.task == REGRESSION:
            labels = labels.astype(float)
            if not np.all(np.isfinite(labels)):
                raise LearningError("Regression labels must be finite")
        elif self.task != CLASSIFICATION:
            raise LearningError(f"Unknown task {self.task!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.features.rows

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=int)
        return LabeledDataset(
            self.features.take_rows(idx), self.labels[idx], self.task, dict(self.metadata)
        )

    def split_indices(
        self, test_fraction: float, rng: np.random.Generator
    ) -> Tuple[np.ndarray, np.ndarray]:
        return split_indices(len(self), test_fraction, rng)

    def train_test_split(
        self, test_fraction: float, rng: np.random.Generator
    ) -> Tuple["LabeledDataset", "LabeledDataset"]:
        train_idx, test_idx = self.split_indices(test_fraction, rng)
        return self.subset(train_idx), self.subset(test_idx)
