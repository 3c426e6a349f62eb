"""Ridge regression and one-vs-rest ridge classification on feature matrices.

Every fit minimizes (1/M) ||X w + b - y||^2 + lambda ||w||^2 with an
unpenalized intercept. Features are standardized column-wise by default;
weights are then expressed in standardized units.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from ..exceptions import LearningError, ScoringError
from ..models.featurizer_config import ColumnKey, FeatureMatrix
from ..models.learning import CLASSIFICATION, REGRESSION, RidgeModel

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID: Tuple[float, ...] = tuple(10.0**k for k in range(-3, 4))
DEFAULT_FOLDS = 5

Features = Union[FeatureMatrix, np.ndarray]
Folds = Union[int, str]


@dataclass(frozen=True)
class _Solution:
    weights: np.ndarray  # (targets, features)
    intercepts: np.ndarray  # (targets,)
    mean: np.ndarray
    scale: np.ndarray


def _as_array(X: Features) -> np.ndarray:
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    if values.ndim != 2:
        raise LearningError(f"Feature matrix must be 2-D, got shape {values.shape}")
    if values.shape[0] < 1:
        raise LearningError("Feature matrix has no rows")
    if not np.all(np.isfinite(values)):
        raise LearningError("Feature matrix has non-finite entries")
    return values


def _as_targets(y: np.ndarray, rows: int) -> np.ndarray:
    targets = np.asarray(y, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if targets.ndim != 2 or targets.shape[0] != rows:
        raise LearningError(f"Expected {rows} targets, got shape {np.shape(y)}")
    if not np.all(np.isfinite(targets)):
        raise LearningError("Targets have non-finite entries")
    return targets


def _check_lambda(lam: float) -> float:
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0):
        raise LearningError(f"lambda must be a positive finite number, got {lam!r}")
    return float(lam)


def _standardization(X: np.ndarray, standardize: bool) -> Tuple[np.ndarray, np.ndarray]:
    if not standardize:
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    # Constant columns are centered but left unscaled
    scale[scale == 0] = 1.0
    return mean, scale


def _solve(X: np.ndarray, Y: np.ndarray, lam: float, standardize: bool) -> _Solution:
    """Ridge solution for all target columns via Cholesky on the smaller Gram matrix."""
    mean, scale = _standardization(X, standardize)
    Xs = (X - mean) / scale
    x_bar = Xs.mean(axis=0)
    y_bar = Y.mean(axis=0)
    Xc = Xs - x_bar
    Yc = Y - y_bar
    rows, cols = Xc.shape
    penalty = rows * lam

    if cols <= rows:
        gram = Xc.T @ Xc
        gram[np.diag_indices_from(gram)] += penalty
        factor = scipy.linalg.cho_factor(gram)
        W = scipy.linalg.cho_solve(factor, Xc.T @ Yc)
    else:
        kernel = Xc @ Xc.T
        kernel[np.diag_indices_from(kernel)] += penalty
        factor = scipy.linalg.cho_factor(kernel)
        W = Xc.T @ scipy.linalg.cho_solve(factor, Yc)

    intercepts = y_bar - x_bar @ W
    return _Solution(W.T, intercepts, mean, scale)


def _predict(solution: _Solution, X: np.ndarray) -> np.ndarray:
    return ((X - solution.mean) / solution.scale) @ solution.weights.T + solution.intercepts


def ridge_fit(
    X: Features, y: np.ndarray, lam: float, standardize: bool = True
) -> RidgeModel:
    """Fit a ridge regression at a fixed lambda.

    Args:
        X: Feature matrix (rows = samples)
        y: Real targets, one per row
        lam: Positive regularization strength
        standardize: Standardize feature columns before fitting

    Returns:
        RidgeModel: Fitted regression model

    Raises:
        LearningError: On non-finite inputs or a non-positive lambda
    """
    values = _as_array(X)
    targets = _as_targets(y, values.shape[0])
    solution = _solve(values, targets, _check_lambda(lam), standardize)
    return RidgeModel(
        weights=solution.weights,
        intercepts=solution.intercepts,
        lambda_chosen=float(lam),
        feature_mean=solution.mean,
        feature_scale=solution.scale,
        task=REGRESSION,
    )


def fold_indices(rows: int, folds: Folds, seed: int = 0) -> List[np.ndarray]:
    """Seeded shuffled partition of ``range(rows)`` into ``folds`` parts ("loo" = one per row)."""
    n_folds = rows if folds == "loo" else folds
    if not isinstance(n_folds, int) or isinstance(n_folds, bool) or n_folds < 2:
        raise LearningError(f"folds must be an integer of at least 2 or 'loo', got {folds!r}")
    if rows < n_folds:
        raise LearningError(f"Cannot split {rows} rows into {n_folds} folds")
    order = np.random.default_rng(seed).permutation(rows)
    return np.array_split(order, n_folds)


def cross_validation_errors(
    X: np.ndarray,
    Y: np.ndarray,
    lambda_grid: Sequence[float],
    folds: Folds = DEFAULT_FOLDS,
    seed: int = 0,
    standardize: bool = True,
) -> np.ndarray:
    """Mean held-out squared error (summed over target columns) for each lambda."""
    parts = fold_indices(X.shape[0], folds, seed)
    errors = np.zeros(len(lambda_grid))
    for held_out in parts:
        train = np.setdiff1d(np.arange(X.shape[0]), held_out, assume_unique=True)
        for k, lam in enumerate(lambda_grid):
            solution = _solve(X[train], Y[train], lam, standardize)
            residual = _predict(solution, X[held_out]) - Y[held_out]
            errors[k] += float(np.sum(residual**2))
    return errors / X.shape[0]


def _select_lambda(
    X: np.ndarray,
    Y: np.ndarray,
    lambda_grid: Optional[Sequence[float]],
    folds: Folds,
    seed: int,
    standardize: bool,
) -> Tuple[float, Dict[float, float]]:
    grid = sorted(_check_lambda(lam) for lam in (lambda_grid or DEFAULT_LAMBDA_GRID))
    if len(grid) == 1:
        return grid[0], {}
    errors = cross_validation_errors(X, Y, grid, folds, seed, standardize)
    best = int(np.argmin(errors))
    logger.debug(
        "CV errors: " + ", ".join(f"{lam:g}={err:.4g}" for lam, err in zip(grid, errors))
    )
    return grid[best], {lam: float(err) for lam, err in zip(grid, errors)}


def ridge_cv(
    X: Features,
    y: np.ndarray,
    lambda_grid: Optional[Sequence[float]] = None,
    folds: Folds = DEFAULT_FOLDS,
    seed: int = 0,
    standardize: bool = True,
) -> RidgeModel:
    """Pick lambda by k-fold cross-validation, then refit on all rows.

    The first minimum over the ascending grid wins. A single-value grid
    skips cross-validation and matches ``ridge_fit`` at that value.

    Raises:
        LearningError: If the grid is invalid or there are fewer rows than folds
    """
    values = _as_array(X)
    targets = _as_targets(y, values.shape[0])
    lam, cv_errors = _select_lambda(values, targets, lambda_grid, folds, seed, standardize)
    logger.info(f"Selected lambda={lam:g} by cross-validation")
    solution = _solve(values, targets, lam, standardize)
    return RidgeModel(
        weights=solution.weights,
        intercepts=solution.intercepts,
        lambda_chosen=lam,
        feature_mean=solution.mean,
        feature_scale=solution.scale,
        task=REGRESSION,
        cv_errors=cv_errors or None,
    )


def one_vs_rest_targets(classes: np.ndarray, labels: Sequence[Any]) -> np.ndarray:
    """Targets in {-1, +1}: one column per class, or a single column for two classes."""
    classes = np.asarray(classes)
    if len(labels) == 2:
        return np.where(classes == labels[1], 1.0, -1.0)[:, None]
    return np.stack([np.where(classes == label, 1.0, -1.0) for label in labels], axis=1)


def ridge_classifier_fit(
    X: Features,
    classes: Sequence[Any],
    lambda_grid: Optional[Sequence[float]] = None,
    folds: Folds = DEFAULT_FOLDS,
    seed: int = 0,
    standardize: bool = True,
) -> RidgeModel:
    """One-vs-rest ridge classifier with a shared, cross-validated lambda.

    Two classes use a single decision function whose sign selects the class;
    more classes use one decision function per class and predict the argmax.

    Raises:
        LearningError: If fewer than two classes are present
    """
    values = _as_array(X)
    class_array = np.asarray(classes)
    if class_array.ndim != 1 or class_array.shape[0] != values.shape[0]:
        raise LearningError(
            f"Expected {values.shape[0]} class labels, got shape {class_array.shape}"
        )
    labels = [
        label.item() if isinstance(label, np.generic) else label
        for label in np.unique(class_array)
    ]
    if len(labels) < 2:
        raise LearningError(f"Classification needs at least two classes, got {labels}")

    targets = one_vs_rest_targets(class_array, labels)
    lam, cv_errors = _select_lambda(values, targets, lambda_grid, folds, seed, standardize)
    logger.info(f"Selected lambda={lam:g} for {len(labels)} classes")
    solution = _solve(values, targets, lam, standardize)
    return RidgeModel(
        weights=solution.weights,
        intercepts=solution.intercepts,
        lambda_chosen=lam,
        feature_mean=solution.mean,
        feature_scale=solution.scale,
        task=CLASSIFICATION,
        classes=tuple(labels),
        cv_errors=cv_errors or None,
    )


def r2_score(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """Coefficient of determination 1 - SS_res / SS_tot.

    Raises:
        ScoringError: On mismatched lengths, fewer than two values or constant truth
    """
    truth = np.asarray(y_true, dtype=float)
    pred = np.asarray(y_pred, dtype=float)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ScoringError(f"Shape mismatch: {truth.shape} vs {pred.shape}")
    if truth.size < 2:
        raise ScoringError("R^2 needs at least two values")
    total = float(np.sum((truth - truth.mean()) ** 2))
    if total == 0:
        raise ScoringError("R^2 is undefined for constant truth")
    return 1.0 - float(np.sum((truth - pred) ** 2)) / total


def accuracy(true_classes: Sequence[Any], predicted_classes: Sequence[Any]) -> float:
    """Fraction of positions where the two label sequences agree."""
    truth = list(true_classes)
    pred = list(predicted_classes)
    if len(truth) != len(pred):
        raise ScoringError(f"Length mismatch: {len(truth)} vs {len(pred)}")
    if not truth:
        raise ScoringError("Accuracy needs at least one label")
    return sum(1 for a, b in zip(truth, pred) if a == b) / len(truth)


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """Weights of one decision function laid out on the featurizer grid of one dimension."""

    dimension: int
    class_label: Any
    i_values: Tuple[int, ...]
    j_values: Tuple[int, ...]
    values: np.ndarray


def decision_labels(model: RidgeModel) -> List[Any]:
    if model.task == REGRESSION or model.classes is None:
        return ["target"]
    if len(model.classes) == 2:
        # The single binary decision function favors the second class
        return [model.classes[1]]
    return list(model.classes)


def coefficient_grid(
    model: RidgeModel, column_index: Sequence[ColumnKey]
) -> Dict[Tuple[int, Any], CoefficientGrid]:
    """Pull model weights back onto the featurizer grids, one grid per (dimension, class).

    Raises:
        LearningError: If the column index does not cover every weight
    """
    columns = list(column_index)
    if len(columns) != model.n_features or len(set(columns)) != len(columns):
        raise LearningError(
            f"Column index has {len(columns)} distinct entries for {model.n_features} weights"
        )
    grids: Dict[Tuple[int, Any], CoefficientGrid] = {}
    for row, label in enumerate(decision_labels(model)):
        for dim in sorted({key.dimension for key in columns}):
            positions = [(col, key) for col, key in enumerate(columns) if key.dimension == dim]
            i_values = sorted({key.i for _, key in positions})
            j_values = sorted({key.j for _, key in positions})
            i_pos = {i: k for k, i in enumerate(i_values)}
            j_pos = {j: k for k, j in enumerate(j_values)}
            values = np.zeros((len(i_values), len(j_values)))
            for col, key in positions:
                values[i_pos[key.i], j_pos[key.j]] = model.weights[row, col]
            grids[(dim, label)] = CoefficientGrid(
                dim, label, tuple(i_values), tuple(j_values), values
            )
    return grids


def flatten_coefficient_grid(
    grids: Dict[Tuple[int, Any], CoefficientGrid],
    column_index: Sequence[ColumnKey],
    labels: Sequence[Any],
) -> np.ndarray:
    """Inverse of ``coefficient_grid``: rebuild the (decision functions, features) weights."""
    columns = list(column_index)
    weights = np.zeros((len(labels), len(columns)))
    for row, label in enumerate(labels):
        for col, key in enumerate(columns):
            grid = grids.get((key.dimension, label))
            if grid is None or key.i not in grid.i_values or key.j not in grid.j_values:
                raise LearningError(f"No grid entry for column {key.name} of class {label!r}")
            weights[row, col] = grid.values[grid.i_values.index(key.i), grid.j_values.index(key.j)]
    return weights
