"""Template-function featurizers: tent functions and Chebyshev interpolating polynomials.

A template function f on the birth-lifetime plane turns a diagram D into the
number sum over points x of mult(x) * f(x). Both featurizers evaluate a whole
grid of templates at once and return one feature per template.
"""

import dataclasses
import logging
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import FeaturizerError, RaggedDatasetError
from ..models.diagram import PersistenceDiagram
from ..models.featurizer_config import (
    DEFAULT_MESH_SIZE,
    DEFAULT_PAD_MODE,
    DEFAULT_TENT_D,
    DEFAULT_TENT_PAD,
    DEFAULT_TENT_TRIM,
    PAD_MODES,
    ChebMesh,
    ColumnKey,
    FeatureMatrix,
    Featurizer,
    TentGrid,
)

logger = logging.getLogger(__name__)

MACHINE_EPS = float(np.finfo(float).eps)
MIN_DELTA = 1e-6
DEGENERATE_WIDTH = 1e-6

DiagramSample = Sequence[Optional[PersistenceDiagram]]


def _birth_lifetime_arrays(
    diagram: PersistenceDiagram,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    births = diagram.births
    return births, diagram.deaths - births, diagram.multiplicities.astype(float)


def _pooled_points(training: Iterable[PersistenceDiagram]) -> Tuple[np.ndarray, np.ndarray]:
    births = []
    lifetimes = []
    for diagram in training:
        if diagram is not None and not diagram.is_empty:
            b, l, _ = _birth_lifetime_arrays(diagram)
            births.append(b)
            lifetimes.append(l)
    if not births:
        raise FeaturizerError("Training collection has no off-diagonal points")
    return np.concatenate(births), np.concatenate(lifetimes)


# Tent functions


def tent_value(center: Tuple[float, float], delta: float, query: Tuple[float, float]) -> float:
    """Evaluate the tent of radius ``delta`` centered at ``center`` (birth-lifetime).

    Raises:
        FeaturizerError: If ``delta`` is not positive or reaches the diagonal
    """
    a, b = float(center[0]), float(center[1])
    if not delta > 0:
        raise FeaturizerError(f"delta must be positive, got {delta}")
    if delta >= b:
        raise FeaturizerError(
            f"Tent support of radius {delta} at lifetime {b} crosses the diagonal"
        )
    x, y = float(query[0]), float(query[1])
    return max(0.0, 1.0 - max(abs(x - a), abs(y - b)) / delta)


def tent_features(diagram: PersistenceDiagram, grid: TentGrid) -> np.ndarray:
    """Multiplicity-weighted tent sums, entry ``i * d + (j - 1)`` for tent (i, j)."""
    if diagram.is_empty:
        return np.zeros(grid.feature_count)
    x, y, mult = _birth_lifetime_arrays(diagram)
    center_b, center_l = grid.centers()
    dist = np.maximum(
        np.abs(x[:, None, None] - center_b[None]), np.abs(y[:, None, None] - center_l[None])
    )
    values = np.clip(1.0 - dist / grid.delta, 0.0, None)
    return np.einsum("q,qij->ij", mult, values).ravel()


def _trimmed_range(values: np.ndarray, trim: float) -> Tuple[float, float]:
    if trim == 0:
        return float(values.min()), float(values.max())
    lo = np.quantile(values, trim, method="lower")
    hi = np.quantile(values, 1.0 - trim, method="higher")
    return float(lo), float(hi)


def auto_tent_params(
    training: Sequence[PersistenceDiagram],
    d: int = DEFAULT_TENT_D,
    pad: float = DEFAULT_TENT_PAD,
    trim: float = DEFAULT_TENT_TRIM,
) -> TentGrid:
    """Choose a tent grid covering the padded box of the bulk of the training points.

    Each axis of the box runs from the ``trim`` to the ``1 - trim`` quantile of
    the pooled training births or lifetimes, rounded outwards to a training
    value; ``trim=0`` gives the full bounding box. Points outside the box fall
    off the grid. ``epsilon`` is half the smallest training lifetime and
    ``delta`` is the smallest uniform spacing for which the grid spans the
    padded box, with a floor of 1e-6 for degenerate boxes.

    Raises:
        FeaturizerError: If no training diagram has a point
    """
    if pad < 0:
        raise FeaturizerError(f"pad must be nonnegative, got {pad}")
    if not 0 <= trim < 0.5:
        raise FeaturizerError(f"trim must be in [0, 0.5), got {trim}")
    births, lifetimes = _pooled_points(training)
    birth_lo, birth_hi = _trimmed_range(births, trim)
    life_lo, life_hi = _trimmed_range(lifetimes, trim)
    birth_lo, birth_hi = birth_lo - pad, birth_hi + pad
    life_lo, life_hi = life_lo - pad, life_hi + pad
    delta = max((birth_hi - birth_lo) / d, (life_hi - life_lo) / d, MIN_DELTA)
    epsilon = float(lifetimes.min()) / 2.0
    grid = TentGrid(
        d=d,
        delta=float(delta),
        epsilon=epsilon,
        birth_start=float(birth_lo),
        lifetime_start=float(max(0.0, life_lo - epsilon - delta)),
    )
    outside = np.sum(
        (births < birth_lo) | (births > birth_hi) | (lifetimes < life_lo) | (lifetimes > life_hi)
    )
    logger.debug(f"Auto tent grid: {grid}; {outside} of {births.size} points outside the box")
    return grid


# Chebyshev interpolating polynomials


def cheb_nodes(n: int, interval: Tuple[float, float]) -> np.ndarray:
    """The n + 1 Chebyshev points of the second kind on ``interval``, increasing.

    The symmetric sine form keeps the nodes exactly symmetric about the midpoint,
    so the midpoint itself is a node when n is even.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if n < 1:
        raise FeaturizerError(f"n must be a positive integer, got {n}")
    if not lo < hi:
        raise FeaturizerError(f"Empty interval [{lo}, {hi}]")
    k = np.arange(n + 1)
    reference = np.sin(np.pi * (2 * k - n) / (2 * n))
    nodes = (lo + hi) / 2.0 + (hi - lo) / 2.0 * reference
    nodes[0], nodes[-1] = lo, hi
    return nodes


def barycentric_weights(nodes: Sequence[float]) -> np.ndarray:
    """Barycentric weights 1 / prod_{i != j}(a_j - a_i), rescaled to max |w| = 1.

    Differences are divided by a quarter of the node span first so the
    products stay in floating-point range for large meshes.

    Raises:
        FeaturizerError: If nodes repeat
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size == 0:
        raise FeaturizerError("Nodes must be a nonempty 1-D sequence")
    if np.unique(nodes).size != nodes.size:
        raise FeaturizerError("Interpolation nodes must be distinct")
    if nodes.size == 1:
        return np.ones(1)
    capacity = (nodes.max() - nodes.min()) / 4.0
    diffs = (nodes[:, None] - nodes[None, :]) / capacity
    np.fill_diagonal(diffs, 1.0)
    weights = 1.0 / np.prod(diffs, axis=1)
    return weights / np.max(np.abs(weights))


def interp_matrix(
    nodes: Sequence[float], queries: Sequence[float], weights: Optional[np.ndarray] = None
) -> np.ndarray:
    """Lagrange basis values, entry (q, j) = l_j(queries[q]), by the second barycentric form.

    A query equal to a node gets the corresponding indicator row.
    """
    nodes = np.asarray(nodes, dtype=float)
    queries = np.atleast_1d(np.asarray(queries, dtype=float))
    if weights is None:
        weights = barycentric_weights(nodes)
    diff = queries[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = weights[None, :] / diff
        matrix = terms / terms.sum(axis=1, keepdims=True)
    hit_rows = exact.any(axis=1)
    if np.any(hit_rows):
        matrix[hit_rows] = exact[hit_rows].astype(float)
    return matrix


def mesh_nodes(mesh: ChebMesh) -> Tuple[np.ndarray, np.ndarray]:
    """Birth and lifetime node arrays of a mesh."""
    return cheb_nodes(mesh.m, mesh.birth_range), cheb_nodes(mesh.n, mesh.lifetime_range)


def support_cutoff(births: np.ndarray, lifetimes: np.ndarray, mesh: ChebMesh) -> np.ndarray:
    """Cutoff equal to 1 on the mesh box and 0 beyond L-infinity distance ``support_pad``.

    A pad at machine precision gives the hard indicator of the box.
    """
    (a_lo, a_hi), (b_lo, b_hi) = mesh.birth_range, mesh.lifetime_range
    dx = np.maximum.reduce([a_lo - births, np.zeros_like(births), births - a_hi])
    dy = np.maximum.reduce([b_lo - lifetimes, np.zeros_like(lifetimes), lifetimes - b_hi])
    dist = np.maximum(dx, dy)
    if mesh.support_pad <= MACHINE_EPS:
        return (dist == 0.0).astype(float)
    return 1.0 - np.clip(dist / mesh.support_pad, 0.0, 1.0)


def poly_features(diagram: PersistenceDiagram, mesh: ChebMesh) -> np.ndarray:
    """Interpolating-polynomial features, entry ``i * (n + 1) + j`` for node pair (i, j).

    Each point contributes mult * cutoff * l_i(birth) * l_j(lifetime),
    taken in absolute value when ``abs_mode`` is set.
    """
    features = np.zeros(mesh.feature_count)
    if diagram.is_empty:
        return features
    x, y, mult = _birth_lifetime_arrays(diagram)
    cutoff = support_cutoff(x, y, mesh)
    keep = cutoff > 0
    if not np.any(keep):
        return features

    birth_nodes, life_nodes = mesh_nodes(mesh)
    gamma = interp_matrix(birth_nodes, x[keep])
    phi = interp_matrix(life_nodes, y[keep])
    psi = (gamma[:, :, None] * phi[:, None, :]).reshape(gamma.shape[0], -1)
    weighted = psi * (mult[keep] * cutoff[keep])[:, None]
    if mesh.abs_mode:
        weighted = np.abs(weighted)
    return weighted.sum(axis=0)


def auto_poly_params(
    training: Sequence[PersistenceDiagram],
    m: int = DEFAULT_MESH_SIZE,
    n: int = DEFAULT_MESH_SIZE,
    pad_mode: str = DEFAULT_PAD_MODE,
    abs_mode: bool = True,
) -> ChebMesh:
    """Mesh over the tight birth-lifetime box of the training points.

    ``pad_mode`` is ``"half_B"`` (cutoff pad of half the lowest lifetime) or
    ``"machine_eps"`` (hard cutoff at the box). Degenerate axes are widened
    by 1e-6 on each side.

    Raises:
        FeaturizerError: If no training diagram has a point
    """
    if pad_mode not in PAD_MODES:
        raise FeaturizerError(f"pad_mode must be one of {PAD_MODES}, got {pad_mode!r}")
    births, lifetimes = _pooled_points(training)
    birth_lo, birth_hi = float(births.min()), float(births.max())
    life_lo, life_hi = float(lifetimes.min()), float(lifetimes.max())
    if birth_lo == birth_hi:
        birth_lo, birth_hi = birth_lo - DEGENERATE_WIDTH, birth_hi + DEGENERATE_WIDTH
    if life_lo == life_hi:
        # Lower lifetime bound stays positive
        life_lo -= min(DEGENERATE_WIDTH, life_lo / 2.0)
        life_hi += DEGENERATE_WIDTH
    support_pad = life_lo / 2.0 if pad_mode == "half_B" else MACHINE_EPS
    mesh = ChebMesh(
        m=m,
        n=n,
        birth_range=(birth_lo, birth_hi),
        lifetime_range=(life_lo, life_hi),
        abs_mode=abs_mode,
        support_pad=support_pad,
    )
    logger.debug(f"Auto polynomial mesh: {mesh}")
    return mesh


# Dispatch and datasets


def featurize(diagram: PersistenceDiagram, featurizer: Featurizer) -> np.ndarray:
    """Feature vector of one diagram under either template system."""
    if isinstance(featurizer, TentGrid):
        return tent_features(diagram, featurizer)
    if isinstance(featurizer, ChebMesh):
        return poly_features(diagram, featurizer)
    raise FeaturizerError(f"Unsupported featurizer {type(featurizer).__name__}")


def fit_featurizer(
    kind: str, training: Sequence[PersistenceDiagram], params: Optional[Mapping[str, Any]] = None
) -> Featurizer:
    """Build a featurizer of ``kind`` from explicit parameters or the training data.

    Tents take ``d``, ``pad``, ``trim``, ``delta`` and ``epsilon``; with an explicit
    ``delta`` the grid is anchored at the origin and ``epsilon`` defaults to
    machine precision. Polynomials take ``m``, ``n``, ``pad_mode`` and
    ``abs_mode``.
    """
    params = dict(params or {})
    if kind == TentGrid.kind:
        d = int(params.get("d", DEFAULT_TENT_D))
        if "delta" in params:
            return TentGrid(
                d=d, delta=float(params["delta"]), epsilon=float(params.get("epsilon", MACHINE_EPS))
            )
        grid = auto_tent_params(
            training,
            d,
            float(params.get("pad", DEFAULT_TENT_PAD)),
            float(params.get("trim", DEFAULT_TENT_TRIM)),
        )
        if "epsilon" in params:
            grid = dataclasses.replace(grid, epsilon=float(params["epsilon"]))
        return grid
    if kind == ChebMesh.kind:
        return auto_poly_params(
            training,
            m=int(params.get("m", DEFAULT_MESH_SIZE)),
            n=int(params.get("n", DEFAULT_MESH_SIZE)),
            pad_mode=params.get("pad_mode", DEFAULT_PAD_MODE),
            abs_mode=bool(params.get("abs_mode", True)),
        )
    raise FeaturizerError(f"Unknown featurizer kind {kind!r}")


def _present(sample: DiagramSample, dim: int) -> bool:
    return dim < len(sample) and sample[dim] is not None


def featurize_dataset(
    samples: Sequence[DiagramSample],
    featurizers: Mapping[int, Featurizer],
    row_ids: Optional[Sequence[str]] = None,
) -> FeatureMatrix:
    """Featurize (H0, optional H1) samples into one matrix.

    Column blocks follow increasing homology dimension; dimensions without a
    featurizer are ignored.

    Args:
        samples: One diagram tuple per row, indexed by homology dimension
        featurizers: Featurizer per homology dimension
        row_ids: Optional identifiers of the rows

    Returns:
        FeatureMatrix: Concatenated feature blocks with their column index

    Raises:
        RaggedDatasetError: If a featurized dimension is missing from some samples
    """
    if not featurizers:
        raise FeaturizerError("At least one featurizer is required")
    dims = sorted(featurizers)
    for dim in dims:
        present = [_present(sample, dim) for sample in samples]
        if samples and not all(present):
            missing = present.count(False)
            raise RaggedDatasetError(
                f"H{dim} diagrams are missing from {missing} of {len(samples)} samples"
            )

    columns: List[ColumnKey] = [
        ColumnKey(dim, i, j) for dim in dims for i, j in featurizers[dim].grid_positions()
    ]
    blocks: List[np.ndarray] = []
    for dim in dims:
        featurizer = featurizers[dim]
        block = np.zeros((len(samples), featurizer.feature_count))
        for row, sample in enumerate(samples):
            block[row] = featurize(sample[dim], featurizer)  # type: ignore[arg-type]
        blocks.append(block)

    logger.info(f"Featurized {len(samples)} samples into {len(columns)} columns")
    return FeatureMatrix(
        np.hstack(blocks) if blocks else np.zeros((len(samples), 0)),
        tuple(columns),
        tuple(row_ids) if row_ids is not None else None,
    )

