"""Diagram coordinates, region counts, bottleneck distance and compactness diagnostics."""

import logging
import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ..exceptions import InvalidDiagramError
from ..models.diagram import CompactnessReport, PersistenceDiagram, WedgeRegion

logger = logging.getLogger(__name__)

BirthLifetime = Tuple[float, float, int]


def to_birth_lifetime(diagram: PersistenceDiagram) -> List[BirthLifetime]:
    """Map each point (b, d, m) to (b, d - b, m), keeping the canonical order."""
    return [(p.birth, p.death - p.birth, p.multiplicity) for p in diagram.points]


def from_birth_lifetime(
    points: Iterable[Sequence[float]], homology_dimension: int = 0
) -> PersistenceDiagram:
    """Inverse of ``to_birth_lifetime``; multiplicity defaults to 1."""
    pairs = []
    mults = []
    for point in points:
        birth, lifetime = float(point[0]), float(point[1])
        pairs.append((birth, birth + lifetime))
        mults.append(int(point[2]) if len(point) > 2 else 1)
    return PersistenceDiagram.from_pairs(pairs, mults, homology_dimension)


def multiplicity_in_region(diagram: PersistenceDiagram, region: WedgeRegion) -> int:
    """Total multiplicity of the diagram points lying in ``region``."""
    if diagram.is_empty:
        return 0
    inside = region.contains(diagram.births, diagram.lifetimes)
    return int(diagram.multiplicities[inside].sum())


def _matching_is_perfect(
    pair_dist: np.ndarray, half_pers_a: np.ndarray, half_pers_b: np.ndarray, delta: float
) -> bool:
    """Check for a delta-matching as a perfect matching in the augmented bipartite graph.

    Rows are the points of A followed by one diagonal slot per point of B;
    columns are the points of B followed by one diagonal slot per point of A.
    """
    n, k = pair_dist.shape
    size = n + k
    adjacency = np.zeros((size, size), dtype=bool)
    adjacency[:n, :k] = pair_dist <= delta
    adjacency[np.arange(n), k + np.arange(n)] = half_pers_a <= delta
    adjacency[n + np.arange(k), np.arange(k)] = half_pers_b <= delta
    adjacency[n:, k:] = True
    matching = maximum_bipartite_matching(
        csr_matrix(adjacency, dtype=np.int8), perm_type="column"
    )
    return bool(np.all(matching >= 0))


def bottleneck_distance(first: PersistenceDiagram, second: PersistenceDiagram) -> float:
    """Exact bottleneck distance between two finite diagrams.

    Points of multiplicity m are expanded into m matchable copies. The answer
    is the smallest candidate value (an L-infinity distance between points,
    or half a persistence) that admits a perfect matching; candidates are
    searched by bisection.

    Args:
        first: First diagram
        second: Second diagram

    Returns:
        float: The bottleneck distance
    """
    a = first.expanded()
    b = second.expanded()
    if a.shape[0] == 0 and b.shape[0] == 0:
        return 0.0

    # (n, k) L-infinity distances; the reduced axis has length 2 even when n or k is 0
    pair_dist = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
    half_pers_a = (a[:, 1] - a[:, 0]) / 2.0
    half_pers_b = (b[:, 1] - b[:, 0]) / 2.0

    candidates = np.unique(
        np.concatenate([[0.0], pair_dist.ravel(), half_pers_a, half_pers_b])
    )
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matching_is_perfect(pair_dist, half_pers_a, half_pers_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def compactness_diagnostics(
    collection: Sequence[PersistenceDiagram], epsilon_grid: Sequence[float]
) -> CompactnessReport:
    """Boundedness constants C, C_eps and M_eps of a finite collection.

    Args:
        collection: Diagrams to summarize
        epsilon_grid: Strictly increasing positive lifetime thresholds

    Returns:
        CompactnessReport: The constants and the tight birth-lifetime box

    Raises:
        InvalidDiagramError: If the collection is empty or the grid is invalid
    """
    if len(collection) == 0:
        raise InvalidDiagramError("Compactness diagnostics need at least one diagram")
    grid = [float(eps) for eps in epsilon_grid]
    if any(not math.isfinite(eps) or eps <= 0 for eps in grid):
        raise InvalidDiagramError("epsilon_grid must contain positive finite values")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidDiagramError("epsilon_grid must be strictly increasing")

    nonempty = [D for D in collection if not D.is_empty]
    bound_c = max((D.max_persistence for D in nonempty), default=0.0) / 2.0

    if nonempty:
        births = np.concatenate([D.births for D in nonempty])
        lifetimes = np.concatenate([D.lifetimes for D in nonempty])
        box = WedgeRegion(
            birth_min=float(births.min()),
            birth_max=float(births.max()),
            lifetime_min=float(lifetimes.min()),
            lifetime_max=float(lifetimes.max()),
        )
        min_lifetime = float(lifetimes.min())
    else:
        births = lifetimes = np.zeros(0)
        box = WedgeRegion(0.0, 0.0, 0.0, 0.0)
        min_lifetime = math.inf

    birth_bounds = []
    mult_bounds = []
    for eps in grid:
        above = lifetimes >= eps
        birth_bounds.append(float(births[above].max()) if np.any(above) else 0.0)
        region = WedgeRegion.closed_above(eps)
        mult_bounds.append(max(multiplicity_in_region(D, region) for D in collection))

    logger.debug(
        f"Compactness over {len(collection)} diagrams: C={bound_c:g}, "
        f"min lifetime={min_lifetime:g}"
    )
    return CompactnessReport(
        bound_C=bound_c,
        epsilon_grid=tuple(grid),
        birth_bounds_C_eps=tuple(birth_bounds),
        mult_bounds_M_eps=tuple(mult_bounds),
        bounding_box=box,
        min_positive_lifetime=min_lifetime,
        n_diagrams=len(collection),
    )
