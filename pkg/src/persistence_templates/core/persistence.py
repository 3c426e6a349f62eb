"""Vietoris-Rips persistence in dimensions 0 and 1."""

import logging
from typing import Dict, Iterable, Optional

import gudhi
import numpy as np
from scipy.spatial.distance import pdist, squareform

from .. import config
from ..exceptions import PointCloudError, SimplexBudgetExceededError, UnresolvedClassError
from ..models.diagram import PersistenceDiagram
from ..models.point_cloud import PointCloud
from ..utils.union_find import UnionFind

logger = logging.getLogger(__name__)


def distance_matrix(cloud: PointCloud) -> np.ndarray:
    """Euclidean distance matrix of the cloud."""
    if cloud.n_points == 1:
        return np.zeros((1, 1))
    return squareform(pdist(cloud.points))


def enclosing_radius(cloud: PointCloud) -> float:
    """Smallest r at which some point is within r of all others.

    The Rips complex at scale r is then a cone, so no 1-cycle outlives r.
    """
    return float(np.min(np.max(distance_matrix(cloud), axis=1)))


def rips_simplex_count(cloud: PointCloud, max_scale: float) -> int:
    """Number of vertices, edges and triangles of the Rips 2-skeleton at ``max_scale``."""
    dist = distance_matrix(cloud)
    adjacency = (dist <= max_scale).astype(np.int64)
    np.fill_diagonal(adjacency, 0)
    n_edges = int(adjacency.sum()) // 2
    # trace(A^3) counts each triangle six times
    n_triangles = int(((adjacency @ adjacency) * adjacency).sum()) // 6
    return cloud.n_points + n_edges + n_triangles


def rips_h0(cloud: PointCloud) -> PersistenceDiagram:
    """Zero-dimensional Rips diagram from the minimum spanning tree.

    Every component is born at 0 and dies at the length of the MST edge
    that merges it. The essential component and zero-length merges
    (repeated points) produce no diagram point.

    Args:
        cloud: Input point cloud

    Returns:
        PersistenceDiagram: The H0 diagram
    """
    n = cloud.n_points
    if n < 2:
        return PersistenceDiagram.empty(0)

    weights = pdist(cloud.points)
    rows, cols = np.triu_indices(n, k=1)
    # Stable tie-breaking on (distance, i, j)
    order = np.lexsort((cols, rows, weights))

    forest = UnionFind(n)
    deaths = []
    for edge in order:
        if forest.union(int(rows[edge]), int(cols[edge])):
            if weights[edge] > 0:
                deaths.append(float(weights[edge]))
            if forest.components == 1:
                break

    logger.debug(f"H0 of {n} points: {len(deaths)} finite classes")
    return PersistenceDiagram.from_pairs([(0.0, w) for w in deaths], homology_dimension=0)


def rips_h1(
    cloud: PointCloud,
    max_scale: Optional[float] = None,
    simplex_budget: Optional[int] = None,
) -> PersistenceDiagram:
    """One-dimensional Rips diagram over Z/2.

    The flag complex is built by gudhi from this package's distance matrix,
    edge-collapsed, expanded to dimension 2 and reduced with coefficients in
    Z/2.

    Args:
        cloud: Input point cloud
        max_scale: Largest filtration value; defaults to the enclosing radius
        simplex_budget: Maximum size of the 2-skeleton; defaults to RIPS_SIMPLEX_BUDGET

    Returns:
        PersistenceDiagram: The H1 diagram

    Raises:
        SimplexBudgetExceededError: If the 2-skeleton exceeds the budget
        UnresolvedClassError: If a class is still alive at ``max_scale``
    """
    if cloud.n_points < 3:
        return PersistenceDiagram.empty(1)

    dist = distance_matrix(cloud)
    if max_scale is None:
        scale = float(np.min(np.max(dist, axis=1)))
    else:
        if not max_scale > 0:
            raise PointCloudError(f"max_scale must be positive, got {max_scale}")
        scale = float(max_scale)

    budget = simplex_budget if simplex_budget is not None else config["RIPS_SIMPLEX_BUDGET"]
    count = rips_simplex_count(cloud, scale)
    logger.debug(
        f"Rips 2-skeleton of {cloud.n_points} points at scale {scale:g}: {count:,} simplices"
    )
    if count > budget:
        raise SimplexBudgetExceededError(count, budget)

    # Edges of length exactly `scale` must be present
    threshold = float(np.nextafter(scale, np.inf))
    rips = gudhi.RipsComplex(distance_matrix=dist, max_edge_length=threshold)
    simplex_tree = rips.create_simplex_tree(max_dimension=1)
    simplex_tree.collapse_edges()
    simplex_tree.expansion(2)
    simplex_tree.compute_persistence(homology_coeff_field=2)
    intervals = np.asarray(simplex_tree.persistence_intervals_in_dimension(1), dtype=float)

    if intervals.size == 0:
        return PersistenceDiagram.empty(1)
    intervals = intervals.reshape(-1, 2)
    if not np.all(np.isfinite(intervals[:, 1])):
        unresolved = int(np.sum(~np.isfinite(intervals[:, 1])))
        raise UnresolvedClassError(
            f"{unresolved} H1 classes are still alive at scale {scale:g}; increase max_scale"
        )
    intervals = intervals[intervals[:, 1] > intervals[:, 0]]
    return PersistenceDiagram.from_pairs(intervals, homology_dimension=1)


def rips_diagrams(
    cloud: PointCloud,
    dims: Iterable[int] = (0, 1),
    max_scale: Optional[float] = None,
    simplex_budget: Optional[int] = None,
) -> Dict[int, PersistenceDiagram]:
    """Compute the requested Rips diagrams of one cloud."""
    diagrams: Dict[int, PersistenceDiagram] = {}
    for dim in dims:
        if dim == 0:
            diagrams[0] = rips_h0(cloud)
        elif dim == 1:
            diagrams[1] = rips_h1(cloud, max_scale, simplex_budget)
        else:
            raise PointCloudError(f"Unsupported homology dimension {dim}")
    return diagrams
