"""Seeded generators for synthetic diagrams and manifold point clouds."""

import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from ..exceptions import DataGenerationError
from ..models.diagram import PersistenceDiagram
from ..models.point_cloud import PointCloud

logger = logging.getLogger(__name__)

CLUSTER_STD = 0.05
SPHERE_NOISE = 0.05
TORUS_MAJOR_RADIUS = 2.0
TORUS_MINOR_RADIUS = 1.0

THREE_CLUSTER_CENTERS = ((0.0, 0.0), (0.0, 2.0), (2.0, 0.0))
NINE_CLUSTER_CENTERS = (
    (0.0, 0.0),
    (0.0, 1.5),
    (1.5, 0.0),
    (0.0, 4.0),
    (1.0, 3.0),
    (1.0, 5.0),
    (3.0, 4.0),
    (3.0, 5.5),
    (4.5, 4.0),
)

MANIFOLD_KINDS = (
    "annulus",
    "three_clusters",
    "three_by_three_clusters",
    "cube",
    "torus",
    "sphere",
)


def gen_normal_diagram(
    mu: Sequence[float], sigma: float, n: int, rng: np.random.Generator
) -> PersistenceDiagram:
    """Draw ``n`` points from N(mu, sigma^2 I) in the birth-death plane and keep those in the wedge.

    Args:
        mu: Mean (birth, death)
        sigma: Standard deviation of both coordinates
        n: Number of draws; the diagram has at most n points
        rng: Random generator

    Returns:
        PersistenceDiagram: Points with 0 <= birth < death
    """
    if not sigma > 0:
        raise DataGenerationError(f"sigma must be positive, got {sigma}")
    if n < 0:
        raise DataGenerationError(f"n must be nonnegative, got {n}")
    if n == 0:
        return PersistenceDiagram.empty()
    draws = rng.normal(loc=np.asarray(mu, dtype=float), scale=sigma, size=(n, 2))
    kept = draws[(draws[:, 0] >= 0) & (draws[:, 0] < draws[:, 1])]
    return PersistenceDiagram.from_pairs(kept)


def _split_sizes(total: int, parts: int) -> np.ndarray:
    return np.array([len(chunk) for chunk in np.array_split(np.arange(total), parts)])


def _clusters(
    centers: Sequence[Tuple[float, float]], n_points: int, rng: np.random.Generator
) -> np.ndarray:
    sizes = _split_sizes(n_points, len(centers))
    blocks = [
        np.asarray(center) + rng.normal(0.0, CLUSTER_STD, size=(size, 2))
        for center, size in zip(centers, sizes)
    ]
    return np.vstack(blocks)


def _annulus(n_points: int, rng: np.random.Generator) -> np.ndarray:
    # Uniform in area between radii 1 and 2
    radius = np.sqrt(rng.uniform(1.0, 4.0, size=n_points))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def _sphere(n_points: int, rng: np.random.Generator) -> np.ndarray:
    directions = rng.normal(size=(n_points, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radius = 1.0 + rng.uniform(-SPHERE_NOISE, SPHERE_NOISE, size=n_points)
    return directions * radius[:, None]


def torus_minor_angles(
    n_points: int,
    rng: np.random.Generator,
    major_radius: float = TORUS_MAJOR_RADIUS,
    minor_radius: float = TORUS_MINOR_RADIUS,
) -> np.ndarray:
    """Minor angles distributed proportionally to the torus area element.

    A uniform angle phi is accepted with probability
    (1 + (r/R) cos phi) / (1 + r/R).
    """
    ratio = minor_radius / major_radius
    accepted = np.zeros(0)
    while accepted.size < n_points:
        batch = max(2 * (n_points - accepted.size), 16)
        phi = rng.uniform(0.0, 2.0 * np.pi, size=batch)
        keep = rng.uniform(0.0, 1.0, size=batch) < (1.0 + ratio * np.cos(phi)) / (1.0 + ratio)
        accepted = np.concatenate([accepted, phi[keep]])
    return accepted[:n_points]


def _torus(n_points: int, rng: np.random.Generator) -> np.ndarray:
    phi = torus_minor_angles(n_points, rng)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
    ring = TORUS_MAJOR_RADIUS + TORUS_MINOR_RADIUS * np.cos(phi)
    return np.column_stack(
        [ring * np.cos(theta), ring * np.sin(theta), TORUS_MINOR_RADIUS * np.sin(phi)]
    )


def gen_manifold(kind: str, n_points: int, rng: np.random.Generator) -> PointCloud:
    """Sample ``n_points`` from one of the six manifold classes.

    Args:
        kind: One of ``MANIFOLD_KINDS``
        n_points: Number of points
        rng: Random generator

    Returns:
        PointCloud: The sample

    Raises:
        DataGenerationError: For an unknown kind or a nonpositive size
    """
    if n_points < 1:
        raise DataGenerationError(f"n_points must be positive, got {n_points}")
    if kind == "annulus":
        points = _annulus(n_points, rng)
    elif kind == "three_clusters":
        points = _clusters(THREE_CLUSTER_CENTERS, n_points, rng)
    elif kind == "three_by_three_clusters":
        points = _clusters(NINE_CLUSTER_CENTERS, n_points, rng)
    elif kind == "cube":
        points = rng.uniform(0.0, 1.0, size=(n_points, 2))
    elif kind == "torus":
        points = _torus(n_points, rng)
    elif kind == "sphere":
        points = _sphere(n_points, rng)
    else:
        raise DataGenerationError(
            f"Unknown manifold kind {kind!r}; expected one of {', '.join(MANIFOLD_KINDS)}"
        )
    return PointCloud(points)


def manifold_labels() -> Dict[str, int]:
    """Class index of each manifold kind."""
    return {kind: index for index, kind in enumerate(MANIFOLD_KINDS)}
