"""Persistence diagram data model."""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import InvalidDiagramError


@dataclass(frozen=True)
class DiagramPoint:
    """A point of a persistence diagram with its multiplicity.

    Points live in the open wedge ``0 <= birth < death``; diagonal points are
    rejected rather than dropped.
    """

    birth: float
    death: float
    multiplicity: int = 1

    def __post_init__(self) -> None:
        birth = float(self.birth)
        death = float(self.death)
        if not (math.isfinite(birth) and math.isfinite(death)):
            raise InvalidDiagramError(f"Non-finite diagram point ({self.birth}, {self.death})")
        if birth < 0:
            raise InvalidDiagramError(f"Negative birth {birth}")
        if death <= birth:
            raise InvalidDiagramError(f"Point ({birth}, {death}) is not above the diagonal")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity < 1:
            raise InvalidDiagramError(
                f"Multiplicity must be a positive integer: {self.multiplicity}"
            )
        object.__setattr__(self, "birth", birth)
        object.__setattr__(self, "death", death)
        object.__setattr__(self, "multiplicity", int(self.multiplicity))

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def lifetime(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite multiset of diagram points.

    Entries are aggregated by (birth, death) and stored in canonical order, so
    two diagrams are equal exactly when they are equal as multisets.
    """

    points: Tuple[DiagramPoint, ...] = ()
    homology_dimension: int = 0

    def __post_init__(self) -> None:
        if self.homology_dimension < 0:
            raise InvalidDiagramError(f"Negative homology dimension {self.homology_dimension}")
        counts: Dict[Tuple[float, float], int] = {}
        for point in self.points:
            if not isinstance(point, DiagramPoint):
                raise InvalidDiagramError(f"Expected DiagramPoint, got {type(point).__name__}")
            key = (point.birth, point.death)
            counts[key] = counts.get(key, 0) + point.multiplicity
        canonical = tuple(DiagramPoint(b, d, m) for (b, d), m in sorted(counts.items()))
        object.__setattr__(self, "points", canonical)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[Sequence[float]],
        multiplicities: Optional[Iterable[int]] = None,
        homology_dimension: int = 0,
    ) -> "PersistenceDiagram":
        """Build a diagram from (birth, death) pairs, aggregating repeats."""
        pairs = [tuple(p) for p in pairs]
        if multiplicities is None:
            mults: List[int] = [1] * len(pairs)
        else:
            mults = list(multiplicities)
            if len(mults) != len(pairs):
                raise InvalidDiagramError("Multiplicities do not match the number of pairs")
        points = tuple(DiagramPoint(p[0], p[1], m) for p, m in zip(pairs, mults))
        return cls(points, homology_dimension)

    @classmethod
    def empty(cls, homology_dimension: int = 0) -> "PersistenceDiagram":
        return cls((), homology_dimension)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[DiagramPoint]:
        return iter(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        body = ", ".join(f"({p.birth:g}, {p.death:g}, m={p.multiplicity})" for p in self.points)
        return f"PersistenceDiagram(h{self.homology_dimension}: {{{body}}})"

    @property
    def is_empty(self) -> bool:
        return not self.points

    @property
    def total_multiplicity(self) -> int:
        return sum(p.multiplicity for p in self.points)

    @property
    def births(self) -> np.ndarray:
        return np.array([p.birth for p in self.points], dtype=float)

    @property
    def deaths(self) -> np.ndarray:
        return np.array([p.death for p in self.points], dtype=float)

    @property
    def lifetimes(self) -> np.ndarray:
        return self.deaths - self.births

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([p.multiplicity for p in self.points], dtype=np.int64)

    @property
    def max_persistence(self) -> float:
        """Largest persistence in the diagram, 0 for the empty diagram."""
        if not self.points:
            return 0.0
        return float(np.max(self.lifetimes))

    def as_array(self) -> np.ndarray:
        """Return an (N, 3) array of birth, death, multiplicity."""
        if not self.points:
            return np.zeros((0, 3))
        return np.column_stack([self.births, self.deaths, self.multiplicities.astype(float)])

    def expanded(self) -> np.ndarray:
        """Return an (K, 2) birth/death array with one row per unit of multiplicity."""
        if not self.points:
            return np.zeros((0, 2))
        pairs = np.column_stack([self.births, self.deaths])
        return np.repeat(pairs, self.multiplicities, axis=0)

    def union(self, other: "PersistenceDiagram") -> "PersistenceDiagram":
        """Disjoint union; multiplicities of shared points add."""
        return PersistenceDiagram(self.points + other.points, self.homology_dimension)

    def with_dimension(self, homology_dimension: int) -> "PersistenceDiagram":
        return PersistenceDiagram(self.points, homology_dimension)


@dataclass(frozen=True)
class WedgeRegion:
    """Axis-aligned region of the birth-lifetime plane.

    Each bound may be inclusive or exclusive; infinite upper bounds describe
    regions such as the closed wedge above a lifetime threshold.
    """

    birth_min: float = 0.0
    birth_max: float = math.inf
    lifetime_min: float = 0.0
    lifetime_max: float = math.inf
    birth_min_inclusive: bool = True
    birth_max_inclusive: bool = True
    lifetime_min_inclusive: bool = True
    lifetime_max_inclusive: bool = True

    def __post_init__(self) -> None:
        if self.birth_min < 0 or self.lifetime_min < 0:
            raise InvalidDiagramError("Wedge region bounds must be nonnegative")
        if self.birth_min > self.birth_max:
            raise InvalidDiagramError(f"birth_min {self.birth_min} > birth_max {self.birth_max}")
        if self.lifetime_min > self.lifetime_max:
            raise InvalidDiagramError(
                f"lifetime_min {self.lifetime_min} > lifetime_max {self.lifetime_max}"
            )

    @classmethod
    def whole_wedge(cls) -> "WedgeRegion":
        return cls(lifetime_min_inclusive=False)

    @classmethod
    def closed_above(cls, epsilon: float) -> "WedgeRegion":
        """The closed wedge of points with lifetime at least ``epsilon``."""
        return cls(lifetime_min=epsilon)

    @property
    def width(self) -> float:
        return self.birth_max - self.birth_min

    @property
    def height(self) -> float:
        return self.lifetime_max - self.lifetime_min

    def contains(self, births: np.ndarray, lifetimes: np.ndarray) -> np.ndarray:
        """Vectorized membership test for birth-lifetime coordinates."""
        births = np.asarray(births, dtype=float)
        lifetimes = np.asarray(lifetimes, dtype=float)
        lower_b = births >= self.birth_min if self.birth_min_inclusive else births > self.birth_min
        upper_b = births <= self.birth_max if self.birth_max_inclusive else births < self.birth_max
        lower_l = (
            lifetimes >= self.lifetime_min
            if self.lifetime_min_inclusive
            else lifetimes > self.lifetime_min
        )
        upper_l = (
            lifetimes <= self.lifetime_max
            if self.lifetime_max_inclusive
            else lifetimes < self.lifetime_max
        )
        return lower_b & upper_b & lower_l & upper_l


@dataclass(frozen=True)
class CompactnessReport:
    """Boundedness constants of a finite collection of diagrams."""

    bound_C: float
    epsilon_grid: Tuple[float, ...]
    birth_bounds_C_eps: Tuple[float, ...]
    mult_bounds_M_eps: Tuple[int, ...]
    bounding_box: WedgeRegion
    min_positive_lifetime: float
    n_diagrams: int = field(default=0)
