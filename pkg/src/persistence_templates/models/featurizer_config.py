"""Featurizer parameter bundles and feature matrices."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import FeaturizerError

# Default featurizer values
DEFAULT_TENT_D = 10
DEFAULT_TENT_PAD = 0.05
DEFAULT_TENT_TRIM = 0.01
DEFAULT_MESH_SIZE = 10
DEFAULT_PAD_MODE = "half_B"
PAD_MODES = ("machine_eps", "half_B")


def _check_positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise FeaturizerError(f"{name} must be a positive finite number, got {value!r}")


def _check_count(name: str, value: int) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise FeaturizerError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class TentGrid:
    """Tent-function grid.

    Tent ``(i, j)`` for ``0 <= i <= d`` and ``1 <= j <= d`` is centered at
    ``(birth_start + delta * i, lifetime_start + delta * j + epsilon)`` in the
    birth-lifetime plane with an L-infinity box support of radius ``delta``.
    """

    d: int
    delta: float
    epsilon: float
    birth_start: float = 0.0
    lifetime_start: float = 0.0

    kind = "tents"

    def __post_init__(self) -> None:
        _check_count("d", self.d)
        _check_positive("delta", self.delta)
        _check_positive("epsilon", self.epsilon)
        if not math.isfinite(self.birth_start):
            raise FeaturizerError("birth_start must be finite")
        if not math.isfinite(self.lifetime_start) or self.lifetime_start < 0:
            raise FeaturizerError(
                f"lifetime_start must be nonnegative, got {self.lifetime_start!r}"
            )

    @property
    def feature_count(self) -> int:
        return (self.d + 1) * self.d

    def grid_positions(self) -> List[Tuple[int, int]]:
        """Grid positions in column order, index ``i * d + (j - 1)``."""
        return [(i, j) for i in range(self.d + 1) for j in range(1, self.d + 1)]

    def grid_shape(self) -> Tuple[int, int]:
        return (self.d + 1, self.d)

    def centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Return (d+1, d) arrays of tent-center births and lifetimes."""
        births = self.birth_start + self.delta * np.arange(self.d + 1, dtype=float)
        lifetimes = (
            self.lifetime_start + self.delta * np.arange(1, self.d + 1, dtype=float) + self.epsilon
        )
        return np.meshgrid(births, lifetimes, indexing="ij")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "d": int(self.d),
            "delta": float(self.delta),
            "epsilon": float(self.epsilon),
            "birth_start": float(self.birth_start),
            "lifetime_start": float(self.lifetime_start),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TentGrid":
        return cls(
            d=int(data["d"]),
            delta=float(data["delta"]),
            epsilon=float(data["epsilon"]),
            birth_start=float(data.get("birth_start", 0.0)),
            lifetime_start=float(data.get("lifetime_start", 0.0)),
        )


@dataclass(frozen=True)
class ChebMesh:
    """Chebyshev interpolating-polynomial mesh.

    ``m + 1`` Chebyshev points of the second kind span the birth interval and
    ``n + 1`` span the lifetime interval. Template ``(i, j)`` is the product
    of the i-th birth and j-th lifetime Lagrange basis polynomials, cut off
    outside the box padded by ``support_pad``.
    """

    m: int
    n: int
    birth_range: Tuple[float, float]
    lifetime_range: Tuple[float, float]
    abs_mode: bool = True
    support_pad: float = 0.0

    kind = "polynomials"

    def __post_init__(self) -> None:
        _check_count("m", self.m)
        _check_count("n", self.n)
        birth_range = tuple(float(v) for v in self.birth_range)
        lifetime_range = tuple(float(v) for v in self.lifetime_range)
        if len(birth_range) != 2 or len(lifetime_range) != 2:
            raise FeaturizerError("birth_range and lifetime_range must be (lo, hi) pairs")
        if not all(math.isfinite(v) for v in birth_range + lifetime_range):
            raise FeaturizerError("Mesh box bounds must be finite")
        if birth_range[0] >= birth_range[1]:
            raise FeaturizerError(f"Empty birth interval {birth_range}")
        if lifetime_range[0] >= lifetime_range[1]:
            raise FeaturizerError(f"Empty lifetime interval {lifetime_range}")
        if lifetime_range[0] <= 0:
            raise FeaturizerError(f"Lifetime interval must start above 0, got {lifetime_range[0]}")
        if not math.isfinite(self.support_pad) or self.support_pad < 0:
            raise FeaturizerError(f"support_pad must be nonnegative, got {self.support_pad!r}")
        if lifetime_range[0] - self.support_pad <= 0:
            raise FeaturizerError(
                f"support_pad {self.support_pad} reaches the diagonal "
                f"(lifetime lower bound {lifetime_range[0]})"
            )
        object.__setattr__(self, "birth_range", birth_range)
        object.__setattr__(self, "lifetime_range", lifetime_range)
        object.__setattr__(self, "abs_mode", bool(self.abs_mode))

    @property
    def feature_count(self) -> int:
        return (self.m + 1) * (self.n + 1)

    def grid_positions(self) -> List[Tuple[int, int]]:
        """Grid positions in column order, index ``i * (n + 1) + j``."""
        return [(i, j) for i in range(self.m + 1) for j in range(self.n + 1)]

    def grid_shape(self) -> Tuple[int, int]:
        return (self.m + 1, self.n + 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "m": int(self.m),
            "n": int(self.n),
            "birth_range": list(self.birth_range),
            "lifetime_range": list(self.lifetime_range),
            "abs_mode": self.abs_mode,
            "support_pad": float(self.support_pad),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChebMesh":
        return cls(
            m=int(data["m"]),
            n=int(data["n"]),
            birth_range=tuple(data["birth_range"]),  # type: ignore[arg-type]
            lifetime_range=tuple(data["lifetime_range"]),  # type: ignore[arg-type]
            abs_mode=bool(data.get("abs_mode", True)),
            support_pad=float(data.get("support_pad", 0.0)),
        )


Featurizer = Union[TentGrid, ChebMesh]


def featurizer_from_dict(data: Dict[str, Any]) -> Featurizer:
    """Rebuild a featurizer from its ``to_dict`` form."""
    kind = data.get("kind")
    if kind == TentGrid.kind:
        return TentGrid.from_dict(data)
    if kind == ChebMesh.kind:
        return ChebMesh.from_dict(data)
    raise FeaturizerError(f"Unknown featurizer kind: {kind!r}")


@dataclass(frozen=True, order=True)
class ColumnKey:
    """Grid position of a feature column."""

    dimension: int
    i: int
    j: int

    @property
    def name(self) -> str:
        return f"h{self.dimension}_i{self.i}_j{self.j}"

    @classmethod
    def parse(cls, name: str) -> "ColumnKey":
        try:
            dim_part, i_part, j_part = name.strip().split("_")
            if dim_part[0] != "h" or i_part[0] != "i" or j_part[0] != "j":
                raise ValueError(name)
            return cls(int(dim_part[1:]), int(i_part[1:]), int(j_part[1:]))
        except (ValueError, IndexError) as e:
            raise FeaturizerError(f"Malformed feature column name: {name!r}") from e


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows are diagrams (or diagram tuples), columns are template functions."""

    values: np.ndarray
    column_index: Tuple[ColumnKey, ...]
    row_ids: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise FeaturizerError(f"Feature matrix must be 2-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise FeaturizerError("Feature matrix has non-finite entries")
        column_index = tuple(self.column_index)
        if len(column_index) != values.shape[1]:
            raise FeaturizerError(
                f"column_index has {len(column_index)} entries for {values.shape[1]} columns"
            )
        if len(set(column_index)) != len(column_index):
            raise FeaturizerError("column_index has duplicate grid positions")
        if self.row_ids is not None:
            row_ids = tuple(str(r) for r in self.row_ids)
            if len(row_ids) != values.shape[0]:
                raise FeaturizerError("row_ids do not match the number of rows")
            object.__setattr__(self, "row_ids", row_ids)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_index", column_index)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    @property
    def column_names(self) -> List[str]:
        return [key.name for key in self.column_index]

    def take_rows(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=int)
        row_ids = None if self.row_ids is None else tuple(self.row_ids[k] for k in idx)
        return FeatureMatrix(self.values[idx], self.column_index, row_ids)
