"""Point cloud data model."""

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ..exceptions import PointCloudError


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite set of points in Euclidean space, stored as a read-only (n, d) array."""

    points: np.ndarray

    def __post_init__(self) -> None:
        try:
            array = np.array(self.points, dtype=float)
        except ValueError as e:
            raise PointCloudError(f"Point cloud rows have inconsistent dimension: {e}") from e
        if array.ndim == 1:
            # A flat sequence is read as 1-D points
            array = array.reshape(-1, 1)
        if array.ndim != 2:
            raise PointCloudError(f"Point cloud must be a 2-D array, got {array.ndim} dimensions")
        if array.shape[0] == 0:
            raise PointCloudError("Point cloud is empty")
        if array.shape[1] == 0:
            raise PointCloudError("Points must have at least one coordinate")
        if not np.all(np.isfinite(array)):
            raise PointCloudError("Point cloud has non-finite coordinates")
        array.setflags(write=False)
        object.__setattr__(self, "points", array)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> "PointCloud":
        return cls(np.array(list(rows), dtype=float))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )

    def __hash__(self) -> int:
        return hash((self.points.shape, self.points.tobytes()))

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1])

    def subsample(self, indices: Union[Sequence[int], np.ndarray]) -> "PointCloud":
        return PointCloud(self.points[np.asarray(indices)])
