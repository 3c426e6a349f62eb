"""Rossler system configuration and simulated runs."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from ..exceptions import DataGenerationError

# Default Rossler parameters
DEFAULT_BETA = 2.0
DEFAULT_GAMMA = 4.0
DEFAULT_DT = 0.2
DEFAULT_N_POINTS = 20000


class RegimeLabel(str, Enum):
    """Dynamical regime of a time series."""

    PERIODIC = "periodic"
    CHAOTIC = "chaotic"
    UNLABELED = "unlabeled"


@dataclass(frozen=True)
class RosslerConfig:
    """Fixed parameters of a Rossler simulation; ``alpha`` varies per run."""

    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    dt: float = DEFAULT_DT
    n_points: int = DEFAULT_N_POINTS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise DataGenerationError(f"dt must be positive, got {self.dt}")
        if self.n_points < 2 or self.n_points % 2:
            raise DataGenerationError(
                f"n_points must be a positive even number, got {self.n_points}"
            )
        if not (math.isfinite(self.beta) and math.isfinite(self.gamma)):
            raise DataGenerationError("beta and gamma must be finite")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "gamma": self.gamma,
            "dt": self.dt,
            "n_points": self.n_points,
        }


@dataclass(frozen=True, eq=False)
class RosslerRun:
    """Retained second half of the x coordinate of one Rossler trajectory."""

    alpha: float
    config: RosslerConfig
    x_series: np.ndarray
    seed: int = 0
    label: RegimeLabel = RegimeLabel.UNLABELED

    def __post_init__(self) -> None:
        series = np.array(self.x_series, dtype=float)
        if series.ndim != 1 or series.shape[0] != self.config.n_points // 2:
            raise DataGenerationError(
                f"Expected {self.config.n_points // 2} retained samples, got {series.shape}"
            )
        if not np.all(np.isfinite(series)):
            raise DataGenerationError("Rossler series has non-finite samples")
        series.setflags(write=False)
        object.__setattr__(self, "x_series", series)

    @property
    def beta(self) -> float:
        return self.config.beta

    @property
    def gamma(self) -> float:
        return self.config.gamma

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def n_points(self) -> int:
        return self.config.n_points

    def with_label(self, label: RegimeLabel) -> "RosslerRun":
        return RosslerRun(self.alpha, self.config, self.x_series, self.seed, RegimeLabel(label))
