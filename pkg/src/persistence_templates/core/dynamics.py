"""Rossler simulation, the zero-one test for chaos, extrema and delay embedding."""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .. import config as env_config
from ..exceptions import DataGenerationError, SimulationDivergedError
from ..models.diagram import PersistenceDiagram
from ..models.dynamics import RegimeLabel, RosslerConfig, RosslerRun
from ..models.point_cloud import PointCloud
from ..utils.seeding import derive_rng
from .persistence import rips_h1

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]

ZERO_ONE_STRIDE = 6
ZERO_ONE_MIN_LENGTH = 1000
ZERO_ONE_N_FREQUENCIES = 100
CHAOS_THRESHOLD = 0.5
EMBEDDING_DIM = 3
MAX_ACF_LAG = 50
MAX_CLOUD_POINTS = 400
# Complete 2-skeleton on MAX_CLOUD_POINTS vertices
CLOUD_SIMPLEX_BUDGET = 10_700_000


# Integration


def rk4_step(field: VectorField, state: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of an autonomous system."""
    k1 = field(state)
    k2 = field(state + 0.5 * dt * k1)
    k3 = field(state + 0.5 * dt * k2)
    k4 = field(state + dt * k3)
    return state + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def rk4_integrate(field: VectorField, y0: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    """Fixed-step RK4 trajectory with shape (n_steps + 1, *y0.shape), starting at ``y0``."""
    if not dt > 0:
        raise DataGenerationError(f"dt must be positive, got {dt}")
    state = np.array(y0, dtype=float)
    trajectory = np.empty((n_steps + 1,) + state.shape)
    trajectory[0] = state
    for step in range(n_steps):
        state = rk4_step(field, state, dt)
        trajectory[step + 1] = state
    return trajectory


def rossler_field(alpha: np.ndarray, beta: float, gamma: float) -> VectorField:
    """Rossler vector field for states of shape (3, ...) and broadcastable ``alpha``."""

    def field(state: np.ndarray) -> np.ndarray:
        x, y, z = state
        return np.stack([-y - z, x + alpha * y, beta + z * (x - gamma)])

    return field


def simulate_rossler_ensemble(
    alphas: Sequence[float], seeds: Sequence[int], config: Optional[RosslerConfig] = None
) -> List[RosslerRun]:
    """Integrate one Rossler trajectory per (alpha, seed) pair in a single vectorized pass.

    Each run starts from uniform [0, 1]^3 initial conditions drawn from its
    own seed, so results do not depend on which runs share a pass.

    Raises:
        SimulationDivergedError: If any trajectory becomes non-finite
    """
    config = config or RosslerConfig()
    alpha = np.asarray(alphas, dtype=float)
    if alpha.ndim != 1 or len(seeds) != alpha.size:
        raise DataGenerationError("alphas and seeds must be matching 1-D sequences")
    state = np.stack([derive_rng(seed).uniform(0.0, 1.0, size=3) for seed in seeds], axis=1)
    field = rossler_field(alpha, config.beta, config.gamma)

    keep = config.n_points // 2
    retained = np.empty((keep, alpha.size))
    first_kept = config.n_points - keep
    with np.errstate(over="ignore", invalid="ignore"):
        for sample in range(config.n_points):
            if sample > 0:
                state = rk4_step(field, state, config.dt)
            if sample >= first_kept:
                retained[sample - first_kept] = state[0]

    runs = []
    for k, (a, seed) in enumerate(zip(alpha, seeds)):
        series = retained[:, k]
        if not np.all(np.isfinite(series)):
            bad = int(np.argmax(~np.isfinite(series))) + first_kept
            raise SimulationDivergedError(
                f"Rossler trajectory for alpha={a:g} (seed {seed}) diverged at sample {bad}"
            )
        runs.append(RosslerRun(float(a), config, series.copy(), int(seed)))
    return runs


def rossler_simulate(
    alpha: float, seed: int = 0, config: Optional[RosslerConfig] = None
) -> RosslerRun:
    """Simulate the Rossler system and keep the second half of the x coordinate.

    Args:
        alpha: The alpha parameter
        seed: Seed of the uniform [0, 1]^3 initial condition
        config: beta, gamma, time step and number of samples

    Returns:
        RosslerRun: The retained series (unlabeled)
    """
    return simulate_rossler_ensemble([alpha], [seed], config)[0]


# Zero-one test


def zero_one_test(
    series: Sequence[float],
    subsample_stride: int = ZERO_ONE_STRIDE,
    rng: Optional[np.random.Generator] = None,
    n_frequencies: int = ZERO_ONE_N_FREQUENCIES,
) -> float:
    """Zero-one test for chaos: about 0 for regular and about 1 for chaotic series.

    For random frequencies c in (pi/5, 4pi/5) the translation variables
    p_n and q_n are accumulated, their mean-square displacement M(n) is
    corrected by its oscillatory term, and the growth rate K_c is the
    correlation of the corrected displacement with n for n up to a tenth
    of the series length. The result is the median K_c clipped to [0, 1].

    Args:
        series: Time series
        subsample_stride: Keep every k-th sample first
        rng: Random generator for the frequencies
        n_frequencies: Number of random frequencies

    Returns:
        float: The test statistic

    Raises:
        DataGenerationError: If fewer than 1000 samples remain after striding
    """
    if subsample_stride < 1:
        raise DataGenerationError(f"subsample_stride must be positive, got {subsample_stride}")
    x = np.asarray(series, dtype=float)[::subsample_stride]
    if x.size < ZERO_ONE_MIN_LENGTH:
        raise DataGenerationError(
            f"Zero-one test needs {ZERO_ONE_MIN_LENGTH} samples after striding, got {x.size}"
        )
    if not np.all(np.isfinite(x)):
        raise DataGenerationError("Zero-one test input has non-finite samples")
    if np.ptp(x) == 0:
        return 0.0

    rng = rng if rng is not None else np.random.default_rng(0)
    length = x.size
    n_cut = length // 10
    lags = np.arange(1, n_cut + 1)
    j = np.arange(1, length + 1)
    mean_sq = np.mean(x) ** 2
    frequencies = rng.uniform(np.pi / 5.0, 4.0 * np.pi / 5.0, size=n_frequencies)

    growth = np.empty(n_frequencies)
    displacement = np.empty(n_cut)
    for k, c in enumerate(frequencies):
        p = np.cumsum(x * np.cos(j * c))
        q = np.cumsum(x * np.sin(j * c))
        for idx, n in enumerate(lags):
            displacement[idx] = np.mean((p[n:] - p[:-n]) ** 2 + (q[n:] - q[:-n]) ** 2)
        corrected = displacement - mean_sq * (1.0 - np.cos(lags * c)) / (1.0 - np.cos(c))
        if np.std(corrected) == 0:
            growth[k] = 0.0
        else:
            growth[k] = np.corrcoef(lags, corrected)[0, 1]

    score = float(np.clip(np.median(growth), 0.0, 1.0))
    logger.debug(f"Zero-one test over {length} samples: K={score:.4f}")
    return score


def label_from_score(score: float, threshold: float = CHAOS_THRESHOLD) -> RegimeLabel:
    return RegimeLabel.CHAOTIC if score > threshold else RegimeLabel.PERIODIC


# Extrema and embeddings


def _runs(series: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run-length compression: values, first and last index of each constant run."""
    change = np.flatnonzero(np.diff(series) != 0) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change - 1, [series.size - 1]])
    return series[starts], starts, ends


def extrema_indices(series: Sequence[float]) -> np.ndarray:
    """Indices of strict local extrema; plateaus report their midpoint."""
    x = np.asarray(series, dtype=float)
    if x.size < 3:
        return np.zeros(0, dtype=int)
    values, starts, ends = _runs(x)
    if values.size < 3:
        return np.zeros(0, dtype=int)
    turn = (values[1:-1] - values[:-2]) * (values[2:] - values[1:-1]) < 0
    interior = np.flatnonzero(turn) + 1
    return (starts[interior] + ends[interior]) // 2


def extrema(series: Sequence[float]) -> np.ndarray:
    """Values of the local extrema of a sampled series, in time order."""
    x = np.asarray(series, dtype=float)
    return x[extrema_indices(x)]


def bifurcation_points(runs: Sequence[RosslerRun]) -> List[Tuple[float, float]]:
    """(alpha, extremum value) pairs of every run, for bifurcation plots."""
    points = []
    for run in runs:
        points.extend((run.alpha, float(value)) for value in extrema(run.x_series))
    return points


def delay_embed(series: Sequence[float], dim: int, tau: int) -> PointCloud:
    """Delay vectors (x_k, x_{k+tau}, ..., x_{k+(dim-1)tau}).

    Raises:
        DataGenerationError: If the series is not longer than (dim - 1) * tau
    """
    if dim < 1 or tau < 1:
        raise DataGenerationError(f"dim and tau must be positive, got dim={dim}, tau={tau}")
    x = np.asarray(series, dtype=float)
    span = (dim - 1) * tau
    if x.size <= span:
        raise DataGenerationError(
            f"Series of length {x.size} is too short for dim={dim}, tau={tau}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(x, span + 1)
    return PointCloud(windows[:, ::tau].copy())


def first_autocorrelation_minimum(series: Sequence[float], max_lag: int = MAX_ACF_LAG) -> int:
    """First lag in 1..max_lag where the autocorrelation has a local minimum.

    Falls back to the global minimum over the searched lags.
    """
    x = np.asarray(series, dtype=float)
    if x.size <= max_lag + 1:
        raise DataGenerationError(f"Series of length {x.size} is too short for lag {max_lag}")
    x = x - x.mean()
    variance = float(np.dot(x, x))
    if variance == 0:
        return 1
    acf = np.array([np.dot(x[:-lag], x[lag:]) / variance for lag in range(1, max_lag + 2)])
    for lag in range(1, max_lag + 1):
        previous = acf[lag - 2] if lag > 1 else 1.0
        if acf[lag - 1] < previous and acf[lag - 1] <= acf[lag]:
            return lag
    return int(np.argmin(acf[:max_lag])) + 1


def embedding_delay(series: Sequence[float], max_lag: int = MAX_ACF_LAG) -> int:
    """Delay of about a quarter of the dominant period.

    The first autocorrelation minimum sits near half a period, so half of it
    makes three delay coordinates span half a period and trace a round loop.
    """
    return max(1, first_autocorrelation_minimum(series, max_lag) // 2)


def spread_indices(n_candidates: int, max_points: int) -> np.ndarray:
    """Up to ``max_points`` distinct indices spread evenly over ``range(n_candidates)``."""
    if n_candidates <= max_points:
        return np.arange(n_candidates)
    return np.unique(np.linspace(0, n_candidates - 1, max_points).round().astype(int))


def series_point_cloud(
    series: Sequence[float],
    dim: int = EMBEDDING_DIM,
    stride: int = ZERO_ONE_STRIDE,
    max_points: int = MAX_CLOUD_POINTS,
    max_lag: int = MAX_ACF_LAG,
) -> PointCloud:
    """Standardize and delay-embed a series, keeping every ``stride``-th vector.

    When more than ``max_points`` strided vectors exist, ``max_points`` of them
    are taken evenly from the whole series, first and last included.
    """
    if max_points < 1:
        raise DataGenerationError(f"max_points must be positive, got {max_points}")
    x = np.asarray(series, dtype=float)
    spread = float(np.std(x))
    if spread == 0:
        raise DataGenerationError("Cannot embed a constant series")
    x = (x - x.mean()) / spread
    tau = embedding_delay(x, max_lag)
    cloud = delay_embed(x, dim, tau)
    strided = np.arange(0, cloud.n_points, stride)
    indices = strided[spread_indices(strided.size, max_points)]
    logger.debug(f"Embedded series with tau={tau}: {indices.size} of {strided.size} points")
    return cloud.subsample(indices)


def rossler_diagram(
    run: RosslerRun,
    dim: int = EMBEDDING_DIM,
    stride: int = ZERO_ONE_STRIDE,
    max_points: int = MAX_CLOUD_POINTS,
    simplex_budget: Optional[int] = None,
) -> PersistenceDiagram:
    """H1 diagram of the delay-embedded retained series of a run.

    The budget defaults to the larger of RIPS_SIMPLEX_BUDGET and a complete
    2-skeleton on ``MAX_CLOUD_POINTS`` vertices.
    """
    cloud = series_point_cloud(run.x_series, dim, stride, max_points)
    if simplex_budget is None:
        simplex_budget = max(env_config["RIPS_SIMPLEX_BUDGET"], CLOUD_SIMPLEX_BUDGET)
    return rips_h1(cloud, simplex_budget=simplex_budget)
