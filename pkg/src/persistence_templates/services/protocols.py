"""Experiment protocols: dataset builders and the per-run fit-and-score loop.

Each protocol turns an ``ExperimentConfig`` and a run index into scores,
predictions and (for run 0) coefficient grids. All randomness comes from
streams derived from the configured seed, so runs are independent of
scheduling and of each other.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.datagen import MANIFOLD_KINDS, gen_manifold, gen_normal_diagram
from ..core.dynamics import (
    bifurcation_points,
    label_from_score,
    rossler_diagram,
    simulate_rossler_ensemble,
    zero_one_test,
)
from ..core.featurize import featurize_dataset, fit_featurizer
from ..core.learn import (
    CoefficientGrid,
    accuracy,
    coefficient_grid,
    r2_score,
    ridge_classifier_fit,
    ridge_cv,
)
from ..core.persistence import rips_diagrams
from ..exceptions import ExperimentError
from ..models.diagram import PersistenceDiagram
from ..models.dynamics import RegimeLabel, RosslerConfig, RosslerRun
from ..models.experiment_config import ExperimentConfig
from ..models.featurizer_config import Featurizer
from ..models.learning import CLASSIFICATION, REGRESSION, split_indices
from ..utils.path_utils import item_id
from ..utils.seeding import derive_rng, derive_seed
from .serialization import (
    BIFURCATION_NAME,
    ZERO_ONE_NAME,
    PredictionRow,
    ScoreRow,
    bifurcation_to_csv,
    zero_one_to_csv,
)

logger = logging.getLogger(__name__)

# Stream keys under a run seed
DATA_STREAM = 0
SPLIT_STREAM = 1
CV_STREAM = 2
ZERO_ONE_STREAM = 3

MU_A = (1.0, 3.0)
MU_B_END = (2.0, 5.0)
LINE_FAR_END = (6.0, 8.0)

PROTOCOL_FEATURIZER_DEFAULTS: Dict[str, Dict[str, Dict[str, Any]]] = {
    "manifold": {"tents": {"d": 10, "pad": 0.05, "trim": 0.0}},
    "rossler": {"tents": {"d": 10, "delta": 0.4}},
}

DiagramSample = Tuple[Optional[PersistenceDiagram], ...]


@dataclass
class DiagramDataset:
    """Diagram samples (indexed by homology dimension) with one label each."""

    item_ids: List[str]
    samples: List[DiagramSample]
    labels: List[Any]
    task: str
    dims: Tuple[int, ...]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)

    def diagrams(self, dim: int, indices: Sequence[int]) -> List[PersistenceDiagram]:
        return [self.samples[k][dim] for k in indices]  # type: ignore[misc]


@dataclass
class RunResult:
    run: int
    scores: List[ScoreRow] = field(default_factory=list)
    predictions: List[PredictionRow] = field(default_factory=list)
    grids: Dict[Tuple[int, Any], CoefficientGrid] = field(default_factory=dict)
    featurizers: Dict[int, Featurizer] = field(default_factory=dict)


# Dataset builders


def normal_pair_dataset(
    mu_b: Sequence[float],
    n_per_class: int,
    n_points: int,
    sigma: float,
    seed: int,
    *keys: int,
) -> DiagramDataset:
    """Class A diagrams around (1, 3) and class B diagrams around ``mu_b``."""
    ids, samples, labels = [], [], []
    for class_index, (label, mu) in enumerate((("A", MU_A), ("B", tuple(mu_b)))):
        for k in range(n_per_class):
            rng = derive_rng(seed, *keys, class_index, k)
            ids.append(f"{label}{item_id(k)}")
            samples.append((gen_normal_diagram(mu, sigma, n_points, rng),))
            labels.append(label)
    return DiagramDataset(
        ids, samples, labels, CLASSIFICATION, (0,), {"mu_a": list(MU_A), "mu_b": list(mu_b)}
    )


def line_regression_dataset(
    n_diagrams: int, n_points: int, sigma: float, seed: int, *keys: int
) -> DiagramDataset:
    """Means uniform on t(1,3) + (1-t)(6,8); the target is the distance of the mean to (1,3)."""
    ids, samples, targets = [], [], []
    start, end = np.asarray(MU_A), np.asarray(LINE_FAR_END)
    for k in range(n_diagrams):
        rng = derive_rng(seed, *keys, k)
        t = rng.uniform(0.0, 1.0)
        mu = t * start + (1.0 - t) * end
        ids.append(item_id(k))
        samples.append((gen_normal_diagram(mu, sigma, n_points, rng),))
        targets.append(float(np.linalg.norm(mu - start)))
    return DiagramDataset(ids, samples, targets, REGRESSION, (0,))


def ball_regression_dataset(
    n_diagrams: int, n_points: int, sigma: float, seed: int, *keys: int
) -> DiagramDataset:
    """Means drawn from N((1,3), I); the target is the distance of the mean to (1,3)."""
    ids, samples, targets = [], [], []
    center = np.asarray(MU_A)
    for k in range(n_diagrams):
        rng = derive_rng(seed, *keys, k)
        mu = rng.normal(loc=center, scale=1.0)
        ids.append(item_id(k))
        samples.append((gen_normal_diagram(mu, sigma, n_points, rng),))
        targets.append(float(np.linalg.norm(mu - center)))
    return DiagramDataset(ids, samples, targets, REGRESSION, (0,))


def manifold_dataset(
    per_class: int, n_points: int, dims: Sequence[int], seed: int, *keys: int
) -> DiagramDataset:
    """Rips diagrams of ``per_class`` clouds from each manifold kind."""
    ids, samples, labels = [], [], []
    dims = tuple(sorted(dims))
    for class_index, kind in enumerate(MANIFOLD_KINDS):
        for k in range(per_class):
            cloud = gen_manifold(kind, n_points, derive_rng(seed, *keys, class_index, k))
            diagrams = rips_diagrams(cloud, dims)
            ids.append(f"{kind}_{item_id(k)}")
            samples.append(tuple(diagrams.get(dim) for dim in range(max(dims) + 1)))
            labels.append(kind)
        logger.info(f"Computed {per_class} {kind} diagrams")
    return DiagramDataset(ids, samples, labels, CLASSIFICATION, dims)


@dataclass
class RosslerSweep:
    """Simulated runs over an alpha grid with their zero-one scores and labels."""

    runs: List[RosslerRun]
    scores: List[float]

    @property
    def alphas(self) -> List[float]:
        return [run.alpha for run in self.runs]

    def zero_one_rows(self) -> List[Tuple[float, float, str]]:
        return [(run.alpha, score, run.label.value) for run, score in zip(self.runs, self.scores)]


def rossler_sweep(
    alphas: Sequence[float], seed: int, n_points: int, *keys: int
) -> RosslerSweep:
    """Simulate every alpha in one vectorized pass and label each run by the zero-one test."""
    seeds = [derive_seed(seed, *keys, DATA_STREAM, k) for k in range(len(alphas))]
    runs = simulate_rossler_ensemble(alphas, seeds, RosslerConfig(n_points=n_points))
    labeled, scores = [], []
    for k, run in enumerate(runs):
        score = zero_one_test(run.x_series, rng=derive_rng(seed, *keys, ZERO_ONE_STREAM, k))
        scores.append(score)
        labeled.append(run.with_label(label_from_score(score)))
    chaotic = sum(run.label == RegimeLabel.CHAOTIC for run in labeled)
    logger.info(f"Simulated {len(runs)} Rossler runs, {chaotic} labeled chaotic")
    return RosslerSweep(labeled, scores)


def rossler_dataset(sweep: RosslerSweep, max_points: int) -> DiagramDataset:
    ids, samples, labels = [], [], []
    for k, run in enumerate(sweep.runs):
        ids.append(item_id(k))
        samples.append((None, rossler_diagram(run, max_points=max_points)))
        labels.append(run.label.value)
    logger.info(f"Computed {len(samples)} Rossler H1 diagrams")
    return DiagramDataset(ids, samples, labels, CLASSIFICATION, (1,), {"alphas": sweep.alphas})


# Fitting and scoring


def featurizer_params(config: ExperimentConfig) -> Dict[str, Any]:
    """Protocol defaults overridden by the configured featurizer parameters."""
    defaults = PROTOCOL_FEATURIZER_DEFAULTS.get(config.experiment, {}).get(config.featurizer, {})
    return {**defaults, **config.featurizer_params}


def fit_and_score(
    config: ExperimentConfig,
    dataset: DiagramDataset,
    run: int,
    run_seed: int,
    metric_suffix: str = "",
    index_prefix: str = "",
    keep_grids: bool = False,
) -> RunResult:
    """Split, fit featurizers on the training part, fit ridge, score both splits.

    Raises:
        ExperimentError: Naming the stage (split, featurize, fit, score) that failed
    """
    result = RunResult(run)
    dims = [dim for dim in dataset.dims if dim in config.dims]
    if not dims:
        raise ExperimentError(
            "featurize", f"none of the dims {config.dims} is available (have {dataset.dims})"
        )
    stage = "split"
    try:
        train_idx, test_idx = split_indices(
            len(dataset), config.test_fraction, derive_rng(run_seed, SPLIT_STREAM)
        )
        stage = "featurize"
        params = featurizer_params(config)
        featurizers = {
            dim: fit_featurizer(config.featurizer, dataset.diagrams(dim, train_idx), params)
            for dim in dims
        }
        matrices = {
            split: featurize_dataset(
                [dataset.samples[k] for k in indices],
                featurizers,
                [dataset.item_ids[k] for k in indices],
            )
            for split, indices in (("train", train_idx), ("test", test_idx))
        }
        stage = "fit"
        train_labels = [dataset.labels[k] for k in train_idx]
        cv_seed = derive_seed(run_seed, CV_STREAM)
        if dataset.task == CLASSIFICATION:
            model = ridge_classifier_fit(
                matrices["train"], train_labels, config.lambda_grid, config.cv_folds, cv_seed
            )
        else:
            model = ridge_cv(
                matrices["train"],
                np.asarray(train_labels, dtype=float),
                config.lambda_grid,
                config.cv_folds,
                cv_seed,
            )
        stage = "score"
        for split, indices in (("train", train_idx), ("test", test_idx)):
            truth = [dataset.labels[k] for k in indices]
            predicted = model.predict(matrices[split].values)
            if dataset.task == CLASSIFICATION:
                metric, value = "accuracy", accuracy(truth, list(predicted))
            else:
                metric, value = "r2", r2_score(truth, predicted)
            result.scores.append(
                ScoreRow(config.experiment, run, split, metric + metric_suffix, value)
            )
            result.predictions.extend(
                PredictionRow(run, split, index_prefix + dataset.item_ids[k], t, p)
                for k, t, p in zip(indices, truth, predicted)
            )
        logger.info(f"Run {run}{metric_suffix}: lambda={model.lambda_chosen:g}")
        if keep_grids:
            result.grids = coefficient_grid(model, matrices["train"].column_index)
            result.featurizers = featurizers
    except ExperimentError:
        raise
    except Exception as e:
        raise ExperimentError(stage, f"run {run}: {e}", e) from e
    return result


# Protocols


class Protocol(ABC):
    """One experiment: optional shared preparation, then independent runs."""

    name: str = ""

    def prepare(self, config: ExperimentConfig) -> None:
        """Build data shared by all runs."""

    @abstractmethod
    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        pass

    def artifacts(self) -> Dict[str, str]:
        """Extra files (name to content) written next to the scores."""
        return {}

    @staticmethod
    def run_seed(config: ExperimentConfig, run: int) -> int:
        return derive_seed(config.seed, run)

    @staticmethod
    def _generate(stage: str, build: Any, *args: Any) -> DiagramDataset:
        try:
            return build(*args)  # type: ignore[no-any-return]
        except ExperimentError:
            raise
        except Exception as e:
            raise ExperimentError(stage, str(e), e) from e


class NormalClassifyProtocol(Protocol):
    """Two classes of normal diagrams whose means separate along a line, one fit per t."""

    name = "normal-classify"

    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        seed = self.run_seed(config, run)
        combined = RunResult(run)
        t_values = np.linspace(0.0, 1.0, config.t_steps)
        for t_index, t in enumerate(t_values):
            mu_b = (1.0 - t) * np.asarray(MU_A) + t * np.asarray(MU_B_END)
            dataset = self._generate(
                "generate",
                normal_pair_dataset,
                mu_b,
                config.n_diagrams,
                config.points_per_diagram,
                config.sigma,
                seed,
                DATA_STREAM,
                t_index,
            )
            # Each t gets its own split and CV stream
            result = fit_and_score(
                config,
                dataset,
                run,
                derive_seed(seed, t_index),
                metric_suffix=f"_t={t:g}",
                index_prefix=f"t={t:g}:",
                keep_grids=run == 0 and t_index == len(t_values) - 1,
            )
            combined.scores.extend(result.scores)
            combined.predictions.extend(result.predictions)
            if result.grids:
                combined.grids = result.grids
                combined.featurizers = result.featurizers
        return combined


class LineRegressionProtocol(Protocol):
    name = "normal-regress-line"

    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        seed = self.run_seed(config, run)
        dataset = self._generate(
            "generate",
            line_regression_dataset,
            config.n_diagrams,
            config.points_per_diagram,
            config.sigma,
            seed,
            DATA_STREAM,
        )
        return fit_and_score(config, dataset, run, seed, keep_grids=run == 0)


class BallRegressionProtocol(Protocol):
    name = "normal-regress-ball"

    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        seed = self.run_seed(config, run)
        dataset = self._generate(
            "generate",
            ball_regression_dataset,
            config.n_diagrams,
            config.points_per_diagram,
            config.sigma,
            seed,
            DATA_STREAM,
        )
        return fit_and_score(config, dataset, run, seed, keep_grids=run == 0)


class ManifoldProtocol(Protocol):
    """Six manifold classes, Rips H0 and H1, fresh point clouds in every run."""

    name = "manifold"

    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        seed = self.run_seed(config, run)
        dataset = self._generate(
            "persistence",
            manifold_dataset,
            config.diagrams_per_class,
            config.points_per_cloud,
            config.dims,
            seed,
            DATA_STREAM,
        )
        return fit_and_score(config, dataset, run, seed, keep_grids=run == 0)


class RosslerProtocol(Protocol):
    """Periodic versus chaotic Rossler runs over an alpha grid.

    The simulations, zero-one labels and diagrams depend on the root seed
    only and are shared by every run; runs differ in their splits.
    """

    name = "rossler"

    def __init__(self) -> None:
        self.sweep: Optional[RosslerSweep] = None
        self.dataset: Optional[DiagramDataset] = None

    def prepare(self, config: ExperimentConfig) -> None:
        alphas = np.linspace(config.alpha_min, config.alpha_max, config.alpha_steps)
        try:
            self.sweep = rossler_sweep(alphas, config.seed, config.rossler_points)
        except Exception as e:
            raise ExperimentError("simulate", str(e), e) from e
        self.dataset = self._generate(
            "persistence", rossler_dataset, self.sweep, config.max_cloud_points
        )

    def run(self, config: ExperimentConfig, run: int) -> RunResult:
        if self.dataset is None:
            raise ExperimentError("prepare", "Rossler data has not been prepared")
        return fit_and_score(
            config, self.dataset, run, self.run_seed(config, run), keep_grids=run == 0
        )

    def artifacts(self) -> Dict[str, str]:
        if self.sweep is None:
            return {}
        return {
            ZERO_ONE_NAME: zero_one_to_csv(self.sweep.zero_one_rows()),
            BIFURCATION_NAME: bifurcation_to_csv(bifurcation_points(self.sweep.runs)),
        }


PROTOCOLS = {
    protocol.name: protocol
    for protocol in (
        NormalClassifyProtocol,
        LineRegressionProtocol,
        BallRegressionProtocol,
        ManifoldProtocol,
        RosslerProtocol,
    )
}


def create_protocol(name: str) -> Protocol:
    try:
        return PROTOCOLS[name]()
    except KeyError:
        raise ExperimentError("configure", f"Unknown experiment {name!r}") from None
