"""Dataset generation, diagram computation, featurization, training and evaluation on disk."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.datagen import MANIFOLD_KINDS, gen_manifold, gen_normal_diagram
from ..core.dynamics import bifurcation_points, rossler_diagram
from ..core.featurize import featurize_dataset, fit_featurizer
from ..core.learn import DEFAULT_FOLDS, accuracy, r2_score, ridge_classifier_fit, ridge_cv
from ..core.persistence import rips_diagrams
from ..exceptions import DiagramFormatError, LearningError, ScoringError
from ..models.diagram import PersistenceDiagram
from ..models.featurizer_config import Featurizer
from ..models.learning import CLASSIFICATION, REGRESSION, RidgeModel
from ..models.point_cloud import PointCloud
from ..ui.progress_display import ProgressDisplay
from ..utils.path_utils import (
    ITEM_DIAGRAM_PREFIX,
    MANIFEST_NAME,
    POINTS_NAME,
    SERIES_NAME,
    item_dir,
    item_id,
)
from ..utils.seeding import derive_rng
from .filesystem_service import FileSystemService, default_fs_service
from .protocols import rossler_sweep
from .serialization import (
    BIFURCATION_NAME,
    FEATURIZER_NAME,
    PREDICTIONS_NAME,
    SCORES_NAME,
    ZERO_ONE_NAME,
    ArtifactStore,
    PredictionRow,
    ScoreRow,
    bifurcation_to_csv,
    featurizers_from_json,
    predictions_to_csv,
    scores_to_csv,
    zero_one_to_csv,
)

logger = logging.getLogger(__name__)


def _manifold_item(
    args: Tuple[str, int, int, int, Tuple[int, ...]]
) -> Tuple[PointCloud, Dict[int, PersistenceDiagram]]:
    kind, n_points, seed, index, dims = args
    class_index = MANIFOLD_KINDS.index(kind)
    cloud = gen_manifold(kind, n_points, derive_rng(seed, class_index, index))
    return cloud, rips_diagrams(cloud, dims)


class DatasetService:
    """File-level operations behind the command-line subcommands."""

    def __init__(
        self,
        fs_service: Optional[FileSystemService] = None,
        progress: Optional[ProgressDisplay] = None,
        jobs: int = 1,
    ) -> None:
        self.fs_service = default_fs_service(fs_service)
        self.store = ArtifactStore(self.fs_service)
        self.progress = progress or ProgressDisplay(enabled=False)
        self.jobs = jobs

    # Manifests

    def write_manifest(
        self,
        dataset_dir: str,
        kind: str,
        parameters: Dict[str, Any],
        seed: int,
        items: List[Dict[str, Any]],
    ) -> str:
        manifest = {"kind": kind, "parameters": parameters, "seed": seed, "items": items}
        return self.store.write_json(os.path.join(dataset_dir, MANIFEST_NAME), manifest)

    def read_manifest(self, dataset_dir: str) -> Dict[str, Any]:
        path = os.path.join(dataset_dir, MANIFEST_NAME)
        if not self.fs_service.is_file(path):
            raise DiagramFormatError(f"No {MANIFEST_NAME} in {dataset_dir}")
        manifest = self.store.read_json(path)
        if not isinstance(manifest, dict) or not isinstance(manifest.get("items"), list):
            raise DiagramFormatError(f"{path}: manifest must hold an 'items' list")
        return manifest

    # Generation

    def gen_normal(
        self,
        dataset_dir: str,
        mu: Sequence[float],
        sigma: float,
        n_points: int,
        count: int,
        seed: int,
        label: Optional[str] = None,
    ) -> str:
        """Write ``count`` normal diagrams as ``{item}/pd_h0.csv`` plus a manifest."""
        items = []
        self.progress.start("gen-normal", count)
        for k in range(count):
            identifier = item_id(k)
            diagram = gen_normal_diagram(mu, sigma, n_points, derive_rng(seed, k))
            self.store.write_diagram(
                os.path.join(item_dir(dataset_dir, identifier), ITEM_DIAGRAM_PREFIX), diagram
            )
            item: Dict[str, Any] = {"id": identifier, "points": len(diagram)}
            if label is not None:
                item["label"] = label
            items.append(item)
            self.progress.advance()
        self.progress.finish()
        parameters = {"mu": list(mu), "sigma": sigma, "points": n_points, "count": count}
        logger.info(f"Generated {count} normal diagrams in {dataset_dir}")
        return self.write_manifest(dataset_dir, "normal", parameters, seed, items)

    def gen_manifold(
        self,
        dataset_dir: str,
        kinds: Sequence[str],
        count: int,
        n_points: int,
        seed: int,
        dims: Sequence[int] = (0, 1),
    ) -> str:
        """Write point clouds and their Rips diagrams, ``count`` per manifold kind."""
        jobs = [
            (kind, n_points, seed, k, tuple(sorted(dims))) for kind in kinds for k in range(count)
        ]
        self.progress.start("gen-manifold", len(jobs))
        items = []
        for (kind, _, _, k, _), (cloud, diagrams) in zip(jobs, self._map(_manifold_item, jobs)):
            identifier = f"{kind}_{item_id(k)}"
            directory = item_dir(dataset_dir, identifier)
            self.store.write_point_cloud(os.path.join(directory, POINTS_NAME), cloud)
            for diagram in diagrams.values():
                self.store.write_diagram(os.path.join(directory, ITEM_DIAGRAM_PREFIX), diagram)
            items.append({"id": identifier, "label": kind})
            self.progress.advance()
        self.progress.finish()
        parameters = {"kinds": list(kinds), "count": count, "points": n_points, "dims": list(dims)}
        logger.info(f"Generated {len(items)} manifold samples in {dataset_dir}")
        return self.write_manifest(dataset_dir, "manifold", parameters, seed, items)

    def gen_rossler(
        self,
        dataset_dir: str,
        alphas: Sequence[float],
        seed: int,
        n_points: int,
        max_cloud_points: int,
    ) -> str:
        """Simulate, label and diagram Rossler runs; also write zero-one and bifurcation CSVs."""
        sweep = rossler_sweep(alphas, seed, n_points)
        self.progress.start("gen-rossler", len(sweep.runs))
        items = []
        for k, (run, score) in enumerate(zip(sweep.runs, sweep.scores)):
            identifier = item_id(k)
            directory = item_dir(dataset_dir, identifier)
            self.store.write_series(os.path.join(directory, SERIES_NAME), run.x_series)
            diagram = rossler_diagram(run, max_points=max_cloud_points)
            self.store.write_diagram(os.path.join(directory, ITEM_DIAGRAM_PREFIX), diagram)
            items.append(
                {"id": identifier, "label": run.label.value, "alpha": run.alpha, "score": score}
            )
            self.progress.advance()
        self.progress.finish()
        self.store.write_text(
            os.path.join(dataset_dir, ZERO_ONE_NAME), zero_one_to_csv(sweep.zero_one_rows())
        )
        self.store.write_text(
            os.path.join(dataset_dir, BIFURCATION_NAME),
            bifurcation_to_csv(bifurcation_points(sweep.runs)),
        )
        parameters = {
            "alpha_min": float(min(alphas)),
            "alpha_max": float(max(alphas)),
            "alpha_steps": len(alphas),
            "n_points": n_points,
            "max_cloud_points": max_cloud_points,
        }
        return self.write_manifest(dataset_dir, "rossler", parameters, seed, items)

    def _map(self, function: Any, jobs: List[Any]) -> Iterable[Any]:
        if self.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=min(self.jobs, len(jobs))) as executor:
                return list(executor.map(function, jobs))
        return map(function, jobs)

    # Diagrams

    def compute_pd(
        self,
        input_path: str,
        out_prefix: str,
        dims: Sequence[int] = (0, 1),
        max_scale: Optional[float] = None,
    ) -> List[str]:
        """Rips diagrams of a point-cloud CSV, written as ``{out_prefix}_h{dim}.csv``."""
        cloud = self.store.read_point_cloud(input_path)
        diagrams = rips_diagrams(cloud, dims, max_scale)
        return [self.store.write_diagram(out_prefix, diagrams[dim]) for dim in sorted(diagrams)]

    # Features

    def load_samples(
        self, dataset_dir: str
    ) -> Tuple[List[str], List[Dict[int, PersistenceDiagram]], List[Optional[Any]]]:
        """Item ids, diagrams by dimension and labels of a generated dataset."""
        manifest = self.read_manifest(dataset_dir)
        ids, samples, labels = [], [], []
        for item in manifest["items"]:
            identifier = str(item["id"])
            diagrams = self.store.read_diagrams(
                item_dir(dataset_dir, identifier), ITEM_DIAGRAM_PREFIX
            )
            if not diagrams:
                raise DiagramFormatError(f"Item {identifier} of {dataset_dir} has no diagrams")
            ids.append(identifier)
            samples.append(diagrams)
            labels.append(item.get("label"))
        return ids, samples, labels

    def featurize(
        self,
        dataset_dir: str,
        out_dir: str,
        kind: str,
        params: Optional[Dict[str, Any]] = None,
        dims: Optional[Sequence[int]] = None,
        featurizer_path: Optional[str] = None,
    ) -> List[str]:
        """Featurize every item of a dataset.

        Featurizers are fitted on the dataset itself unless ``featurizer_path``
        names an existing ``featurizer.json``, as needed for held-out data.
        """
        ids, samples, labels = self.load_samples(dataset_dir)
        if not samples:
            raise DiagramFormatError(f"Dataset {dataset_dir} has no items")
        available = sorted(set.intersection(*(set(sample) for sample in samples)))
        use_dims = sorted(dims) if dims is not None else available
        max_dim = max(max(sample) for sample in samples)
        rows = [tuple(sample.get(dim) for dim in range(max_dim + 1)) for sample in samples]

        featurizers: Dict[int, Featurizer]
        if featurizer_path is not None:
            featurizers = featurizers_from_json(self.store.read_text(featurizer_path))
            featurizers = {dim: featurizers[dim] for dim in use_dims if dim in featurizers}
        else:
            featurizers = {
                dim: fit_featurizer(kind, [s[dim] for s in samples if dim in s], params)
                for dim in use_dims
            }
        matrix = featurize_dataset(rows, featurizers, ids)
        has_labels = all(label is not None for label in labels)
        return self.store.write_features(
            out_dir, matrix, featurizers, labels if has_labels else None
        )

    # Models

    def train(
        self,
        features_dir: str,
        task: str,
        out_path: str,
        lambda_grid: Optional[Sequence[float]] = None,
        folds: int = DEFAULT_FOLDS,
        seed: int = 0,
    ) -> RidgeModel:
        """Fit a ridge model on a featurized dataset and save it as JSON."""
        matrix, _, labels = self.store.read_features(features_dir)
        if labels is None:
            raise LearningError(f"{features_dir} has no labels")
        if task == CLASSIFICATION:
            model = ridge_classifier_fit(matrix, labels, lambda_grid, folds, seed)
        elif task == REGRESSION:
            model = ridge_cv(matrix, self._targets(labels), lambda_grid, folds, seed)
        else:
            raise LearningError(f"Unknown task {task!r}")
        model = RidgeModel.from_dict(
            {**model.to_dict(), "featurizer": os.path.join(features_dir, FEATURIZER_NAME)}
        )
        self.store.write_model(out_path, model)
        logger.info(f"Trained {task} model with lambda={model.lambda_chosen:g}")
        return model

    @staticmethod
    def _targets(labels: Sequence[Any]) -> np.ndarray:
        try:
            return np.asarray([float(label) for label in labels])
        except (TypeError, ValueError) as e:
            raise LearningError(f"Regression labels must be numeric: {e}") from e

    def evaluate(self, model_path: str, features_dir: str, out_dir: str) -> List[ScoreRow]:
        """Predict a featurized dataset; score it when labels are present."""
        model = self.store.read_model(model_path)
        matrix, _, labels = self.store.read_features(features_dir)
        predicted = model.predict(matrix.values)
        ids = matrix.row_ids or tuple(str(k) for k in range(matrix.rows))
        truth: List[Any] = list(labels) if labels is not None else [""] * matrix.rows
        scores: List[ScoreRow] = []
        if labels is not None:
            if model.task == CLASSIFICATION:
                value = accuracy(truth, [str(p) for p in predicted])
                scores.append(ScoreRow("evaluate", 0, "eval", "accuracy", value))
            else:
                try:
                    value = r2_score(self._targets(truth), predicted)
                    scores.append(ScoreRow("evaluate", 0, "eval", "r2", value))
                except ScoringError as e:
                    logger.warning(f"R^2 not reported: {e}")
        rows = (PredictionRow(0, "eval", i, t, p) for i, t, p in zip(ids, truth, predicted))
        self.store.write_text(os.path.join(out_dir, PREDICTIONS_NAME), predictions_to_csv(rows))
        self.store.write_text(os.path.join(out_dir, SCORES_NAME), scores_to_csv(scores))
        return scores

