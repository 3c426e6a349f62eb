"""Tests for experiment protocols, the experiment service and the dataset service."""

import json
import math
import os

import numpy as np
import pytest

from persistence_templates.core.persistence import rips_h1
from persistence_templates.exceptions import (
    DiagramFormatError,
    ExperimentError,
    LearningError,
)
from persistence_templates.models.experiment_config import ExperimentConfig
from persistence_templates.models.featurizer_config import ColumnKey, FeatureMatrix, TentGrid
from persistence_templates.models.point_cloud import PointCloud
from persistence_templates.services.dataset_service import DatasetService
from persistence_templates.services.experiment_service import (
    ExperimentService,
    coefficient_file_name,
    run_experiment,
    summarize_scores,
)
from persistence_templates.services.protocols import (
    LINE_FAR_END,
    MU_A,
    create_protocol,
    featurizer_params,
    fit_and_score,
    line_regression_dataset,
    normal_pair_dataset,
)
from persistence_templates.services.serialization import (
    ArtifactStore,
    ScoreRow,
    predictions_from_csv,
    scores_from_csv,
)

from .conftest import BaseFileSystemTest, small_experiment_dict


class TestProtocols:
    """Dataset builders and the fit-and-score loop."""

    @pytest.mark.unit
    def test_normal_pairs_are_seeded(self):
        first = normal_pair_dataset((2.0, 5.0), 3, 10, 1.0, 11, 0)
        second = normal_pair_dataset((2.0, 5.0), 3, 10, 1.0, 11, 0)
        assert first.labels == ["A"] * 3 + ["B"] * 3
        assert first.item_ids[3] == "B00000"
        assert all(a[0] == b[0] for a, b in zip(first.samples, second.samples))
        assert first.dims == (0,)

    @pytest.mark.unit
    def test_line_targets(self):
        dataset = line_regression_dataset(20, 10, 1.0, 3)
        length = math.dist(MU_A, LINE_FAR_END)
        assert all(0.0 <= target <= length for target in dataset.labels)
        assert len(set(dataset.labels)) == 20

    @pytest.mark.unit
    def test_protocol_featurizer_defaults(self):
        config = ExperimentConfig({"experiment": "rossler"})
        assert featurizer_params(config) == {"d": 10, "delta": 0.4}
        config = ExperimentConfig({"experiment": "rossler", "featurizer_params": {"d": 6}})
        assert featurizer_params(config) == {"d": 6, "delta": 0.4}
        config = ExperimentConfig({"experiment": "rossler", "featurizer": "polynomials"})
        assert featurizer_params(config) == {}
        config = ExperimentConfig({"experiment": "manifold"})
        assert featurizer_params(config) == {"d": 10, "pad": 0.05, "trim": 0.0}
        assert featurizer_params(ExperimentConfig({"experiment": "normal-regress-ball"})) == {}

    @pytest.mark.unit
    def test_fit_and_score(self, experiment_config):
        dataset = line_regression_dataset(30, 10, 1.0, 5)
        result = fit_and_score(experiment_config, dataset, 0, 99, keep_grids=True)
        assert [(row.split, row.metric) for row in result.scores] == [
            ("train", "r2"),
            ("test", "r2"),
        ]
        assert len(result.predictions) == 30
        assert sum(1 for row in result.predictions if row.split == "test") == 10
        assert set(result.grids) == {(0, "target")}
        assert isinstance(result.featurizers[0], TentGrid)

    @pytest.mark.unit
    def test_missing_dimension(self, experiment_config):
        dataset = line_regression_dataset(10, 10, 1.0, 5)
        config = experiment_config.replace(dims=[1])
        with pytest.raises(ExperimentError) as excinfo:
            fit_and_score(config, dataset, 0, 1)
        assert excinfo.value.stage == "featurize"

    @pytest.mark.unit
    def test_unknown_protocol(self):
        with pytest.raises(ExperimentError):
            create_protocol("lorenz")


class TestSummaries:
    @pytest.mark.unit
    def test_summarize_scores(self):
        rows = [
            ScoreRow("e", 0, "test", "r2", 1.0),
            ScoreRow("e", 1, "test", "r2", 3.0),
            ScoreRow("e", 0, "train", "r2", 0.5),
        ]
        summary = summarize_scores(rows)
        assert summary[0][:2] == ("test", "r2")
        assert summary[0][2] == pytest.approx(2.0)
        assert summary[0][3] == pytest.approx(math.sqrt(2.0))
        assert summary[1] == ("train", "r2", 0.5, 0.0, 1)

    @pytest.mark.unit
    def test_coefficient_file_name(self):
        assert coefficient_file_name(0, "target") == "coefficients_0_target.csv"
        assert coefficient_file_name(1, "a b/c") == "coefficients_1_a_b_c.csv"


class TestExperimentService(BaseFileSystemTest):
    """Experiments written to the in-memory file system."""

    def run_experiment(self, **overrides):
        output_dir = overrides.pop("output_dir", "out")
        config = ExperimentConfig(small_experiment_dict(output_dir, **overrides))
        return ExperimentService(config, self.fs_service).run()

    @pytest.mark.smoke
    @pytest.mark.integration
    def test_line_regression_outputs(self):
        report = self.run_experiment()
        names = sorted(os.path.basename(path) for path in report.files)
        assert names == [
            "coefficients_0_target.csv",
            "config.json",
            "featurizer.json",
            "predictions.csv",
            "scores.csv",
        ]
        scores = scores_from_csv(self.fs_service.read_file("out/scores.csv"))
        per_run = [row for row in scores if isinstance(row.run, int)]
        assert len(per_run) == 4
        assert {row.run for row in scores} == {0, 1, "mean", "std"}
        mean, _ = report.metric("train", "r2")
        assert -1.0 < mean <= 1.0
        echo = json.loads(self.fs_service.read_file("out/config.json"))
        assert echo["config"]["experiment"] == "normal-regress-line"

    @pytest.mark.integration
    def test_normal_classify_scores_every_t(self):
        report = self.run_experiment(experiment="normal-classify", n_diagrams=8)
        metrics = {(row.split, row.metric) for row in report.scores}
        assert metrics == {
            (split, f"accuracy_t={t:g}") for split in ("train", "test") for t in (0.0, 1.0)
        }
        predictions = predictions_from_csv(self.fs_service.read_file("out/predictions.csv"))
        assert any(row.index.startswith("t=1:") for row in predictions)
        # The binary grid favors the second class
        assert self.fs_service.is_file("out/coefficients_0_B.csv")

    @pytest.mark.integration
    def test_polynomial_featurizer(self):
        report = self.run_experiment(featurizer="polynomials", featurizer_params={"m": 3, "n": 3})
        featurizers = json.loads(self.fs_service.read_file("out/featurizer.json"))
        assert featurizers["h0"]["kind"] == "polynomials"
        assert len(report.scores) == 4

    @pytest.mark.integration
    def test_manifold_experiment(self):
        report = self.run_experiment(
            experiment="manifold", runs=1, diagrams_per_class=4, points_per_cloud=25
        )
        names = [os.path.basename(path) for path in report.files]
        assert any(name.startswith("coefficients_0_") for name in names)
        assert any(name.startswith("coefficients_1_") for name in names)
        assert {row.metric for row in report.scores} == {"accuracy"}
        assert len(report.scores) == 2

    @pytest.mark.integration
    def test_results_do_not_depend_on_jobs(self):
        self.run_experiment(jobs=1, output_dir="serial")
        self.run_experiment(jobs=2, output_dir="parallel")
        assert self.fs_service.read_file("serial/scores.csv") == self.fs_service.read_file(
            "parallel/scores.csv"
        )
        assert self.fs_service.read_file("serial/predictions.csv") == self.fs_service.read_file(
            "parallel/predictions.csv"
        )

    @pytest.mark.integration
    def test_single_run_rerun_is_identical(self):
        for output_dir in ("first", "second"):
            run_experiment(small_experiment_dict(output_dir, runs=1), self.fs_service)
        assert self.fs_service.read_file("first/scores.csv") == self.fs_service.read_file(
            "second/scores.csv"
        )

    @pytest.mark.unit
    def test_unwritable_output(self):
        self.fs_service.set_read_only("out")
        with pytest.raises(ExperimentError) as excinfo:
            self.run_experiment()
        assert excinfo.value.stage == "configure"

    @pytest.mark.integration
    def test_failed_report_removes_new_directory(self):
        self.fs_service.set_read_only("out/predictions.csv")
        with pytest.raises(ExperimentError) as excinfo:
            self.run_experiment()
        assert excinfo.value.stage == "report"
        assert not self.fs_service.exists("out")

    @pytest.mark.integration
    def test_failed_report_keeps_existing_files(self):
        self.fs_service.write_file("out/keep.txt", "x")
        self.fs_service.set_read_only("out/predictions.csv")
        with pytest.raises(ExperimentError):
            self.run_experiment()
        assert self.fs_service.is_file("out/keep.txt")
        assert not self.fs_service.is_file("out/scores.csv")

    @pytest.mark.unit
    def test_failed_run_names_stage(self):
        with pytest.raises(ExperimentError) as excinfo:
            self.run_experiment(dims=[1])
        assert excinfo.value.stage == "featurize"
        assert not self.fs_service.exists("out")


class TestDatasetService(BaseFileSystemTest):
    """Subcommand operations on the in-memory file system."""

    def setup_method(self) -> None:
        super().setup_method()
        self.service = DatasetService(self.fs_service)
        self.store = ArtifactStore(self.fs_service)

    @pytest.mark.unit
    def test_gen_normal(self):
        self.service.gen_normal("normal", (1.0, 3.0), 1.0, 10, 3, seed=2, label="A")
        manifest = self.service.read_manifest("normal")
        assert manifest["kind"] == "normal"
        assert [item["id"] for item in manifest["items"]] == ["00000", "00001", "00002"]
        ids, samples, labels = self.service.load_samples("normal")
        assert labels == ["A", "A", "A"]
        assert set(samples[0]) == {0}

    @pytest.mark.unit
    def test_missing_manifest(self):
        with pytest.raises(DiagramFormatError):
            self.service.read_manifest("nowhere")

    @pytest.mark.unit
    def test_compute_pd(self):
        self.store.write_point_cloud(
            "square.csv", PointCloud([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        )
        paths = self.service.compute_pd("square.csv", "out/square")
        assert paths == ["out/square_h0.csv", "out/square_h1.csv"]
        h1 = self.store.read_diagram("out/square_h1.csv")
        assert h1.points[0].birth == pytest.approx(1.0)
        assert h1.points[0].death == pytest.approx(math.sqrt(2.0))

    @pytest.mark.integration
    def test_manifold_pipeline(self):
        self.service.gen_manifold("data", ["annulus", "three_clusters"], 5, 30, seed=1)
        assert self.fs_service.is_file("data/annulus_00000/points.csv")
        assert self.fs_service.is_file("data/annulus_00000/pd_h1.csv")
        cloud = self.store.read_point_cloud("data/annulus_00000/points.csv")
        stored = self.store.read_diagram("data/annulus_00000/pd_h1.csv")
        assert stored == rips_h1(cloud)

        self.service.featurize("data", "feat", "tents", {"d": 3})
        matrix, featurizers, labels = self.store.read_features("feat")
        assert matrix.rows == 10
        assert sorted(featurizers) == [0, 1]
        assert labels[0] == "annulus"

        model = self.service.train("feat", "classification", "model/model.json", [0.1], folds=3)
        assert model.classes == ("annulus", "three_clusters")
        assert model.featurizer_ref == os.path.join("feat", "featurizer.json")

        scores = self.service.evaluate("model/model.json", "feat", "eval")
        assert scores[0].metric == "accuracy"
        assert 0.0 <= scores[0].value <= 1.0
        assert len(predictions_from_csv(self.fs_service.read_file("eval/predictions.csv"))) == 10

    @pytest.mark.integration
    def test_featurize_with_saved_featurizer(self):
        self.service.gen_normal("train", (1.0, 3.0), 1.0, 10, 4, seed=1, label="A")
        self.service.gen_normal("held", (1.0, 3.0), 1.0, 10, 2, seed=2, label="A")
        self.service.featurize("train", "feat_train", "tents", {"d": 3})
        self.service.featurize(
            "held", "feat_held", "tents", featurizer_path="feat_train/featurizer.json"
        )
        _, train_featurizers, _ = self.store.read_features("feat_train")
        matrix, held_featurizers, _ = self.store.read_features("feat_held")
        assert held_featurizers == train_featurizers
        assert matrix.rows == 2

    @pytest.mark.unit
    def test_regression_train_and_evaluate(self, rng):
        X = rng.normal(size=(12, 2))
        targets = X @ np.array([1.0, -2.0]) + 0.5
        matrix = FeatureMatrix(
            X, (ColumnKey(0, 0, 1), ColumnKey(0, 0, 2)), [f"{k:05d}" for k in range(12)]
        )
        self.store.write_features("feat", matrix, {0: TentGrid(1, 0.5, 0.1)}, labels=targets)
        model = self.service.train("feat", "regression", "m.json", [1e-3, 1.0], folds=3)
        assert model.lambda_chosen == 1e-3
        scores = self.service.evaluate("m.json", "feat", "eval")
        assert scores[0].metric == "r2"
        assert scores[0].value > 0.99

    @pytest.mark.unit
    def test_train_needs_labels(self, rng):
        matrix = FeatureMatrix(rng.normal(size=(4, 1)), (ColumnKey(0, 0, 1),))
        self.store.write_features("feat", matrix, {0: TentGrid(1, 0.5, 0.1)})
        with pytest.raises(LearningError):
            self.service.train("feat", "regression", "m.json")

    @pytest.mark.unit
    def test_non_numeric_regression_labels(self, rng):
        matrix = FeatureMatrix(rng.normal(size=(4, 1)), (ColumnKey(0, 0, 1),), list("abcd"))
        self.store.write_features("feat", matrix, {0: TentGrid(1, 0.5, 0.1)}, labels=list("wxyz"))
        with pytest.raises(LearningError):
            self.service.train("feat", "regression", "m.json", [1.0])
