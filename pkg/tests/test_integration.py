"""Integration tests for the persistence-templates command line."""

import json
import logging
import math
import os
from unittest.mock import patch

import pytest

from persistence_templates import __version__
from persistence_templates import config as env_config
from persistence_templates.cli import (
    EXIT_FAILURE,
    EXIT_INTERRUPTED,
    EXIT_INVALID,
    EXIT_OK,
    build_experiment_config,
    featurizer_params,
    main,
    parse_args,
)
from persistence_templates.exceptions import ExperimentError
from persistence_templates.services.serialization import diagram_from_csv, scores_from_csv

from .conftest import BaseFileSystemTest, small_experiment_dict

FS_PATCH = "persistence_templates.cli.RealFileSystemService"


class TestCLI(BaseFileSystemTest):
    """Test command-line interface functionality."""

    @pytest.mark.smoke
    @pytest.mark.integration
    def test_gen_normal(self, mock_fs):
        args = ["gen-normal", "--count", "3", "--points", "10", "--label", "A", "--out", "normal"]
        with patch(FS_PATCH, return_value=mock_fs):
            assert main(args) == EXIT_OK
        manifest = json.loads(mock_fs.read_file("normal/manifest.json"))
        assert [item["label"] for item in manifest["items"]] == ["A", "A", "A"]
        assert mock_fs.is_file("normal/00002/pd_h0.csv")

    @pytest.mark.integration
    def test_compute_pd_default_prefix(self, mock_fs):
        mock_fs.write_file("clouds/square.csv", "0,0\n1,0\n1,1\n0,1\n")
        with patch(FS_PATCH, return_value=mock_fs):
            assert main(["compute-pd", "--input", "clouds/square.csv"]) == EXIT_OK
        assert mock_fs.is_file("clouds/square_h0.csv")
        h1 = diagram_from_csv(mock_fs.read_file("clouds/square_h1.csv"))
        assert h1.points[0].death == pytest.approx(math.sqrt(2.0))

    @pytest.mark.integration
    def test_experiment(self, mock_fs):
        args = [
            "--seed",
            "3",
            "experiment",
            "normal-regress-line",
            "--runs",
            "2",
            "--n-diagrams",
            "30",
            "--points-per-diagram",
            "10",
            "--d",
            "4",
            "--lambdas",
            "0.01",
            "1",
            "--folds",
            "3",
            "--out",
            "exp",
            "--no-progress",
        ]
        with patch(FS_PATCH, return_value=mock_fs):
            assert main(args) == EXIT_OK
        echo = json.loads(mock_fs.read_file("exp/config.json"))
        assert echo["config"]["seed"] == 3
        assert echo["config"]["featurizer_params"] == {"d": 4}
        assert echo["version"] == __version__
        scores = scores_from_csv(mock_fs.read_file("exp/scores.csv"))
        assert {row.metric for row in scores} == {"r2"}

    @pytest.mark.e2e
    def test_manifold_pipeline_on_disk(self, tmp_path):
        data = str(tmp_path / "data")
        feat = str(tmp_path / "feat")
        model_dir = str(tmp_path / "model")
        evaluation = str(tmp_path / "eval")
        commands = [
            ["gen-manifold", "--kind", "annulus", "three_clusters", "--count", "4"]
            + ["--points", "30", "--out", data],
            ["featurize", "--dataset", data, "--d", "3", "--out", feat],
            ["train", "--features", feat, "--task", "classify", "--lambdas", "0.1"]
            + ["--folds", "2", "--out", model_dir],
            ["evaluate", "--model", os.path.join(model_dir, "model.json")]
            + ["--features", feat, "--out", evaluation],
        ]
        for command in commands:
            assert main(command) == EXIT_OK, command
        assert os.path.isfile(os.path.join(data, "annulus_00003", "pd_h1.csv"))
        with open(os.path.join(evaluation, "scores.csv"), encoding="utf-8") as f:
            scores = scores_from_csv(f.read())
        assert scores[0].metric == "accuracy"

    @pytest.mark.integration
    def test_config_file_with_overrides(self, tmp_path):
        out = str(tmp_path / "exp")
        config_path = tmp_path / "exp.json"
        config_path.write_text(json.dumps(small_experiment_dict(out, seed=11, runs=3)))
        parsed = parse_args(
            ["experiment", "normal-regress-ball", "--config", str(config_path), "--runs", "1"]
        )
        config = build_experiment_config(parsed)
        assert config.experiment == "normal-regress-ball"
        assert config.seed == 11
        assert config.runs == 1
        assert config.output_dir == out
        assert main(["experiment", "normal-regress-ball", "--config", str(config_path)]) == 0
        assert os.path.isfile(os.path.join(out, "scores.csv"))


class TestArgumentHandling:
    """Argument parsing and config merging."""

    @pytest.mark.unit
    def test_default_output_dir(self):
        config = build_experiment_config(parse_args(["experiment", "manifold"]))
        assert config.output_dir == os.path.join(env_config["DEFAULT_OUTPUT_DIR"], "manifold")
        assert config.show_progress is True

    @pytest.mark.unit
    def test_global_options_after_subcommand(self):
        parsed = parse_args(["experiment", "rossler", "--seed", "5", "--no-progress"])
        assert parsed.seed == 5
        assert parsed.no_progress is True
        assert build_experiment_config(parsed).show_progress is False

    @pytest.mark.unit
    def test_featurizer_flags(self):
        parsed = parse_args(
            ["featurize", "--dataset", "d", "--featurizer", "polynomials", "--m", "4", "--no-abs"]
        )
        assert featurizer_params(parsed) == {"m": 4, "abs_mode": False}
        assert featurizer_params(parse_args(["featurize", "--dataset", "d"])) == {}

    @pytest.mark.unit
    def test_switching_featurizer_drops_file_params(self, tmp_path):
        config_path = tmp_path / "exp.json"
        config_path.write_text(json.dumps(small_experiment_dict(str(tmp_path))))
        parsed = parse_args(
            ["experiment", "manifold", "--config", str(config_path), "--featurizer", "polynomials"]
        )
        config = build_experiment_config(parsed)
        assert config.featurizer == "polynomials"
        assert config.featurizer_params == {}

    @pytest.mark.unit
    def test_log_levels(self):
        root = logging.getLogger()
        previous = root.level
        try:
            parse_args(["--debug", "gen-normal"])
            assert root.level == logging.DEBUG
            parse_args(["gen-normal", "-v"])
            assert root.level == (logging.DEBUG if env_config["DEBUG"] else logging.INFO)
        finally:
            root.setLevel(previous)


class TestExitCodes:
    @pytest.mark.unit
    def test_version_and_help(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out
        assert main(["--help"]) == EXIT_OK

    @pytest.mark.unit
    @pytest.mark.parametrize(
        "args",
        [
            [],
            ["experiment", "lorenz"],
            ["experiment", "manifold", "--runs", "0"],
            ["gen-manifold", "--dims", "2"],
            ["gen-rossler", "--alpha-min", "0.5", "--alpha-max", "0.4"],
        ],
    )
    def test_invalid_input(self, args):
        assert main(args) == EXIT_INVALID

    @pytest.mark.unit
    def test_missing_input_file(self, mock_fs):
        with patch(FS_PATCH, return_value=mock_fs):
            assert main(["compute-pd", "--input", "absent.csv"]) == EXIT_INVALID

    @pytest.mark.unit
    def test_runtime_failures(self):
        with patch("persistence_templates.cli.run_command", side_effect=RuntimeError("boom")):
            assert main(["gen-normal"]) == EXIT_FAILURE
        failure = ExperimentError("fit", "singular")
        with patch("persistence_templates.cli.run_command", side_effect=failure):
            assert main(["experiment", "manifold"]) == EXIT_FAILURE

    @pytest.mark.unit
    def test_interrupt(self):
        with patch("persistence_templates.cli.run_command", side_effect=KeyboardInterrupt):
            assert main(["gen-normal"]) == EXIT_INTERRUPTED
