"""Command-line interface for persistence-templates."""

import argparse
import logging
import os
import sys
from argparse import ArgumentParser, Namespace
from typing import Any, Dict, List, NoReturn, Optional

import numpy as np

from . import __version__, config
from .core.datagen import MANIFOLD_KINDS
from .core.dynamics import MAX_CLOUD_POINTS
from .exceptions import ConfigValidationError, DiagramFormatError, TemplateFeaturesError
from .models.experiment_config import EXPERIMENTS, FEATURIZERS, ExperimentConfig
from .models.featurizer_config import PAD_MODES
from .models.learning import CLASSIFICATION, REGRESSION
from .services.dataset_service import DatasetService
from .services.experiment_service import ExperimentService
from .services.filesystem_service import RealFileSystemService
from .services.serialization import MODEL_NAME
from .ui.progress_display import ProgressDisplay

# Configure logging
logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", level=logging.WARNING
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2
EXIT_INTERRUPTED = 130

TASKS = {"classify": CLASSIFICATION, "regress": REGRESSION}


class UsageError(Exception):
    """Raised instead of exiting when arguments cannot be parsed."""

    pass


class _Parser(ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _dims(text: str) -> List[int]:
    try:
        dims = sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 0,1: {text!r}") from None
    if not dims or any(dim not in (0, 1) for dim in dims):
        raise argparse.ArgumentTypeError(f"dims must be a nonempty subset of 0,1: {text!r}")
    return dims


def _add_global_options(parser: ArgumentParser, nested: bool) -> None:
    # Nested copies only override values given after the subcommand
    default = argparse.SUPPRESS if nested else None
    parser.add_argument("--seed", type=int, default=default, help="Root random seed")
    parser.add_argument("--jobs", type=int, default=default, help="Parallel worker processes")
    parser.add_argument(
        "--out", default=default, help="Output directory (output prefix for compute-pd)"
    )
    parser.add_argument("--config", default=default, help="JSON experiment configuration file")
    parser.add_argument(
        "--no-progress",
        action="store_true",
        default=argparse.SUPPRESS if nested else False,
        help="Disable progress bar",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        default=argparse.SUPPRESS if nested else False,
        help="Enable verbose output",
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        default=argparse.SUPPRESS if nested else False,
        help="Enable debug logging",
    )


def _add_featurizer_options(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("featurizer parameters (omitted ones use the auto rules)")
    group.add_argument("--d", type=int, help="Tent grid size")
    group.add_argument("--pad", type=float, help="Tent bounding-box padding")
    group.add_argument("--trim", type=float, help="Tent box quantile trimmed from each end")
    group.add_argument("--delta", type=float, help="Tent radius; anchors the grid at the origin")
    group.add_argument("--epsilon", type=float, help="Tent lifetime offset")
    group.add_argument("--m", type=int, help="Polynomial birth degree")
    group.add_argument("--n", type=int, help="Polynomial lifetime degree")
    group.add_argument("--pad-mode", choices=PAD_MODES, help="Polynomial support padding")
    group.add_argument(
        "--no-abs",
        dest="abs_mode",
        action="store_false",
        default=None,
        help="Sum signed polynomial values",
    )


def create_argument_parser() -> ArgumentParser:
    """Create the argument parser for the command-line interface.

    Returns:
        ArgumentParser: The configured argument parser
    """
    parser = _Parser(
        prog="persistence-templates",
        description="Featurize persistence diagrams with template functions and learn from them.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    _add_global_options(parser, nested=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    def command(name: str, help_text: str) -> ArgumentParser:
        sub = commands.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )
        _add_global_options(sub, nested=True)
        return sub

    gen_normal = command("gen-normal", "Generate diagrams of normally distributed points")
    gen_normal.add_argument("--mu", nargs=2, type=float, default=[1.0, 3.0], metavar=("X", "Y"))
    gen_normal.add_argument("--sigma", type=float, default=1.0)
    gen_normal.add_argument("--points", type=int, default=20, help="Draws per diagram")
    gen_normal.add_argument("--count", type=int, default=500, help="Number of diagrams")
    gen_normal.add_argument("--label", help="Label recorded for every diagram")

    gen_manifold = command("gen-manifold", "Generate manifold point clouds and their diagrams")
    gen_manifold.add_argument(
        "--kind", nargs="+", choices=list(MANIFOLD_KINDS), default=list(MANIFOLD_KINDS)
    )
    gen_manifold.add_argument("--count", type=int, default=50, help="Clouds per kind")
    gen_manifold.add_argument("--points", type=int, default=200, help="Points per cloud")
    gen_manifold.add_argument("--dims", type=_dims, default=[0, 1], help="Homology dimensions")

    gen_rossler = command("gen-rossler", "Simulate and label Rossler series over an alpha grid")
    gen_rossler.add_argument("--alpha-min", type=float, default=0.37)
    gen_rossler.add_argument("--alpha-max", type=float, default=0.43)
    gen_rossler.add_argument("--alpha-steps", type=int, default=121)
    gen_rossler.add_argument("--n-points", type=int, default=20000, help="Simulated samples")
    gen_rossler.add_argument("--max-cloud-points", type=int, default=MAX_CLOUD_POINTS)

    compute_pd = command("compute-pd", "Compute Rips diagrams of a point-cloud CSV")
    compute_pd.add_argument("--input", required=True, help="Point-cloud CSV")
    compute_pd.add_argument("--dims", type=_dims, default=[0, 1], help="Homology dimensions")
    compute_pd.add_argument("--max-scale", type=float, help="Largest filtration value")

    featurize = command("featurize", "Featurize a generated dataset")
    featurize.add_argument("--dataset", required=True, help="Dataset directory")
    featurize.add_argument("--featurizer", choices=FEATURIZERS, default="tents")
    featurize.add_argument("--dims", type=_dims, help="Homology dimensions (default: all)")
    featurize.add_argument("--featurizer-file", help="Reuse an existing featurizer.json")
    _add_featurizer_options(featurize)

    train = command("train", "Fit a ridge model on featurized data")
    train.add_argument("--features", required=True, help="Directory written by featurize")
    train.add_argument("--task", choices=sorted(TASKS), required=True)
    train.add_argument("--lambdas", nargs="+", type=float, help="Regularization grid")
    train.add_argument("--folds", type=int, default=config["DEFAULT_CV_FOLDS"])

    evaluate = command("evaluate", "Apply a trained model to featurized data")
    evaluate.add_argument("--model", required=True, help="model.json written by train")
    evaluate.add_argument("--features", required=True, help="Directory written by featurize")

    experiment = command("experiment", "Run an experiment protocol end to end")
    experiment.add_argument("name", choices=EXPERIMENTS)
    experiment.add_argument("--runs", type=int)
    experiment.add_argument("--featurizer", choices=FEATURIZERS)
    experiment.add_argument("--diagrams-per-class", type=int)
    experiment.add_argument("--n-diagrams", type=int)
    experiment.add_argument("--points-per-cloud", type=int)
    experiment.add_argument("--points-per-diagram", type=int)
    experiment.add_argument("--sigma", type=float)
    experiment.add_argument("--t-steps", type=int)
    experiment.add_argument("--alpha-steps", type=int)
    experiment.add_argument("--alpha-min", type=float)
    experiment.add_argument("--alpha-max", type=float)
    experiment.add_argument("--rossler-points", type=int)
    experiment.add_argument("--max-cloud-points", type=int)
    experiment.add_argument("--test-fraction", type=float)
    experiment.add_argument("--folds", dest="cv_folds", type=int)
    experiment.add_argument("--lambdas", dest="lambda_grid", nargs="+", type=float)
    experiment.add_argument("--dims", type=_dims)
    _add_featurizer_options(experiment)

    return parser


def parse_args(args: Optional[List[str]] = None) -> Namespace:
    """Parse command line arguments and set the log level.

    Raises:
        UsageError: If the arguments are invalid
    """
    parsed_args = create_argument_parser().parse_args(args)

    if parsed_args.debug or config["DEBUG"]:
        logging.getLogger().setLevel(logging.DEBUG)
    elif parsed_args.verbose:
        logging.getLogger().setLevel(logging.INFO)
    else:
        logging.getLogger().setLevel(config["LOG_LEVEL"])

    return parsed_args


def featurizer_params(parsed_args: Namespace) -> Dict[str, Any]:
    """Featurizer parameters given on the command line."""
    keys = ("d", "pad", "trim", "delta", "epsilon", "m", "n", "pad_mode", "abs_mode")
    return {key: getattr(parsed_args, key) for key in keys if getattr(parsed_args, key) is not None}


def build_experiment_config(parsed_args: Namespace) -> ExperimentConfig:
    """Merge the config file (if any) with command-line overrides.

    Raises:
        ConfigValidationError: If the merged configuration is invalid
    """
    base: Dict[str, Any] = {}
    if parsed_args.config:
        base = ExperimentConfig.from_file(parsed_args.config).to_dict()
    file_featurizer = base.get("featurizer")
    base["experiment"] = parsed_args.name

    overrides = {
        "seed": parsed_args.seed,
        "jobs": parsed_args.jobs,
        "output_dir": parsed_args.out,
        "runs": parsed_args.runs,
        "featurizer": parsed_args.featurizer,
        "diagrams_per_class": parsed_args.diagrams_per_class,
        "n_diagrams": parsed_args.n_diagrams,
        "points_per_cloud": parsed_args.points_per_cloud,
        "points_per_diagram": parsed_args.points_per_diagram,
        "sigma": parsed_args.sigma,
        "t_steps": parsed_args.t_steps,
        "alpha_steps": parsed_args.alpha_steps,
        "alpha_min": parsed_args.alpha_min,
        "alpha_max": parsed_args.alpha_max,
        "rossler_points": parsed_args.rossler_points,
        "max_cloud_points": parsed_args.max_cloud_points,
        "test_fraction": parsed_args.test_fraction,
        "cv_folds": parsed_args.cv_folds,
        "lambda_grid": parsed_args.lambda_grid,
        "dims": parsed_args.dims,
    }
    base.update({key: value for key, value in overrides.items() if value is not None})
    if file_featurizer is not None and base["featurizer"] != file_featurizer:
        # Parameters of a different featurizer do not carry over
        base["featurizer_params"] = {}
    cli_params = featurizer_params(parsed_args)
    if cli_params:
        base["featurizer_params"] = {**base.get("featurizer_params", {}), **cli_params}
    if parsed_args.no_progress:
        base["show_progress"] = False
    if parsed_args.out is None and not parsed_args.config:
        base["output_dir"] = os.path.join(config["DEFAULT_OUTPUT_DIR"], parsed_args.name)
    return ExperimentConfig(base)


def run_command(parsed_args: Namespace) -> int:
    """Dispatch one parsed command.

    Returns:
        int: Exit code
    """
    progress = ProgressDisplay(enabled=not parsed_args.no_progress)
    seed = parsed_args.seed if parsed_args.seed is not None else config["DEFAULT_SEED"]
    jobs = parsed_args.jobs if parsed_args.jobs is not None else config["DEFAULT_JOBS"]
    out = parsed_args.out or config["DEFAULT_OUTPUT_DIR"]
    datasets = DatasetService(RealFileSystemService(), progress, jobs)
    command = parsed_args.command

    if command == "experiment":
        experiment_config = build_experiment_config(parsed_args)
        logger.debug(f"Experiment configuration: {experiment_config.to_dict()}")
        report = ExperimentService(experiment_config, RealFileSystemService(), progress).run()
        for split, metric, mean, std, count in report.summary:
            logger.info(f"{split} {metric}: {mean:.4f} ± {std:.4f} over {count} runs")
        progress.success(f"Wrote {len(report.files)} files to {report.output_dir}")
        return EXIT_OK

    if command == "gen-normal":
        path = datasets.gen_normal(
            out,
            parsed_args.mu,
            parsed_args.sigma,
            parsed_args.points,
            parsed_args.count,
            seed,
            parsed_args.label,
        )
    elif command == "gen-manifold":
        path = datasets.gen_manifold(
            out, parsed_args.kind, parsed_args.count, parsed_args.points, seed, parsed_args.dims
        )
    elif command == "gen-rossler":
        if parsed_args.alpha_steps < 1 or parsed_args.alpha_max < parsed_args.alpha_min:
            raise UsageError("gen-rossler needs alpha-steps >= 1 and alpha-min <= alpha-max")
        alphas = np.linspace(parsed_args.alpha_min, parsed_args.alpha_max, parsed_args.alpha_steps)
        path = datasets.gen_rossler(
            out, alphas, seed, parsed_args.n_points, parsed_args.max_cloud_points
        )
    elif command == "compute-pd":
        prefix = parsed_args.out or os.path.splitext(parsed_args.input)[0]
        paths = datasets.compute_pd(
            parsed_args.input, prefix, parsed_args.dims, parsed_args.max_scale
        )
        path = ", ".join(paths)
    elif command == "featurize":
        paths = datasets.featurize(
            parsed_args.dataset,
            out,
            parsed_args.featurizer,
            featurizer_params(parsed_args),
            parsed_args.dims,
            parsed_args.featurizer_file,
        )
        path = ", ".join(paths)
    elif command == "train":
        path = os.path.join(out, MODEL_NAME)
        datasets.train(
            parsed_args.features,
            TASKS[parsed_args.task],
            path,
            parsed_args.lambdas,
            parsed_args.folds,
            seed,
        )
    elif command == "evaluate":
        scores = datasets.evaluate(parsed_args.model, parsed_args.features, out)
        for row in scores:
            logger.info(f"{row.metric}: {row.value:.4f}")
        path = out
    else:  # pragma: no cover
        raise UsageError(f"Unknown command {command}")

    progress.success(f"{command}: wrote {path}")
    return EXIT_OK


def main(args: Optional[List[str]] = None) -> int:
    """Main entry point for persistence-templates.

    Args:
        args: Command line arguments. Defaults to None.

    Returns:
        int: 0 on success, 1 for invalid input, 2 for runtime failures, 130 when interrupted
    """
    try:
        if args is None:
            args = sys.argv[1:]
        try:
            parsed_args = parse_args(args)
        except SystemExit as e:
            # --help and --version
            return int(e.code or 0)

        logger.info(f"Starting persistence-templates v{__version__}")
        logger.debug(f"Arguments: {parsed_args}")
        return run_command(parsed_args)

    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        return EXIT_INTERRUPTED
    except (UsageError, ConfigValidationError, DiagramFormatError, FileNotFoundError) as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except TemplateFeaturesError as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        logger.exception(f"Error: {str(e)}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
