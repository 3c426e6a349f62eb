"""Experiment configuration."""

import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .. import config as env_config
from ..exceptions import ConfigValidationError
from .featurizer_config import PAD_MODES

EXPERIMENTS = (
    "normal-classify",
    "normal-regress-line",
    "normal-regress-ball",
    "manifold",
    "rossler",
)
FEATURIZERS = ("tents", "polynomials")

# Default experiment configuration values
DEFAULT_RUNS = 10
DEFAULT_FEATURIZER = "tents"
DEFAULT_LAMBDA_GRID = [10.0**k for k in range(-3, 4)]
DEFAULT_DIAGRAMS_PER_CLASS = 50
DEFAULT_POINTS_PER_CLOUD = 200
DEFAULT_N_DIAGRAMS = 500
DEFAULT_POINTS_PER_DIAGRAM = 20
DEFAULT_SIGMA = 1.0
DEFAULT_T_STEPS = 11
DEFAULT_ALPHA_STEPS = 121
DEFAULT_ALPHA_MIN = 0.37
DEFAULT_ALPHA_MAX = 0.43
DEFAULT_ROSSLER_POINTS = 20000
DEFAULT_MAX_CLOUD_POINTS = 400

FEATURIZER_PARAM_KEYS = {
    "tents": {"d", "pad", "trim", "delta", "epsilon"},
    "polynomials": {"m", "n", "pad_mode", "abs_mode"},
}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


@dataclass
class ExperimentConfig:
    """Configuration for one experiment protocol.

    Built from a plain dictionary; missing keys take their defaults and
    unknown keys are rejected. Construction validates every field and raises
    ``ConfigValidationError`` listing all problems at once.
    """

    experiment: str = "manifold"
    featurizer: str = DEFAULT_FEATURIZER
    featurizer_params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    runs: int = DEFAULT_RUNS
    jobs: int = 1
    test_fraction: float = 0.33
    lambda_grid: List[float] = field(default_factory=lambda: list(DEFAULT_LAMBDA_GRID))
    cv_folds: int = 5
    output_dir: str = "results"
    dims: List[int] = field(default_factory=lambda: [0, 1])
    diagrams_per_class: int = DEFAULT_DIAGRAMS_PER_CLASS
    points_per_cloud: int = DEFAULT_POINTS_PER_CLOUD
    n_diagrams: int = DEFAULT_N_DIAGRAMS
    points_per_diagram: int = DEFAULT_POINTS_PER_DIAGRAM
    sigma: float = DEFAULT_SIGMA
    t_steps: int = DEFAULT_T_STEPS
    alpha_steps: int = DEFAULT_ALPHA_STEPS
    alpha_min: float = DEFAULT_ALPHA_MIN
    alpha_max: float = DEFAULT_ALPHA_MAX
    rossler_points: int = DEFAULT_ROSSLER_POINTS
    max_cloud_points: int = DEFAULT_MAX_CLOUD_POINTS
    show_progress: bool = True

    def __init__(self, config_dict: Optional[Dict[str, Any]] = None) -> None:
        """Initialize the configuration.

        Args:
            config_dict: Optional dictionary with configuration values

        Raises:
            ConfigValidationError: If a key is unknown or a value is out of range
        """
        if config_dict is None:
            config_dict = {}

        unknown = sorted(set(config_dict) - set(self.__dataclass_fields__))
        if unknown:
            raise ConfigValidationError([f"unknown key '{key}'" for key in unknown])

        self.experiment = config_dict.get("experiment", "manifold")
        self.featurizer = config_dict.get("featurizer", DEFAULT_FEATURIZER)
        self.featurizer_params = dict(config_dict.get("featurizer_params") or {})
        self.seed = config_dict.get("seed", env_config["DEFAULT_SEED"])
        self.runs = config_dict.get("runs", DEFAULT_RUNS)
        self.jobs = config_dict.get("jobs", env_config["DEFAULT_JOBS"])
        self.test_fraction = config_dict.get("test_fraction", env_config["DEFAULT_TEST_FRACTION"])
        self.lambda_grid = list(config_dict.get("lambda_grid", DEFAULT_LAMBDA_GRID))
        self.cv_folds = config_dict.get("cv_folds", env_config["DEFAULT_CV_FOLDS"])
        self.output_dir = config_dict.get("output_dir", env_config["DEFAULT_OUTPUT_DIR"])
        self.dims = list(config_dict.get("dims", [0, 1]))
        self.diagrams_per_class = config_dict.get("diagrams_per_class", DEFAULT_DIAGRAMS_PER_CLASS)
        self.points_per_cloud = config_dict.get("points_per_cloud", DEFAULT_POINTS_PER_CLOUD)
        self.n_diagrams = config_dict.get("n_diagrams", DEFAULT_N_DIAGRAMS)
        self.points_per_diagram = config_dict.get("points_per_diagram", DEFAULT_POINTS_PER_DIAGRAM)
        self.sigma = config_dict.get("sigma", DEFAULT_SIGMA)
        self.t_steps = config_dict.get("t_steps", DEFAULT_T_STEPS)
        self.alpha_steps = config_dict.get("alpha_steps", DEFAULT_ALPHA_STEPS)
        self.alpha_min = config_dict.get("alpha_min", DEFAULT_ALPHA_MIN)
        self.alpha_max = config_dict.get("alpha_max", DEFAULT_ALPHA_MAX)
        self.rossler_points = config_dict.get("rossler_points", DEFAULT_ROSSLER_POINTS)
        self.max_cloud_points = config_dict.get("max_cloud_points", DEFAULT_MAX_CLOUD_POINTS)
        self.show_progress = config_dict.get("show_progress", True)

        self.validate()

    def validate(self) -> None:
        """Check every field, raising one error that lists all problems."""
        problems: List[str] = []

        if self.experiment not in EXPERIMENTS:
            problems.append(f"experiment must be one of {', '.join(EXPERIMENTS)}")
        if self.featurizer not in FEATURIZERS:
            problems.append(f"featurizer must be one of {', '.join(FEATURIZERS)}")
        else:
            problems.extend(self._featurizer_param_problems())
        if not _is_int(self.seed) or not 0 <= self.seed < 2**64:
            problems.append("seed must be an unsigned 64-bit integer")
        for name in (
            "runs",
            "jobs",
            "diagrams_per_class",
            "points_per_cloud",
            "n_diagrams",
            "points_per_diagram",
            "alpha_steps",
            "max_cloud_points",
        ):
            value = getattr(self, name)
            if not _is_int(value) or value < 1:
                problems.append(f"{name} must be a positive integer")
        if not _is_int(self.cv_folds) or self.cv_folds < 2:
            problems.append("cv_folds must be an integer of at least 2")
        if not _is_int(self.t_steps) or self.t_steps < 2:
            problems.append("t_steps must be an integer of at least 2")
        if not _is_int(self.rossler_points) or self.rossler_points < 2 or self.rossler_points % 2:
            problems.append("rossler_points must be a positive even integer")
        if not _is_real(self.test_fraction) or not 0 < self.test_fraction < 1:
            problems.append("test_fraction must lie in (0, 1)")
        if not _is_real(self.sigma) or self.sigma <= 0:
            problems.append("sigma must be positive")
        if not self.lambda_grid or not all(_is_real(v) and v > 0 for v in self.lambda_grid):
            problems.append("lambda_grid must be a nonempty list of positive numbers")
        if not _is_real(self.alpha_min) or not _is_real(self.alpha_max):
            problems.append("alpha_min and alpha_max must be finite numbers")
        elif self.alpha_min > self.alpha_max or (
            self.alpha_min == self.alpha_max and self.alpha_steps != 1
        ):
            problems.append("alpha_min must be below alpha_max")
        if not self.dims or not set(self.dims) <= {0, 1} or len(set(self.dims)) != len(self.dims):
            problems.append("dims must be a nonempty subset of [0, 1]")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            problems.append("output_dir must be a nonempty path")
        if not isinstance(self.show_progress, bool):
            problems.append("show_progress must be a boolean")

        if problems:
            raise ConfigValidationError(problems)

    def _featurizer_param_problems(self) -> List[str]:
        problems = []
        params = self.featurizer_params
        allowed = FEATURIZER_PARAM_KEYS[self.featurizer]
        for key in sorted(set(params) - allowed):
            problems.append(f"featurizer_params.{key} is not a {self.featurizer} parameter")
        for key in ("d", "m", "n"):
            if key in params and key in allowed and (not _is_int(params[key]) or params[key] < 1):
                problems.append(f"featurizer_params.{key} must be a positive integer")
        for key in ("delta", "epsilon"):
            if key in params and key in allowed and (not _is_real(params[key]) or params[key] <= 0):
                problems.append(f"featurizer_params.{key} must be positive")
        pad = params.get("pad")
        if "pad" in allowed and pad is not None and (not _is_real(pad) or pad < 0):
            problems.append("featurizer_params.pad must be nonnegative")
        trim = params.get("trim")
        if "trim" in allowed and trim is not None and (not _is_real(trim) or not 0 <= trim < 0.5):
            problems.append("featurizer_params.trim must be in [0, 0.5)")
        if "pad_mode" in params and "pad_mode" in allowed and params["pad_mode"] not in PAD_MODES:
            problems.append(f"featurizer_params.pad_mode must be one of {', '.join(PAD_MODES)}")
        abs_mode = params.get("abs_mode")
        if "abs_mode" in allowed and abs_mode is not None and not isinstance(abs_mode, bool):
            problems.append("featurizer_params.abs_mode must be a boolean")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        """Convert the configuration to a dictionary.

        Returns:
            Dict[str, Any]: Dictionary representation of the configuration
        """
        return {
            "experiment": self.experiment,
            "featurizer": self.featurizer,
            "featurizer_params": dict(self.featurizer_params),
            "seed": self.seed,
            "runs": self.runs,
            "jobs": self.jobs,
            "test_fraction": self.test_fraction,
            "lambda_grid": list(self.lambda_grid),
            "cv_folds": self.cv_folds,
            "output_dir": self.output_dir,
            "dims": list(self.dims),
            "diagrams_per_class": self.diagrams_per_class,
            "points_per_cloud": self.points_per_cloud,
            "n_diagrams": self.n_diagrams,
            "points_per_diagram": self.points_per_diagram,
            "sigma": self.sigma,
            "t_steps": self.t_steps,
            "alpha_steps": self.alpha_steps,
            "alpha_min": self.alpha_min,
            "alpha_max": self.alpha_max,
            "rossler_points": self.rossler_points,
            "max_cloud_points": self.max_cloud_points,
            "show_progress": self.show_progress,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigValidationError([f"config file is not valid JSON: {e}"]) from e
        if not isinstance(data, dict):
            raise ConfigValidationError(["config file must contain a JSON object"])
        return cls(data)

    @classmethod
    def from_file(cls, path: str, fs_service: Optional[Any] = None) -> "ExperimentConfig":
        """Load a JSON config file through a filesystem service."""
        from ..services.filesystem_service import RealFileSystemService

        fs_service = fs_service or RealFileSystemService()
        try:
            content = fs_service.read_file(path)
        except OSError as e:
            raise ConfigValidationError([f"cannot read config file {path}: {e}"]) from e
        return cls.from_json(content)

    def replace(self, **changes: Any) -> "ExperimentConfig":
        """Return a validated copy with some fields changed."""
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig(data)
