"""Runs an experiment protocol end to end and writes its reports."""

import logging
import os
import re
import statistics
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple, Union

from .. import __version__
from ..exceptions import ExperimentError
from ..models.experiment_config import ExperimentConfig
from ..ui.progress_display import ProgressDisplay, SummaryRow
from .filesystem_service import FileSystemService, default_fs_service
from .protocols import Protocol, RunResult, create_protocol
from .serialization import (
    CONFIG_ECHO_NAME,
    FEATURIZER_NAME,
    PREDICTIONS_NAME,
    SCORES_NAME,
    ArtifactStore,
    ScoreRow,
    coefficient_grid_to_csv,
    featurizers_to_json,
    predictions_to_csv,
    scores_to_csv,
)

logger = logging.getLogger(__name__)

_UNSAFE = re.compile(r"[^A-Za-z0-9_.=-]+")


def coefficient_file_name(dimension: int, label: Any) -> str:
    return f"coefficients_{dimension}_{_UNSAFE.sub('_', str(label))}.csv"


def summarize_scores(rows: List[ScoreRow]) -> List[SummaryRow]:
    """Mean and sample standard deviation per (split, metric), in first-seen order.

    The standard deviation is 0 for a single run.
    """
    groups: Dict[Tuple[str, str], List[float]] = {}
    for row in rows:
        groups.setdefault((row.split, row.metric), []).append(row.value)
    summary = []
    for (split, metric), values in groups.items():
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        summary.append((split, metric, statistics.fmean(values), std, len(values)))
    return summary


def _execute_run(protocol: Protocol, config: ExperimentConfig, run: int) -> RunResult:
    return protocol.run(config, run)


@dataclass
class ExperimentReport:
    """What an experiment produced."""

    output_dir: str
    files: List[str] = field(default_factory=list)
    scores: List[ScoreRow] = field(default_factory=list)
    summary: List[SummaryRow] = field(default_factory=list)

    def metric(self, split: str, metric: str) -> Tuple[float, float]:
        """(mean, std) of one metric."""
        for row_split, row_metric, mean, std, _ in self.summary:
            if (row_split, row_metric) == (split, metric):
                return mean, std
        raise KeyError(f"No {split} {metric} in the report")


class ExperimentService:
    """Service that executes one experiment protocol ``runs`` times."""

    def __init__(
        self,
        config: Union[Dict[str, Any], ExperimentConfig],
        fs_service: Optional[FileSystemService] = None,
        progress: Optional[ProgressDisplay] = None,
    ) -> None:
        """Initialize the experiment service.

        Args:
            config: Experiment configuration, either as a dict or ExperimentConfig
            fs_service: Optional file system service (defaults to RealFileSystemService)
            progress: Optional progress display
        """
        if isinstance(config, dict):
            config = ExperimentConfig(config)
        self.config = config
        self.fs_service = default_fs_service(fs_service)
        self.store = ArtifactStore(self.fs_service)
        self.progress = progress or ProgressDisplay(enabled=config.show_progress)
        self._written: List[str] = []

    def run(self) -> ExperimentReport:
        """Execute the protocol and write every report file.

        Returns:
            ExperimentReport: Written files and score summary

        Raises:
            ExperimentError: Naming the failing stage; files written so far are removed
        """
        config = self.config
        output_dir = config.output_dir
        if not self.fs_service.check_permissions(output_dir):
            raise ExperimentError("configure", f"Output directory {output_dir} is not writable")

        created_dir = not self.fs_service.exists(output_dir)
        self._written = []
        try:
            protocol = create_protocol(config.experiment)
            logger.info(f"Preparing {config.experiment} ({config.featurizer})")
            protocol.prepare(config)
            results = self._execute(protocol)
            report = self._write_reports(protocol, results)
        except BaseException as e:
            self._cleanup(output_dir, created_dir)
            if isinstance(e, ExperimentError) or not isinstance(e, Exception):
                raise
            raise ExperimentError("report", str(e), e) from e
        finally:
            self.progress.finish()

        self.progress.show_summary(f"{config.experiment} ({config.featurizer})", report.summary)
        return report

    def _execute(self, protocol: Protocol) -> List[RunResult]:
        config = self.config
        self.progress.start(f"{config.experiment} runs", config.runs)
        results: Dict[int, RunResult] = {}
        if config.jobs > 1 and config.runs > 1:
            workers = min(config.jobs, config.runs)
            logger.info(f"Running {config.runs} runs on {workers} processes")
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(_execute_run, protocol, config, run): run
                    for run in range(config.runs)
                }
                for future in as_completed(futures):
                    run = futures[future]
                    results[run] = future.result()
                    self.progress.advance(description=f"run {run} done")
        else:
            for run in range(config.runs):
                logger.info(f"Run {run + 1}/{config.runs}")
                results[run] = _execute_run(protocol, config, run)
                self.progress.advance(description=f"run {run} done")
        return [results[run] for run in range(config.runs)]

    def _write(self, name: str, content: str) -> str:
        path = os.path.join(self.config.output_dir, name)
        self.store.write_text(path, content)
        self._written.append(path)
        return path

    def _write_reports(self, protocol: Protocol, results: List[RunResult]) -> ExperimentReport:
        config = self.config
        report = ExperimentReport(config.output_dir)
        if not self.fs_service.create_directory(config.output_dir):
            raise ExperimentError("report", f"Cannot create {config.output_dir}")

        for result in results:
            report.scores.extend(result.scores)
        report.summary = summarize_scores(report.scores)
        summary_rows = [
            ScoreRow(config.experiment, stat, split, metric, value)
            for split, metric, mean, std, _ in report.summary
            for stat, value in (("mean", mean), ("std", std))
        ]
        report.files.append(self._write(SCORES_NAME, scores_to_csv(report.scores + summary_rows)))
        report.files.append(
            self._write(
                PREDICTIONS_NAME,
                predictions_to_csv(row for result in results for row in result.predictions),
            )
        )

        first = results[0]
        for (dim, label), grid in sorted(first.grids.items(), key=lambda item: str(item[0])):
            report.files.append(
                self._write(
                    coefficient_file_name(dim, label),
                    coefficient_grid_to_csv(grid.i_values, grid.j_values, grid.values),
                )
            )
        if first.featurizers:
            report.files.append(
                self._write(FEATURIZER_NAME, featurizers_to_json(first.featurizers))
            )
        for name, content in sorted(protocol.artifacts().items()):
            report.files.append(self._write(name, content))

        # Timestamps only appear in the config echo
        echo = {
            "config": config.to_dict(),
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__,
        }
        echo_path = self.store.write_json(os.path.join(config.output_dir, CONFIG_ECHO_NAME), echo)
        self._written.append(echo_path)
        report.files.append(echo_path)
        logger.info(f"Wrote {len(report.files)} files to {config.output_dir}")
        return report

    def _cleanup(self, output_dir: str, created_dir: bool) -> None:
        if created_dir:
            self.fs_service.delete(output_dir)
        else:
            for path in self._written:
                self.fs_service.delete(path)
        logger.warning(f"Removed partial outputs of {self.config.experiment}")


def run_experiment(
    config: Union[Dict[str, Any], ExperimentConfig],
    fs_service: Optional[FileSystemService] = None,
) -> ExperimentReport:
    """Run one experiment without a progress display."""
    if isinstance(config, dict):
        config = ExperimentConfig(config)
    return ExperimentService(config, fs_service, ProgressDisplay(enabled=False)).run()
