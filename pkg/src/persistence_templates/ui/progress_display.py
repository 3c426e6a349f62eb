"""Progress bars, messages and score summaries on the terminal."""

import os
import sys
from typing import Optional, Sequence, Tuple, Union

from rich import box
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskID, TextColumn
from rich.table import Table

# (split, metric, mean, std, number of runs)
SummaryRow = Tuple[str, str, float, float, int]


class DisplayMode:
    """Controls the display mode of the UI"""

    def __init__(self) -> None:
        self._is_test_mode = self._detect_test_mode()
        self._console = Console(force_terminal=not self._is_test_mode, stderr=True)

    @staticmethod
    def _detect_test_mode() -> bool:
        """Detect if we're running in a test environment"""
        return (
            "pytest" in sys.modules
            or os.getenv("DISABLE_RICH_PROGRESS", "0") == "1"
            or os.getenv("PYTEST_CURRENT_TEST") is not None
        )

    @property
    def is_test_mode(self) -> bool:
        return self._is_test_mode

    @property
    def console(self) -> Console:
        return self._console


DISPLAY_MODE = DisplayMode()


def create_progress_group(console: Optional[Console] = None) -> Progress:
    """Create the progress bar used for runs and dataset items.

    Returns:
        Progress: Rich progress group with configured columns
    """
    console = console or DISPLAY_MODE.console
    if DISPLAY_MODE.is_test_mode:
        return Progress(
            TextColumn("[progress.description]{task.description}"),
            TextColumn("{task.completed}/{task.total}"),
            console=console,
        )

    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TextColumn("{task.completed}/{task.total}"),
        TextColumn("[progress.elapsed]{task.elapsed:.1f}s"),
        console=console,
        expand=True,
    )


def create_scores_table(
    title: str, rows: Sequence[SummaryRow], plain: Optional[bool] = None
) -> Union[Table, str]:
    """Summarize scores as mean ± std per (split, metric).

    A plain-text rendering is returned in test mode.
    """
    if plain is None:
        plain = DISPLAY_MODE.is_test_mode
    if plain:
        lines = [title]
        lines.extend(
            f"{split} {metric}: {mean:.4f} ± {std:.4f} (runs={count})"
            for split, metric, mean, std, count in rows
        )
        return "\n".join(lines)

    table = Table(title=title, box=box.SIMPLE)
    table.add_column("Split", style="bold cyan")
    table.add_column("Metric")
    table.add_column("Mean", justify="right")
    table.add_column("Std", justify="right")
    table.add_column("Runs", justify="right")
    for split, metric, mean, std, count in rows:
        table.add_row(split, metric, f"{mean:.4f}", f"{std:.4f}", str(count))
    return table


class ProgressDisplay:
    """Progress and messages for long-running commands.

    Everything is silent when ``enabled`` is false or under tests.
    """

    def __init__(self, enabled: bool = True) -> None:
        self.display_mode = DisplayMode()
        self.enabled = enabled and not self.display_mode.is_test_mode
        self.console = self.display_mode.console
        self.progress: Optional[Progress] = None
        self.task_id: Optional[TaskID] = None
        self.current = 0
        self.total = 0

    def start(self, description: str, total: int) -> None:
        """Start a progress bar over ``total`` steps."""
        self.current = 0
        self.total = total
        if not self.enabled:
            return
        self.progress = create_progress_group(self.console)
        self.task_id = self.progress.add_task(description, total=total)
        self.progress.start()

    def advance(self, steps: int = 1, description: Optional[str] = None) -> None:
        self.current += steps
        if self.progress is not None and self.task_id is not None:
            if description is not None:
                self.progress.update(self.task_id, description=description)
            self.progress.update(self.task_id, completed=self.current)

    def set_total(self, total: int) -> None:
        self.total = total
        if self.progress is not None and self.task_id is not None:
            self.progress.update(self.task_id, total=total)

    def finish(self) -> None:
        """Stop the progress bar."""
        if self.progress is not None:
            self.progress.stop()
            self.progress = None
            self.task_id = None

    def show_summary(self, title: str, rows: Sequence[SummaryRow]) -> None:
        if self.enabled:
            self.console.print(create_scores_table(title, rows))

    def error(self, message: str) -> None:
        if self.enabled:
            self.console.print(f"[red]Error: {message}[/red]")

    def warning(self, message: str) -> None:
        if self.enabled:
            self.console.print(f"[yellow]Warning: {message}[/yellow]")

    def info(self, message: str) -> None:
        if self.enabled:
            self.console.print(f"[blue]Info: {message}[/blue]")

    def success(self, message: str) -> None:
        if self.enabled:
            self.console.print(f"[green]Success: {message}[/green]")
