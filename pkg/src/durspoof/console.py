"""Terminal output for the CLI, the trainer and the evaluators."""

from __future__ import annotations

from contextlib import contextmanager
from enum import IntEnum
from typing import TYPE_CHECKING, Generator, Optional, Protocol, Sequence

if TYPE_CHECKING:
    from rich.console import Console as RichConsole
    from rich.status import Status


class Verbosity(IntEnum):
    """Verbosity levels for console output."""

    SILENT = 0  # library default
    QUIET = 1  # errors only
    NORMAL = 2  # spinners + checkmarks (CLI default)
    VERBOSE = 3  # progress bars and per-epoch lines
    DEBUG = 4  # per-batch lines


class Advance(Protocol):
    """Callback yielded by :meth:`Console.progress`."""

    def __call__(self, n: int = 1, note: str = "") -> None: ...


def _noop(n: int = 1, note: str = "") -> None:
    pass


class Console:
    """Output manager shared by the CLI, the trainer and the evaluators.

    Nothing is printed at ``Verbosity.SILENT``; rich is only imported once
    something has to be shown.

    Args:
        verbosity: The verbosity level. Defaults to SILENT for library usage.
    """

    def __init__(self, verbosity: Verbosity = Verbosity.SILENT) -> None:
        self.verbosity = verbosity
        self._rich_console: Optional[RichConsole] = None

    def _get_rich(self) -> "RichConsole":
        if self._rich_console is None:
            from rich.console import Console as RichConsole

            self._rich_console = RichConsole()
        return self._rich_console

    @contextmanager
    def status(self, message: str) -> Generator[Optional["Status"], None, None]:
        """Show a spinner while a step runs (NORMAL+)."""
        if self.verbosity >= Verbosity.NORMAL:
            with self._get_rich().status(message) as status:
                yield status
        else:
            yield None

    def success(self, message: str) -> None:
        if self.verbosity >= Verbosity.NORMAL:
            self._get_rich().print(f"[green]✓[/green] {message}")

    def error(self, error: "BaseException | str") -> None:
        """Print one machine-parsable error line to stderr.

        The line has the form ``<ErrorClass>: <message>``; embedded newlines
        are collapsed so scripts can split on the first colon.
        """
        if self.verbosity < Verbosity.QUIET:
            return
        if isinstance(error, BaseException):
            line = f"{type(error).__name__}: {error}"
        else:
            line = str(error)
        line = " ".join(line.split())

        from rich.console import Console as RichConsole

        # stderr is looked up per call.
        RichConsole(stderr=True, highlight=False).print(line, markup=False, soft_wrap=True)

    def warning(self, message: str) -> None:
        if self.verbosity >= Verbosity.VERBOSE:
            self._get_rich().print(f"[yellow]![/yellow] {message}")

    def info(self, message: str) -> None:
        if self.verbosity >= Verbosity.VERBOSE:
            self._get_rich().print(message)

    def debug(self, message: str) -> None:
        if self.verbosity >= Verbosity.DEBUG:
            self._get_rich().print(f"[dim]{message}[/dim]")

    @contextmanager
    def progress(self, total: int, description: str) -> Generator[Advance, None, None]:
        """Track ``total`` steps of work.

        At VERBOSE+ a transient bar is drawn whose trailing column shows the
        latest ``note`` (the running batch loss during training); at NORMAL a
        spinner stands in for it.

        Yields:
            ``advance(n=1, note="")`` moving the bar by ``n`` steps.
        """
        if self.verbosity >= Verbosity.VERBOSE:
            from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn

            with Progress(
                TextColumn("[bold blue]{task.description}"),
                BarColumn(),
                MofNCompleteColumn(),
                TimeRemainingColumn(),
                TextColumn("[dim]{task.fields[note]}"),
                console=self._get_rich(),
                transient=True,
            ) as bar:
                task = bar.add_task(description, total=total, note="")

                def advance(n: int = 1, note: str = "") -> None:
                    bar.update(task, advance=n, note=note)

                yield advance
        elif self.verbosity >= Verbosity.NORMAL:
            with self.status(description):
                yield _noop
        else:
            yield _noop

    def table(self, title: str, columns: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
        """Render a small table such as the per-duration EER grid (NORMAL+)."""
        if self.verbosity < Verbosity.NORMAL:
            return
        from rich.table import Table

        table = Table(title=title)
        for i, column in enumerate(columns):
            table.add_column(column, justify="left" if i == 0 else "right")
        for row in rows:
            table.add_row(*(str(cell) for cell in row))
        self._get_rich().print(table)

    def print(self, message: str = "") -> None:
        if self.verbosity >= Verbosity.NORMAL:
            self._get_rich().print(message)


class NullConsole(Console):
    """Silent console used when library callers pass none."""

    def __init__(self) -> None:
        super().__init__(Verbosity.SILENT)
