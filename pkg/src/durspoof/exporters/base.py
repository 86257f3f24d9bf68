"""Base class for report exporters."""

from __future__ import annotations

from abc import ABC, abstractmethod
from pathlib import Path
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from durspoof.result import EvalReport


class Exporter(ABC):
    """Abstract base class for report exporters.

    All exporters must implement the export method to save
    reports in their specific format.
    """

    @abstractmethod
    def export(self, report: EvalReport, output_dir: Union[str, Path]) -> Path:
        """Export the report to a file.

        Args:
            report: EvalReport to export
            output_dir: Directory for output file

        Returns:
            Path: Path to created file
        """

    def ensure_output_dir(self, output_dir: Union[str, Path]) -> Path:
        """Ensure output directory exists.

        Args:
            output_dir: Directory path

        Returns:
            Path: Path object for the directory
        """
        path = Path(output_dir)
        path.mkdir(parents=True, exist_ok=True)
        return path
