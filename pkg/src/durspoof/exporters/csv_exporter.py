"""CSV exporter for evaluation reports."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Union

from durspoof.exporters.base import Exporter

if TYPE_CHECKING:
    from durspoof.result import EvalReport


class CSVExporter(Exporter):
    """Export the report as ``report.csv``.

    Columns are ``dataset,duration,eer_percent,n_bonafide,n_spoof`` with one
    row per cell; undefined cells carry ``—`` in ``eer_percent``.
    """

    def export(self, report: EvalReport, output_dir: Union[str, Path]) -> Path:
        path = self.ensure_output_dir(output_dir) / "report.csv"
        report.to_frame().to_csv(path, index=False, encoding="utf-8")
        return path
