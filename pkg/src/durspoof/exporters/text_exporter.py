"""Aligned plain-text exporter."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, List, Union

from durspoof.exporters.base import Exporter

if TYPE_CHECKING:
    from durspoof.result import EvalReport


def render_text(report: EvalReport) -> str:
    """One row per dataset, one column per duration condition, EER in percent."""
    header = ["dataset"] + list(report.conditions)
    rows: List[List[str]] = [header]
    for dataset in report.datasets:
        rows.append([dataset] + [report.cell(dataset, c).eer_percent for c in report.conditions])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for n, row in enumerate(rows):
        cells = [row[0].ljust(widths[0])] + [value.rjust(widths[i]) for i, value in enumerate(row) if i > 0]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "EER/% by evaluation duration\n" + "\n".join(lines) + "\n"


class TextExporter(Exporter):
    """Export the report as an aligned table in ``report.txt``."""

    def export(self, report: EvalReport, output_dir: Union[str, Path]) -> Path:
        path = self.ensure_output_dir(output_dir) / "report.txt"
        path.write_text(render_text(report), encoding="utf-8")
        return path
