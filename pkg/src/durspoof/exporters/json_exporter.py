"""JSON exporter for evaluation reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Union

from durspoof.exporters.base import Exporter

if TYPE_CHECKING:
    from durspoof.result import EvalReport


class JSONExporter(Exporter):
    """Export the full report (cells, thresholds, metadata) as ``report.json``."""

    def export(self, report: EvalReport, output_dir: Union[str, Path]) -> Path:
        path = self.ensure_output_dir(output_dir) / "report.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, ensure_ascii=False)
        return path
