"""Report exporters for generating output files."""

from typing import Dict

from durspoof.exporters.base import Exporter
from durspoof.exporters.csv_exporter import CSVExporter
from durspoof.exporters.json_exporter import JSONExporter
from durspoof.exporters.text_exporter import TextExporter, render_text

# Registry of available exporters
_EXPORTERS: Dict[str, Exporter] = {
    "csv": CSVExporter(),
    "text": TextExporter(),
    "json": JSONExporter(),
}


def get_exporters() -> Dict[str, Exporter]:
    """Get registry of available exporters.

    Returns:
        dict: Mapping of format name to exporter instance
    """
    return _EXPORTERS


__all__ = [
    "CSVExporter",
    "Exporter",
    "JSONExporter",
    "TextExporter",
    "get_exporters",
    "render_text",
]
