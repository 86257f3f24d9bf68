"""Result objects for duration-binned evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from durspoof.errors import InputError

UNDEFINED = "—"
REPORT_COLUMNS = ["dataset", "duration", "eer_percent", "n_bonafide", "n_spoof"]


@dataclass
class ScoreEntry:
    """Score of one utterance; higher means more bonafide."""

    utterance_id: str
    score: float
    label: str = "unknown"

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise InputError(f"score of {self.utterance_id!r} is not finite: {self.score}")


@dataclass
class EvalCell:
    """EER of one dataset under one duration condition.

    ``eer`` is ``None`` when the cell is undefined (a class is missing).
    """

    dataset: str
    condition: str
    eer: Optional[float]
    threshold: Optional[float]
    n_bonafide: int
    n_spoof: int

    @property
    def defined(self) -> bool:
        return self.eer is not None

    @property
    def eer_percent(self) -> str:
        return UNDEFINED if self.eer is None else f"{100.0 * self.eer:.2f}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "duration": self.condition,
            "eer": self.eer,
            "eer_percent": self.eer_percent,
            "threshold": self.threshold,
            "n_bonafide": self.n_bonafide,
            "n_spoof": self.n_spoof,
        }


@dataclass
class EvalReport:
    """Grid of EERs indexed by dataset tag × duration condition."""

    datasets: List[str]
    conditions: List[str]
    cells: Dict[str, Dict[str, EvalCell]]
    scores: Dict[str, Dict[str, List[ScoreEntry]]] = field(default_factory=dict, repr=False)
    metadata: Dict[str, Any] = field(default_factory=dict)
    export_paths: Dict[str, Path] = field(default_factory=dict)

    def cell(self, dataset: str, condition: str) -> EvalCell:
        return self.cells[dataset][condition]

    def iter_cells(self) -> List[EvalCell]:
        return [self.cells[d][c] for d in self.datasets for c in self.conditions]

    def to_frame(self) -> pd.DataFrame:
        """Long table with the report CSV columns, one row per cell."""
        rows = [
            {
                "dataset": cell.dataset,
                "duration": cell.condition,
                "eer_percent": cell.eer_percent,
                "n_bonafide": cell.n_bonafide,
                "n_spoof": cell.n_spoof,
            }
            for cell in self.iter_cells()
        ]
        return pd.DataFrame(rows, columns=REPORT_COLUMNS)

    def to_wide_frame(self) -> pd.DataFrame:
        """One row per dataset, one column per duration condition (EER %)."""
        return pd.DataFrame(
            [[self.cells[d][c].eer_percent for c in self.conditions] for d in self.datasets],
            index=pd.Index(self.datasets, name="dataset"),
            columns=self.conditions,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "datasets": list(self.datasets),
            "conditions": list(self.conditions),
            "cells": [cell.to_dict() for cell in self.iter_cells()],
            "metadata": self.metadata,
        }

    def export(self, output_dir: Union[str, Path], formats: Sequence[str] = ("csv",)) -> Dict[str, Path]:
        """Write the report in every requested format plus one score file per cell.

        Returns:
            Mapping of format name to written path.
        """
        from durspoof.evaluation.scoring import write_score_file
        from durspoof.exporters import get_exporters

        exporters = get_exporters()
        unknown = [f for f in formats if f not in exporters]
        if unknown:
            raise InputError(f"unknown report format {unknown[0]!r} (available: {', '.join(sorted(exporters))})")
        paths = {name: exporters[name].export(self, output_dir) for name in formats}
        for dataset, by_condition in self.scores.items():
            for condition, entries in by_condition.items():
                write_score_file(Path(output_dir) / "scores" / f"{dataset}_{condition}.txt", entries)
        self.export_paths = paths
        return paths
