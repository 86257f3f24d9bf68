"""Tests for the report exporters."""

import json

import pandas as pd
import pytest

from durspoof.errors import InputError
from durspoof.exporters import get_exporters, render_text
from durspoof.result import EvalCell, EvalReport, ScoreEntry


@pytest.fixture
def report():
    cells = {
        "synth_eval": {
            "1s": EvalCell("synth_eval", "1s", 0.125, 0.3, 4, 4),
            "variable": EvalCell("synth_eval", "variable", 0.0, 0.5, 4, 4),
        },
        "bonafide_only": {
            "1s": EvalCell("bonafide_only", "1s", None, None, 2, 0),
            "variable": EvalCell("bonafide_only", "variable", None, None, 2, 0),
        },
    }
    scores = {"synth_eval": {"1s": [ScoreEntry("u1", 0.25, "bonafide")]}}
    return EvalReport(
        datasets=["synth_eval", "bonafide_only"],
        conditions=["1s", "variable"],
        cells=cells,
        scores=scores,
        metadata={"seed": 3},
    )


class TestExporters:
    def test_registry(self):
        assert sorted(get_exporters()) == ["csv", "json", "text"]

    def test_csv(self, report, tmp_path):
        path = get_exporters()["csv"].export(report, tmp_path)
        assert path.name == "report.csv"
        frame = pd.read_csv(path, dtype=str)
        assert list(frame.columns) == ["dataset", "duration", "eer_percent", "n_bonafide", "n_spoof"]
        assert frame["eer_percent"].tolist() == ["12.50", "0.00", "—", "—"]
        assert frame["duration"].tolist() == ["1s", "variable", "1s", "variable"]

    def test_text(self, report):
        lines = render_text(report).splitlines()
        assert lines[0] == "EER/% by evaluation duration"
        assert lines[1].split() == ["dataset", "1s", "variable"]
        assert lines[3].split() == ["synth_eval", "12.50", "0.00"]
        assert lines[4].split() == ["bonafide_only", "—", "—"]
        assert len({len(line) for line in lines[1:3]}) == 1

    def test_json(self, report, tmp_path):
        path = get_exporters()["json"].export(report, tmp_path)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["conditions"] == ["1s", "variable"]
        assert data["metadata"] == {"seed": 3}
        assert data["cells"][0]["eer"] == 0.125
        assert data["cells"][2]["eer"] is None

    def test_report_export_writes_scores(self, report, tmp_path):
        paths = report.export(tmp_path / "out", ["csv", "text"])
        assert set(paths) == {"csv", "text"}
        assert (tmp_path / "out" / "report.txt").is_file()
        assert (tmp_path / "out" / "scores" / "synth_eval_1s.txt").read_text() == "u1 0.25\n"
        assert report.export_paths == paths

    def test_unknown_format(self, report, tmp_path):
        with pytest.raises(InputError, match="unknown report format"):
            report.export(tmp_path, ["xlsx"])

    def test_wide_frame(self, report):
        wide = report.to_wide_frame()
        assert wide.loc["synth_eval", "1s"] == "12.50"
        assert wide.loc["bonafide_only", "variable"] == "—"
