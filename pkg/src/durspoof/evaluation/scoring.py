"""Utterance scoring, score files and the duration-binned evaluation grid."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from durspoof.console import Console, NullConsole
from durspoof.data.chunking import fix_length
from durspoof.data.records import SAMPLE_RATE, Utterance
from durspoof.errors import InputError, UndefinedMetricError
from durspoof.evaluation.eer import compute_eer_fast
from durspoof.result import EvalCell, EvalReport, ScoreEntry

DEFAULT_DURATIONS = (1, 2, 3, 4, 5, 6)
VARIABLE = "variable"
SCORE_CHUNK = 32


class Scorer(Protocol):
    def score(self, samples: np.ndarray) -> np.ndarray:
        """Bonafide scores for a batch ``[N, L]``."""
        ...


def condition_name(seconds: float) -> str:
    return f"{seconds:g}s"


def score_utterance(model: Scorer, utterance: Utterance) -> float:
    """Score one utterance at its full length."""
    return float(model.score(np.asarray(utterance.samples)[None, :])[0])


def _score_rows(model: Scorer, rows: np.ndarray) -> np.ndarray:
    return np.asarray(model.score(rows), dtype=np.float64)


def _score_one(model: Scorer, samples: np.ndarray) -> float:
    return float(model.score(samples[None, :])[0])


def score_utterances(
    model: Scorer,
    utterances: Sequence[Utterance],
    chunk_size: Optional[int] = None,
    n_jobs: int = 1,
) -> List[ScoreEntry]:
    """Score utterances, optionally cut/padded to ``chunk_size`` samples first.

    Fixed-length inputs are scored in stacked groups; full-length inputs one
    at a time. ``n_jobs`` joblib workers share the read-only model.
    """
    if not utterances:
        return []
    if chunk_size is None:
        values = Parallel(n_jobs=n_jobs)(delayed(_score_one)(model, np.asarray(u.samples)) for u in utterances)
        scores = np.asarray(values, dtype=np.float64)
    else:
        rows = np.stack([fix_length(u.samples, chunk_size) for u in utterances]).astype(np.float32)
        groups = [rows[i : i + SCORE_CHUNK] for i in range(0, len(rows), SCORE_CHUNK)]
        parts = Parallel(n_jobs=n_jobs)(delayed(_score_rows)(model, g) for g in groups)
        scores = np.concatenate(parts)
    return [ScoreEntry(u.id, float(s), u.label) for u, s in zip(utterances, scores)]


def _cell(dataset: str, condition: str, entries: List[ScoreEntry]) -> EvalCell:
    n_bonafide = sum(e.label == "bonafide" for e in entries)
    n_spoof = sum(e.label == "spoof" for e in entries)
    try:
        result = compute_eer_fast(entries)
    except UndefinedMetricError:
        return EvalCell(dataset, condition, None, None, n_bonafide, n_spoof)
    return EvalCell(dataset, condition, result.eer, result.threshold, n_bonafide, n_spoof)


def evaluate_at_durations(
    model: Scorer,
    corpus: Mapping[str, Sequence[Utterance]],
    durations: Sequence[float] = DEFAULT_DURATIONS,
    include_variable: bool = True,
    n_jobs: int = 1,
    console: Optional[Console] = None,
) -> EvalReport:
    """EER of every dataset at every evaluation duration.

    For duration ``d`` every utterance is fixed to ``d · 16000`` samples
    (head crop, repeat padding); the ``variable`` condition scores full
    utterances. Cells lacking a class are marked undefined and the other
    cells are still computed.

    Args:
        model: Anything with a batch ``score`` method, in eval mode.
        corpus: Labeled utterances per dataset tag.
        durations: Fixed evaluation durations in seconds.
        include_variable: Add the full-length condition.
        n_jobs: joblib workers for scoring.
        console: Progress output.
    """
    console = console or NullConsole()
    for tag, utterances in corpus.items():
        unlabeled = [u.id for u in utterances if u.label == "unknown"]
        if unlabeled:
            raise InputError(f"dataset {tag!r} has unlabeled utterances, e.g. {unlabeled[0]!r}")
    conditions: Dict[str, Optional[int]] = {
        condition_name(d): int(round(d * SAMPLE_RATE)) for d in durations
    }
    if include_variable:
        conditions[VARIABLE] = None

    cells: Dict[str, Dict[str, EvalCell]] = {}
    scores: Dict[str, Dict[str, List[ScoreEntry]]] = {}
    with console.progress(len(corpus) * len(conditions), f"Scoring {len(corpus)} dataset(s)") as advance:
        for tag, utterances in corpus.items():
            cells[tag] = {}
            scores[tag] = {}
            for name, chunk in conditions.items():
                entries = score_utterances(model, utterances, chunk, n_jobs)
                scores[tag][name] = entries
                cells[tag][name] = _cell(tag, name, entries)
                console.debug(f"{tag} @ {name}: EER {cells[tag][name].eer_percent}%")
                advance()
    return EvalReport(
        datasets=list(corpus),
        conditions=list(conditions),
        cells=cells,
        scores=scores,
        metadata={"durations": [float(d) for d in durations], "include_variable": include_variable},
    )


def write_score_file(path: Union[str, Path], entries: Sequence[ScoreEntry]) -> Path:
    """Write ``utt_id score`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(f"{entry.utterance_id} {entry.score!r}\n")
    return path


def read_score_file(path: Union[str, Path], labels: Optional[Mapping[str, str]] = None) -> List[ScoreEntry]:
    """Read ``utt_id score`` lines, attaching labels from ``labels`` when given.

    Raises:
        InputError: On malformed lines (with the line number).
    """
    path = Path(path)
    entries: List[ScoreEntry] = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise InputError(f"{path}:{line_number}: expected 'utt_id score', got {line.strip()!r}")
            try:
                score = float(fields[1])
            except ValueError as exc:
                raise InputError(f"{path}:{line_number}: score {fields[1]!r} is not a number") from exc
            label = labels.get(fields[0], "unknown") if labels else "unknown"
            entries.append(ScoreEntry(fields[0], score, label))
    return entries
