"""Equal error rate.

Both entry points build the same integer curves over the candidate
thresholds ``t_0 < ... < t_{K-1}`` (the distinct scores) plus ``t_K = +inf``:

* ``FA(t)``: spoof utterances with score ``>= t`` (accepted);
* ``FR(t)``: bonafide utterances with score ``< t`` (rejected).

With rates ``FAR = FA / n_spoof`` and ``FRR = FR / n_bonafide`` the difference
``FAR − FRR`` starts at 1 and ends at −1. At the first index ``k`` where it
is ``<= 0`` the EER is ``FAR(t_k)`` if the difference is exactly zero,
otherwise both curves are linearly interpolated between ``k − 1`` and ``k``
at the zero crossing. The reported threshold is interpolated the same way
(``t_{k-1}`` when ``t_k`` is infinite).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics import roc_curve

from durspoof.errors import InputError, UndefinedMetricError
from durspoof.result import ScoreEntry

ScoreInput = Union[Iterable[ScoreEntry], Tuple[Sequence[float], Sequence[float]]]


@dataclass(frozen=True)
class EERResult:
    """EER as a fraction in ``[0, 1]`` and the threshold where it occurs."""

    eer: float
    threshold: float

    @property
    def percent(self) -> float:
        return 100.0 * self.eer

    def to_dict(self) -> Dict[str, float]:
        return {"eer": self.eer, "threshold": self.threshold}


def split_scores(entries: ScoreInput) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(bonafide, spoof)`` score arrays.

    Accepts :class:`ScoreEntry` objects or an explicit ``(bonafide, spoof)`` pair.

    Raises:
        UndefinedMetricError: If either class is empty.
        InputError: On non-finite scores or entries without a label.
    """
    if isinstance(entries, tuple) and len(entries) == 2 and not isinstance(entries[0], ScoreEntry):
        bonafide = np.asarray(entries[0], dtype=np.float64).reshape(-1)
        spoof = np.asarray(entries[1], dtype=np.float64).reshape(-1)
    else:
        items = list(entries)
        if any(e.label not in ("bonafide", "spoof") for e in items):
            raise InputError("EER needs every score entry to be labeled bonafide or spoof")
        bonafide = np.array([e.score for e in items if e.label == "bonafide"], dtype=np.float64)
        spoof = np.array([e.score for e in items if e.label == "spoof"], dtype=np.float64)
    if not (np.all(np.isfinite(bonafide)) and np.all(np.isfinite(spoof))):
        raise InputError("EER scores must be finite")
    if bonafide.size == 0 or spoof.size == 0:
        raise UndefinedMetricError(
            f"EER is undefined with {bonafide.size} bonafide and {spoof.size} spoof scores"
        )
    return bonafide, spoof


def _crossing(
    thresholds: np.ndarray, false_accepts: np.ndarray, false_rejects: np.ndarray, n_spoof: int, n_bonafide: int
) -> EERResult:
    far = false_accepts / n_spoof
    frr = false_rejects / n_bonafide
    diff = far - frr
    k = int(np.argmax(diff <= 0))
    if diff[k] == 0:
        return EERResult(eer=float(far[k]), threshold=float(thresholds[k]))
    alpha = diff[k - 1] / (diff[k - 1] - diff[k])
    eer = far[k - 1] + alpha * (far[k] - far[k - 1])
    if np.isfinite(thresholds[k]):
        threshold = thresholds[k - 1] + alpha * (thresholds[k] - thresholds[k - 1])
    else:
        threshold = thresholds[k - 1]
    return EERResult(eer=float(eer), threshold=float(threshold))


def compute_eer(entries: ScoreInput) -> EERResult:
    """Reference EER by counting errors at every candidate threshold (quadratic)."""
    bonafide, spoof = split_scores(entries)
    thresholds = np.append(np.unique(np.concatenate([bonafide, spoof])), np.inf)
    false_accepts = (spoof[None, :] >= thresholds[:, None]).sum(axis=1)
    false_rejects = (bonafide[None, :] < thresholds[:, None]).sum(axis=1)
    return _crossing(thresholds, false_accepts, false_rejects, spoof.size, bonafide.size)


def compute_eer_fast(entries: ScoreInput) -> EERResult:
    """Sort-based EER with the same result as :func:`compute_eer`.

    Error counts come from ``sklearn.metrics.roc_curve`` over all distinct
    scores, recovered as integers before the crossing is located.
    """
    bonafide, spoof = split_scores(entries)
    labels = np.concatenate([np.ones(bonafide.size), np.zeros(spoof.size)])
    scores = np.concatenate([bonafide, spoof])
    fpr, tpr, roc_thresholds = roc_curve(labels, scores, drop_intermediate=False)
    # first point is the "accept nothing" sentinel; the rest run from the highest score down
    thresholds = np.append(roc_thresholds[1:][::-1], np.inf)
    false_accepts = np.append(np.rint(fpr[1:][::-1] * spoof.size), 0)
    false_rejects = np.append(bonafide.size - np.rint(tpr[1:][::-1] * bonafide.size), bonafide.size)
    return _crossing(thresholds, false_accepts.astype(np.int64), false_rejects.astype(np.int64), spoof.size, bonafide.size)
