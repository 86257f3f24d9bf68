"""EER computation, scoring and the duration-binned evaluation protocol."""

from durspoof.evaluation.eer import EERResult, compute_eer, compute_eer_fast, split_scores
from durspoof.evaluation.scoring import (
    DEFAULT_DURATIONS,
    VARIABLE,
    condition_name,
    evaluate_at_durations,
    read_score_file,
    score_utterance,
    score_utterances,
    write_score_file,
)

__all__ = [
    "DEFAULT_DURATIONS",
    "EERResult",
    "VARIABLE",
    "compute_eer",
    "compute_eer_fast",
    "condition_name",
    "evaluate_at_durations",
    "read_score_file",
    "score_utterance",
    "score_utterances",
    "split_scores",
    "write_score_file",
]
