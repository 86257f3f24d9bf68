"""Record types flowing through the data pipeline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np

from durspoof.errors import InputError
from durspoof.losses import BONAFIDE, SPOOF

SAMPLE_RATE = 16000

Label = Literal["bonafide", "spoof", "unknown"]
LABEL_TO_CLASS = {"spoof": SPOOF, "bonafide": BONAFIDE}


@dataclass
class Utterance:
    """One decoded utterance."""

    id: str
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE
    label: Label = "unknown"

    def __post_init__(self) -> None:
        if self.sample_rate != SAMPLE_RATE:
            raise InputError(f"utterance {self.id!r}: sample rate {self.sample_rate} != {SAMPLE_RATE}")
        if self.label not in ("bonafide", "spoof", "unknown"):
            raise InputError(f"utterance {self.id!r}: unknown label {self.label!r}")
        if np.asarray(self.samples).size == 0:
            raise InputError(f"utterance {self.id!r} has no samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def class_id(self) -> int:
        if self.label == "unknown":
            raise InputError(f"utterance {self.id!r} has no bonafide/spoof label")
        return LABEL_TO_CLASS[self.label]


@dataclass
class ProtocolEntry:
    """One line of a protocol file: ``speaker utt_id gender system key``."""

    speaker_id: str
    utterance_id: str
    system_id: str
    key: Label
    gender: str = "-"

    def to_line(self) -> str:
        return f"{self.speaker_id} {self.utterance_id} {self.gender} {self.system_id} {self.key}"


@dataclass
class Batch:
    """Equal-length rows ``[B, N]`` with labels and pre-chunking durations."""

    samples: np.ndarray
    labels: np.ndarray
    durations: List[float]
    chunk_size: int
    ids: Optional[List[str]] = None
    sample_rate: int = SAMPLE_RATE

    @property
    def chunk_duration(self) -> float:
        """Seconds covered by every row, the duration driving the margin schedule."""
        return self.chunk_size / self.sample_rate

    def __len__(self) -> int:
        return int(self.samples.shape[0])
