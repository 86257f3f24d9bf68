"""Base classes for corpus adapters."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional

from durspoof.data.records import Utterance

SourceKind = Literal["protocol", "directory"]


@dataclass(frozen=True)
class CorpusSource:
    """Where a corpus lives on disk.

    Attributes:
        kind: ``protocol`` (labeled, listed by a protocol file) or
            ``directory`` (every WAV in a folder, unlabeled)
        audio_root: Folder holding the WAV files
        protocol: Protocol file for ``protocol`` sources
        tag: Dataset name used in reports and statistics file names
    """

    kind: SourceKind
    audio_root: Path
    protocol: Optional[Path] = None
    tag: str = ""

    @property
    def name(self) -> str:
        return self.tag or self.audio_root.name


class DataSource(ABC):
    """Abstract base class for corpus adapters.

    Adapters expose the WAV paths of a corpus (for header-only statistics)
    and decode them into :class:`Utterance` objects.
    """

    def __init__(self, source: CorpusSource):
        self.source = source

    @property
    def name(self) -> str:
        return self.source.name

    @abstractmethod
    def validate(self) -> bool:
        """Check the source exists and is well formed.

        Raises:
            InputError: If files are missing or malformed
        """

    @abstractmethod
    def paths(self) -> List[Path]:
        """WAV paths in corpus order."""

    @abstractmethod
    def load(self, n_jobs: int = 1) -> List[Utterance]:
        """Decode every utterance, optionally with ``n_jobs`` joblib workers."""
