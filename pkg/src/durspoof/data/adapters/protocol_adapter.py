"""Protocol-driven corpus adapter."""

from __future__ import annotations

from pathlib import Path
from typing import List, Union

from joblib import Parallel, delayed

from durspoof.data.adapters.base import CorpusSource, DataSource
from durspoof.data.audio import load_wav
from durspoof.data.protocol import parse_protocol
from durspoof.data.records import ProtocolEntry, Utterance
from durspoof.errors import InputError


class ProtocolCorpusAdapter(DataSource):
    """Corpus described by a protocol file, audio at ``<audio_root>/<utterance_id>.wav``."""

    def __init__(self, protocol_path: Union[str, Path], audio_root: Union[str, Path], tag: str = ""):
        """Initialize the adapter.

        Args:
            protocol_path: Five-field protocol file
            audio_root: Directory holding the WAV files
            tag: Dataset name (defaults to the audio folder name)
        """
        super().__init__(CorpusSource("protocol", Path(audio_root), Path(protocol_path), tag))
        self.protocol_path = Path(protocol_path)
        self.audio_root = Path(audio_root)
        self._entries: List[ProtocolEntry] = []

    @property
    def entries(self) -> List[ProtocolEntry]:
        if not self._entries:
            if not self.protocol_path.is_file():
                raise InputError(f"protocol file not found: {self.protocol_path}")
            self._entries = parse_protocol(self.protocol_path)
        return self._entries

    def validate(self) -> bool:
        if not self.audio_root.is_dir():
            raise InputError(f"audio root is not a directory: {self.audio_root}")
        missing = [p for p in self.paths() if not p.is_file()]
        if missing:
            raise InputError(f"{len(missing)} audio files listed in {self.protocol_path} are missing, e.g. {missing[0]}")
        return True

    def paths(self) -> List[Path]:
        return [self.audio_root / f"{e.utterance_id}.wav" for e in self.entries]

    def load(self, n_jobs: int = 1) -> List[Utterance]:
        self.validate()
        return Parallel(n_jobs=n_jobs)(
            delayed(load_wav)(path, entry.key, entry.utterance_id)
            for path, entry in zip(self.paths(), self.entries)
        )
