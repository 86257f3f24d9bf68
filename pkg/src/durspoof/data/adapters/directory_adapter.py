"""Unlabeled directory-of-WAVs adapter."""

from __future__ import annotations

from pathlib import Path
from typing import List, Union

from joblib import Parallel, delayed

from durspoof.data.adapters.base import CorpusSource, DataSource
from durspoof.data.audio import load_wav
from durspoof.data.records import Utterance
from durspoof.errors import InputError


class DirectoryCorpusAdapter(DataSource):
    """Every ``*.wav`` directly inside a directory, sorted by name, label ``unknown``."""

    def __init__(self, directory: Union[str, Path], tag: str = ""):
        """Initialize the adapter.

        Args:
            directory: Directory to scan (not recursive)
            tag: Dataset name (defaults to the folder name)
        """
        super().__init__(CorpusSource("directory", Path(directory), tag=tag))
        self.directory = Path(directory)

    def validate(self) -> bool:
        if not self.directory.is_dir():
            raise InputError(f"not a directory: {self.directory}")
        return True

    def paths(self) -> List[Path]:
        self.validate()
        return sorted(self.directory.glob("*.wav"))

    def load(self, n_jobs: int = 1) -> List[Utterance]:
        return Parallel(n_jobs=n_jobs)(delayed(load_wav)(path) for path in self.paths())
