"""Corpus adapters for loading utterances from protocols or directories."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from durspoof.data.adapters.base import CorpusSource, DataSource
from durspoof.data.adapters.directory_adapter import DirectoryCorpusAdapter
from durspoof.data.adapters.protocol_adapter import ProtocolCorpusAdapter
from durspoof.errors import ConfigurationError


def create_adapter(
    source: Union[str, Path],
    protocol: Optional[Union[str, Path]] = None,
    source_type: Optional[str] = None,
    tag: str = "",
) -> DataSource:
    """Factory function to create the appropriate adapter for a corpus.

    A protocol file selects :class:`ProtocolCorpusAdapter` with ``source``
    as the audio root; otherwise ``source`` is scanned as a directory.

    Args:
        source: Audio root or directory of WAV files
        protocol: Optional protocol file
        source_type: Force ``protocol`` or ``directory`` (default: auto)
        tag: Dataset name; defaults to the audio folder name

    Returns:
        DataSource: Adapter instance

    Raises:
        ConfigurationError: If the type is unknown or a protocol adapter has no protocol
    """
    if source_type is None or source_type == "auto":
        source_type = "protocol" if protocol is not None else "directory"

    if source_type == "protocol":
        if protocol is None:
            raise ConfigurationError("a protocol file is required for the protocol adapter")
        return ProtocolCorpusAdapter(protocol, source, tag)
    elif source_type == "directory":
        return DirectoryCorpusAdapter(source, tag)
    else:
        raise ConfigurationError(
            f"Unsupported source type: {source_type}. Supported types: protocol, directory"
        )


__all__ = [
    "CorpusSource",
    "DataSource",
    "DirectoryCorpusAdapter",
    "ProtocolCorpusAdapter",
    "create_adapter",
]
