"""Protocol files: one ``speaker utt_id gender system key`` entry per line."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Union

from durspoof.data.records import ProtocolEntry
from durspoof.errors import ProtocolParseError

KEYS = ("bonafide", "spoof")


def parse_protocol(path: Union[str, Path]) -> List[ProtocolEntry]:
    """Parse a protocol file in file order.

    Blank lines are skipped; every other line must have exactly five
    whitespace-separated fields and a ``bonafide`` or ``spoof`` key.

    Raises:
        ProtocolParseError: With the 1-based number of the first bad line.
    """
    path = Path(path)
    entries: List[ProtocolEntry] = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 5:
                raise ProtocolParseError(str(path), line_number, f"expected 5 fields, found {len(fields)}")
            speaker, utterance_id, gender, system, key = fields
            if key not in KEYS:
                raise ProtocolParseError(str(path), line_number, f"unknown key {key!r} (expected bonafide or spoof)")
            entries.append(
                ProtocolEntry(
                    speaker_id=speaker,
                    utterance_id=utterance_id,
                    system_id=system,
                    key=key,  # type: ignore[arg-type]
                    gender=gender,
                )
            )
    return entries


def write_protocol(path: Union[str, Path], entries: Iterable[ProtocolEntry]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for entry in entries:
            f.write(entry.to_line() + "\n")
    return path
