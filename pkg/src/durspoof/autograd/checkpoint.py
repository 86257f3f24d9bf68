"""Parameter checkpoint container.

Layout (all integers little-endian)::

    offset 0   4 bytes   magic b"DSPK"
    offset 4   uint32    format version (currently 1)
    offset 8   uint32    header length L in bytes
    offset 12  L bytes   UTF-8 JSON header
    offset 12+L          raw array bytes, concatenated in header order

The header is ``{"arrays": [{"name", "shape", "dtype", "offset", "nbytes"}],
"metadata": {...}}`` serialized with sorted keys and no whitespace; array
offsets are relative to the start of the data section and dtypes are numpy
little-endian strings (``<f4``, ``<f8``, ``<i8``). Nothing time-dependent is
stored, so identical parameters and metadata give identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from durspoof.errors import InputError

MAGIC = b"DSPK"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def save_checkpoint(
    path: Union[str, Path],
    arrays: Mapping[str, np.ndarray],
    metadata: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write named arrays and JSON-serializable metadata to ``path``.

    Args:
        path: Destination file; parent directories are created.
        arrays: Arrays by name, written in mapping order.
        metadata: Free-form JSON metadata (config, epoch, losses...).

    Returns:
        The written path.
    """
    entries = []
    chunks = []
    offset = 0
    for name, value in arrays.items():
        array = np.ascontiguousarray(value)
        array = array.astype(array.dtype.newbyteorder("<"), copy=False)
        raw = array.tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(array.shape),
                "dtype": array.dtype.str,
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        chunks.append(raw)
        offset += len(raw)
    header = json.dumps(
        {"arrays": entries, "metadata": dict(metadata or {})},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)))
        f.write(header)
        for raw in chunks:
            f.write(raw)
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """Read a container written by :func:`save_checkpoint`.

    Returns:
        ``(arrays, metadata)`` with arrays in file order.

    Raises:
        InputError: If the file is not a checkpoint or is truncated.
    """
    blob = Path(path).read_bytes()
    if len(blob) < _PREFIX.size:
        raise InputError(f"{path}: too short to be a checkpoint")
    magic, version, header_len = _PREFIX.unpack_from(blob)
    if magic != MAGIC:
        raise InputError(f"{path}: not a checkpoint (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise InputError(f"{path}: unsupported checkpoint version {version}")
    start = _PREFIX.size
    header = json.loads(blob[start : start + header_len].decode("utf-8"))
    data = memoryview(blob)[start + header_len :]

    arrays: Dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        begin, size = entry["offset"], entry["nbytes"]
        if begin + size > len(data):
            raise InputError(f"{path}: truncated data for {entry['name']!r}")
        array = np.frombuffer(data[begin : begin + size], dtype=np.dtype(entry["dtype"]))
        arrays[entry["name"]] = array.reshape(entry["shape"]).copy()
    return arrays, header.get("metadata", {})
