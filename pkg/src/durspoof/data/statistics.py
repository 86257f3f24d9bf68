"""Duration statistics of corpora."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from durspoof.data.audio import wav_duration
from durspoof.errors import ConfigurationError

DEFAULT_EDGES = tuple(float(s) for s in range(0, 11))


def histogram_from_durations(
    durations: Iterable[float], edges: Sequence[float] = DEFAULT_EDGES
) -> pd.DataFrame:
    """Bin durations (seconds) into ``[edge_i, edge_i+1)`` plus a final open bin.

    Returns:
        DataFrame with ``bin_start``, ``bin_end`` and ``count``; the last row
        has ``bin_end = inf``.
    """
    edges = [float(e) for e in edges]
    if len(edges) < 1 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ConfigurationError(f"histogram edges must be strictly increasing, got {edges}")
    values = np.asarray(list(durations), dtype=float)
    bounds = np.array(edges + [np.inf])
    index = np.searchsorted(bounds[:-1], values[values >= edges[0]], side="right") - 1
    counts = np.bincount(index, minlength=len(edges))
    return pd.DataFrame({"bin_start": bounds[:-1], "bin_end": bounds[1:], "count": counts.astype(np.int64)})


def duration_histogram(
    corpus: Union[Iterable[Union[str, Path]], Mapping[str, Iterable[Union[str, Path]]]],
    edges: Sequence[float] = DEFAULT_EDGES,
) -> Union[pd.DataFrame, Dict[str, pd.DataFrame]]:
    """Histogram of WAV durations read from file headers.

    Args:
        corpus: WAV paths, or a mapping ``dataset tag → paths`` to get one
            histogram per dataset.
        edges: Bin edges in seconds; defaults to 1 s bins over 0–10 s.
    """
    if isinstance(corpus, Mapping):
        return {tag: histogram_from_durations((wav_duration(p) for p in paths), edges) for tag, paths in corpus.items()}
    return histogram_from_durations((wav_duration(p) for p in corpus), edges)


def write_histograms(
    histograms: Mapping[str, pd.DataFrame], out_dir: Union[str, Path], prefix: Optional[str] = "durations"
) -> Dict[str, Path]:
    """Write ``<out>/<prefix>_<tag>.csv`` for every dataset."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for tag, frame in histograms.items():
        path = out / (f"{prefix}_{tag}.csv" if prefix else f"{tag}.csv")
        frame.to_csv(path, index=False)
        written[tag] = path
    return written
