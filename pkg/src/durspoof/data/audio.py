"""PCM16 mono 16 kHz WAV input and output."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Union

import numpy as np
import soundfile as sf

from durspoof.data.records import SAMPLE_RATE, Label, Utterance
from durspoof.errors import AudioFormatError, InputError

PCM_SCALE = 32768.0


def check_wav_header(path: Union[str, Path]) -> Any:
    """Read the header of ``path`` and insist on RIFF/WAVE PCM16 mono 16 kHz.

    Raises:
        AudioFormatError: Naming the first offending field.
    """
    try:
        info = sf.info(str(path))
    except RuntimeError as exc:
        raise AudioFormatError(str(path), "container", str(exc).splitlines()[0], "WAV") from exc
    if info.format != "WAV":
        raise AudioFormatError(str(path), "container", info.format, "WAV")
    if info.subtype != "PCM_16":
        raise AudioFormatError(str(path), "subtype", info.subtype, "PCM_16")
    if info.channels != 1:
        raise AudioFormatError(str(path), "channels", info.channels, 1)
    if info.samplerate != SAMPLE_RATE:
        raise AudioFormatError(str(path), "sample rate", info.samplerate, SAMPLE_RATE)
    return info


def load_wav(path: Union[str, Path], label: Label = "unknown", utterance_id: str = "") -> Utterance:
    """Decode a WAV file into an :class:`Utterance` with samples in ``[-1, 1)``.

    Args:
        path: WAV file.
        label: Label to attach (from a protocol), ``unknown`` otherwise.
        utterance_id: Id to attach; defaults to the file stem.

    Raises:
        AudioFormatError: If the file is not PCM16 mono 16 kHz WAV.
        InputError: If the file holds no samples.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"audio file not found: {path}")
    check_wav_header(path)
    pcm, _ = sf.read(str(path), dtype="int16", always_2d=False)
    if pcm.size == 0:
        raise InputError(f"{path}: no samples")
    samples = pcm.astype(np.float32) / PCM_SCALE
    return Utterance(id=utterance_id or path.stem, samples=samples, sample_rate=SAMPLE_RATE, label=label)


def write_wav(path: Union[str, Path], samples: np.ndarray) -> Path:
    """Write float samples in ``[-1, 1]`` as PCM16 mono 16 kHz WAV (values are clipped)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.clip(np.round(np.asarray(samples, dtype=np.float64) * PCM_SCALE), -32768, 32767).astype(np.int16)
    sf.write(str(path), pcm, SAMPLE_RATE, subtype="PCM_16", format="WAV")
    return path


def wav_duration(path: Union[str, Path]) -> float:
    """Duration in seconds from the WAV header, without decoding samples."""
    info = check_wav_header(path)
    return info.frames / info.samplerate
