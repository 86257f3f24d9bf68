"""Synthetic bonafide/spoof corpus.

Bonafide utterances are harmonic "vowels": eight harmonics of an f0 drawn
from 90–250 Hz with slow vibrato, syllable-rate amplitude modulation and a
little white noise. Spoof utterances come from the same generator with three
artifacts layered on top:

* phase discontinuities: the harmonic phase jumps by a random offset in
  ``[π/2, π]`` every ``phase_jump_interval`` seconds;
* a spectral notch at ``notch_hz`` (second-order IIR, quality ``notch_q``);
* amplitude quantization to ``quant_bits`` bits.

Each utterance is generated from its own ``default_rng([seed, split, index])``
stream, so the corpus is identical regardless of worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from scipy.signal import iirnotch, lfilter

from durspoof.data.audio import write_wav
from durspoof.data.protocol import write_protocol
from durspoof.data.records import SAMPLE_RATE, ProtocolEntry
from durspoof.errors import ConfigurationError
from durspoof.utils import build_dataclass, load_yaml

NUM_HARMONICS = 8
F0_RANGE = (90.0, 250.0)
MIN_DURATION = 0.05
PEAK = 0.5


@dataclass
class SplitSpec:
    bonafide: int = 0
    spoof: int = 0

    @property
    def total(self) -> int:
        return self.bonafide + self.spoof


@dataclass
class DurationSpec:
    """Duration distribution in seconds.

    ``uniform`` draws from ``[min, max]``; ``lognormal`` draws
    ``exp(N(log(median), sigma))`` clipped to ``[min, max]``; ``choices``
    picks from ``choices`` with optional ``weights``.
    """

    distribution: Literal["uniform", "lognormal", "choices"] = "uniform"
    min: float = 0.5
    max: float = 8.0
    median: float = 3.0
    sigma: float = 0.5
    choices: List[float] = field(default_factory=list)
    weights: Optional[List[float]] = None

    def validate(self) -> None:
        if self.distribution not in ("uniform", "lognormal", "choices"):
            raise ConfigurationError(f"unknown duration distribution {self.distribution!r}")
        if self.distribution == "choices":
            if not self.choices or min(self.choices) < MIN_DURATION:
                raise ConfigurationError(f"duration choices must be non-empty and >= {MIN_DURATION}s, got {self.choices}")
            if self.weights is not None and (
                len(self.weights) != len(self.choices) or min(self.weights) < 0 or sum(self.weights) <= 0
            ):
                raise ConfigurationError(f"duration weights must match choices and be non-negative, got {self.weights}")
        elif not MIN_DURATION <= self.min <= self.max:
            raise ConfigurationError(
                f"duration range must satisfy {MIN_DURATION} <= min <= max, got [{self.min}, {self.max}]"
            )
        if self.distribution == "lognormal" and (self.median <= 0 or self.sigma <= 0):
            raise ConfigurationError(f"lognormal needs median > 0 and sigma > 0, got {self.median}, {self.sigma}")

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> Union[float, np.ndarray]:
        if self.distribution == "uniform":
            return rng.uniform(self.min, self.max, size)
        if self.distribution == "lognormal":
            return np.clip(np.exp(rng.normal(np.log(self.median), self.sigma, size)), self.min, self.max)
        p = None if self.weights is None else np.asarray(self.weights, dtype=float) / sum(self.weights)
        return rng.choice(np.asarray(self.choices, dtype=float), size=size, p=p)


@dataclass
class ArtifactSpec:
    phase_jump_interval: float = field(default=0.25, metadata={"description": "Seconds between phase jumps"})
    notch_hz: float = field(default=1200.0, metadata={"description": "Centre of the spectral notch"})
    notch_q: float = field(default=2.0, metadata={"description": "Quality factor of the notch"})
    quant_bits: int = field(default=6, metadata={"description": "Amplitude resolution of spoofs"})
    noise_level: float = field(default=0.01, metadata={"description": "White-noise std for both classes"})

    def validate(self) -> None:
        if self.phase_jump_interval <= 0:
            raise ConfigurationError(f"phase_jump_interval must be positive, got {self.phase_jump_interval}")
        if not 0 < self.notch_hz < SAMPLE_RATE / 2 or self.notch_q <= 0:
            raise ConfigurationError(f"notch must lie in (0, {SAMPLE_RATE // 2}) Hz with q > 0")
        if not 2 <= self.quant_bits <= 16:
            raise ConfigurationError(f"quant_bits must lie in [2, 16], got {self.quant_bits}")
        if self.noise_level < 0:
            raise ConfigurationError(f"noise_level must be non-negative, got {self.noise_level}")


def _default_splits() -> Dict[str, SplitSpec]:
    return {
        "train": SplitSpec(bonafide=1000, spoof=1000),
        "dev": SplitSpec(bonafide=250, spoof=250),
        "eval": SplitSpec(bonafide=250, spoof=250),
    }


@dataclass(kw_only=True)
class SynthSpec:
    """Full description of a synthetic corpus."""

    splits: Dict[str, SplitSpec] = field(default_factory=_default_splits)
    durations: DurationSpec = field(default_factory=DurationSpec)
    artifacts: ArtifactSpec = field(default_factory=ArtifactSpec)
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self) -> None:
        self.splits = {
            name: build_dataclass(SplitSpec, value, f"splits.{name}.") if isinstance(value, Mapping) else value
            for name, value in self.splits.items()
        }

    def validate(self) -> None:
        if self.sample_rate != SAMPLE_RATE:
            raise ConfigurationError(f"synthetic corpora are generated at {SAMPLE_RATE} Hz, got {self.sample_rate}")
        if not self.splits:
            raise ConfigurationError("synthetic spec defines no splits")
        for name, split in self.splits.items():
            if split.bonafide < 0 or split.spoof < 0 or split.total == 0:
                raise ConfigurationError(f"split {name!r} needs non-negative counts and at least one utterance")
        self.durations.validate()
        self.artifacts.validate()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SynthSpec":
        spec = build_dataclass(cls, data)
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SynthSpec":
        return cls.from_dict(load_yaml(path))


def _harmonic_phase(n: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n) / SAMPLE_RATE
    f0 = rng.uniform(*F0_RANGE)
    vibrato = 1.0 + rng.uniform(0.01, 0.04) * np.sin(2 * np.pi * rng.uniform(4.0, 7.0) * t)
    return 2 * np.pi * np.cumsum(f0 * vibrato) / SAMPLE_RATE


def _voice(phase: np.ndarray, rng: np.random.Generator, noise_level: float) -> np.ndarray:
    n = phase.shape[0]
    t = np.arange(n) / SAMPLE_RATE
    amps = rng.uniform(0.5, 1.0, NUM_HARMONICS) / np.arange(1, NUM_HARMONICS + 1)
    offsets = rng.uniform(0, 2 * np.pi, NUM_HARMONICS)
    harmonics = np.arange(1, NUM_HARMONICS + 1)[:, None]
    signal = (amps[:, None] * np.sin(harmonics * phase[None, :] + offsets[:, None])).sum(axis=0)
    syllable = 0.6 + 0.4 * np.sin(2 * np.pi * rng.uniform(3.0, 6.0) * t + rng.uniform(0, 2 * np.pi))
    signal = signal * syllable
    signal = PEAK * signal / max(np.max(np.abs(signal)), 1e-9)
    return signal + noise_level * rng.standard_normal(n)


def bonafide_waveform(n_samples: int, rng: np.random.Generator, artifacts: Optional[ArtifactSpec] = None) -> np.ndarray:
    artifacts = artifacts or ArtifactSpec()
    return _voice(_harmonic_phase(n_samples, rng), rng, artifacts.noise_level)


def spoof_waveform(n_samples: int, rng: np.random.Generator, artifacts: Optional[ArtifactSpec] = None) -> np.ndarray:
    """Bonafide-style voice with phase jumps, a spectral notch and coarse quantization."""
    artifacts = artifacts or ArtifactSpec()
    phase = _harmonic_phase(n_samples, rng)
    interval = max(int(round(artifacts.phase_jump_interval * SAMPLE_RATE)), 1)
    segments = np.arange(n_samples) // interval
    jumps = rng.uniform(np.pi / 2, np.pi, segments[-1] + 1)
    phase = phase + np.cumsum(jumps)[segments] - jumps[0]
    voice = _voice(phase, rng, artifacts.noise_level)
    b, a = iirnotch(artifacts.notch_hz, artifacts.notch_q, fs=SAMPLE_RATE)
    voice = lfilter(b, a, voice)
    levels = 2 ** (artifacts.quant_bits - 1)
    return np.clip(np.round(voice * levels) / levels, -1.0, 1.0 - 1.0 / levels)


def sample_durations(spec: SynthSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    return np.asarray(spec.durations.sample(rng, size), dtype=float)


@dataclass
class SynthCorpus:
    """Where a generated corpus landed."""

    root: Path
    protocols: Dict[str, Path]
    counts: Dict[str, Tuple[int, int]]


def _render(
    path: Path, label: str, duration: float, seed_key: List[int], artifacts: ArtifactSpec
) -> None:
    rng = np.random.default_rng(seed_key)
    n = max(int(round(duration * SAMPLE_RATE)), 1)
    wave = spoof_waveform(n, rng, artifacts) if label == "spoof" else bonafide_waveform(n, rng, artifacts)
    write_wav(path, wave)


def synth_dataset_generate(
    spec: SynthSpec,
    out_dir: Union[str, Path],
    seed: int,
    n_jobs: int = 1,
) -> SynthCorpus:
    """Write ``<out>/<split>/<utt_id>.wav`` files and ``<out>/<split>.protocol.txt``.

    Args:
        spec: Validated corpus description.
        out_dir: Root directory, created if needed.
        seed: Master seed; the corpus is a pure function of ``(spec, seed)``.
        n_jobs: joblib workers used to render and write the audio.
    """
    spec.validate()
    root = Path(out_dir)
    protocols: Dict[str, Path] = {}
    counts: Dict[str, Tuple[int, int]] = {}
    for split_index, (name, split) in enumerate(spec.splits.items()):
        rng = np.random.default_rng([seed, split_index])
        labels = np.array(["bonafide"] * split.bonafide + ["spoof"] * split.spoof)
        labels = labels[rng.permutation(len(labels))]
        durations = sample_durations(spec, rng, len(labels))
        entries = []
        jobs = []
        for i, (label, duration) in enumerate(zip(labels, durations)):
            utt_id = f"{name}_{i:06d}"
            entries.append(
                ProtocolEntry(
                    speaker_id=f"SYN{i % 20:02d}",
                    utterance_id=utt_id,
                    system_id="-" if label == "bonafide" else "S01",
                    key=str(label),  # type: ignore[arg-type]
                )
            )
            jobs.append(
                delayed(_render)(root / name / f"{utt_id}.wav", str(label), float(duration), [seed, split_index, i], spec.artifacts)
            )
        Parallel(n_jobs=n_jobs)(jobs)
        protocols[name] = write_protocol(root / f"{name}.protocol.txt", entries)
        counts[name] = (split.bonafide, split.spoof)
    return SynthCorpus(root=root, protocols=protocols, counts=counts)
