"""Fixed-length and dynamic-chunk-size (DCS) batching."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Literal, Optional, Sequence

import numpy as np

from durspoof.data.records import SAMPLE_RATE, Batch, Utterance
from durspoof.errors import ConfigurationError, InputError

FIXED_LEN = 64600
DCS_MIN = 16000
DCS_MAX = 96000
BATCH_SIZE = 16

PadMode = Literal["repeat", "zero"]
CropMode = Literal["head", "random"]


@dataclass
class ChunkPolicy:
    """How many samples each training row gets.

    ``fixed`` gives every batch ``fixed_len`` samples; ``dcs`` draws one
    chunk size per batch uniformly from the inclusive range
    ``[n_min, n_max]``.
    """

    mode: Literal["fixed", "dcs"] = field(default="fixed", metadata={"description": "fixed or dcs"})
    fixed_len: int = field(default=FIXED_LEN, metadata={"description": "Samples per row in fixed mode"})
    n_min: int = field(default=DCS_MIN, metadata={"description": "Smallest DCS chunk (samples)"})
    n_max: int = field(default=DCS_MAX, metadata={"description": "Largest DCS chunk (samples)"})
    pad_mode: PadMode = field(default="repeat", metadata={"description": "repeat or zero padding"})
    crop: CropMode = field(default="head", metadata={"description": "head or seeded random crop"})

    def validate(self) -> None:
        if self.mode not in ("fixed", "dcs"):
            raise ConfigurationError(f"chunk mode must be 'fixed' or 'dcs', got {self.mode!r}")
        if self.fixed_len <= 0:
            raise ConfigurationError(f"fixed_len must be positive, got {self.fixed_len}")
        if not 0 < self.n_min <= self.n_max:
            raise ConfigurationError(f"DCS range must satisfy 0 < n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if self.pad_mode not in ("repeat", "zero"):
            raise ConfigurationError(f"pad_mode must be 'repeat' or 'zero', got {self.pad_mode!r}")
        if self.crop not in ("head", "random"):
            raise ConfigurationError(f"crop must be 'head' or 'random', got {self.crop!r}")


def fix_length(
    samples: np.ndarray,
    n: int,
    pad_mode: PadMode = "repeat",
    crop: CropMode = "head",
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Return exactly ``n`` samples.

    Longer inputs are cropped (the head by default); shorter inputs are
    repeated cyclically and truncated, or zero-padded with ``pad_mode="zero"``.

    Raises:
        InputError: If ``samples`` is empty.
        ConfigurationError: If ``n <= 0`` or a random crop has no generator.
    """
    samples = np.asarray(samples)
    if n <= 0:
        raise ConfigurationError(f"target length must be positive, got {n}")
    if samples.size == 0:
        raise InputError("cannot fix the length of an empty waveform")
    length = samples.shape[0]
    if length >= n:
        start = 0
        if crop == "random" and length > n:
            if rng is None:
                raise ConfigurationError("random crop needs a seeded generator")
            start = int(rng.integers(0, length - n + 1))
        return samples[start : start + n].copy()
    if pad_mode == "zero":
        out = np.zeros(n, dtype=samples.dtype)
        out[:length] = samples
        return out
    return np.resize(samples, n)


def dcs_sample_chunk_size(policy: ChunkPolicy, rng: np.random.Generator) -> int:
    """Draw one chunk size uniformly from ``[n_min, n_max]`` inclusive."""
    if policy.mode != "dcs":
        raise ConfigurationError(f"chunk size draws need mode 'dcs', policy is {policy.mode!r}")
    return int(rng.integers(policy.n_min, policy.n_max + 1))


def chunk_size_for_batch(policy: ChunkPolicy, seed: int, batch_index: int) -> int:
    """Chunk size of global batch ``batch_index``; a pure function of ``(seed, batch_index)``."""
    if policy.mode == "fixed":
        return policy.fixed_len
    return dcs_sample_chunk_size(policy, np.random.default_rng([seed, batch_index]))


def make_batch(
    utterances: Sequence[Utterance],
    policy: ChunkPolicy,
    rng: np.random.Generator,
    chunk_size: Optional[int] = None,
) -> Batch:
    """Assemble one batch, every row fixed to the same length.

    Args:
        utterances: Labeled utterances.
        policy: Chunk policy; ``dcs`` draws the length from ``rng`` unless
            ``chunk_size`` is given.
        rng: Generator for the DCS draw and random crops.
        chunk_size: Explicit row length, overriding the policy.
    """
    if not utterances:
        raise InputError("make_batch needs at least one utterance")
    if chunk_size is None:
        chunk_size = policy.fixed_len if policy.mode == "fixed" else dcs_sample_chunk_size(policy, rng)
    rows = [fix_length(u.samples, chunk_size, policy.pad_mode, policy.crop, rng) for u in utterances]
    return Batch(
        samples=np.stack(rows).astype(np.float32),
        labels=np.array([u.class_id for u in utterances], dtype=np.int64),
        durations=[u.duration for u in utterances],
        chunk_size=chunk_size,
        ids=[u.id for u in utterances],
        sample_rate=SAMPLE_RATE,
    )


class BatchSampler:
    """Epoch iterator over shuffled batches.

    The order of epoch ``e`` comes from ``default_rng([seed, e])`` and global
    batch ``k`` (counted across epochs) gets its chunk size and crops from
    generators seeded with ``(seed, k)``, so a batch never depends on how
    earlier batches were consumed.
    """

    def __init__(
        self,
        utterances: Sequence[Utterance],
        policy: ChunkPolicy,
        seed: int,
        batch_size: int = BATCH_SIZE,
        drop_last: bool = False,
    ) -> None:
        """Validate the policy and remember the corpus."""
        policy.validate()
        if batch_size < 1:
            raise ConfigurationError(f"batch_size must be positive, got {batch_size}")
        if not utterances:
            raise InputError("cannot sample batches from an empty corpus")
        self.utterances: List[Utterance] = list(utterances)
        self.policy = policy
        self.seed = seed
        self.batch_size = batch_size
        self.drop_last = drop_last

    def __len__(self) -> int:
        n = len(self.utterances)
        return n // self.batch_size if self.drop_last else math.ceil(n / self.batch_size)

    def batch_seed(self, batch_index: int) -> List[int]:
        return [self.seed, batch_index]

    def epoch(self, epoch: int) -> Iterator[Batch]:
        order = np.random.default_rng([self.seed, epoch]).permutation(len(self.utterances))
        per_epoch = len(self)
        for b in range(per_epoch):
            members = [self.utterances[i] for i in order[b * self.batch_size : (b + 1) * self.batch_size]]
            k = epoch * per_epoch + b
            crop_rng = np.random.default_rng([self.seed, k, 1])
            yield make_batch(members, self.policy, crop_rng, chunk_size_for_batch(self.policy, self.seed, k))
