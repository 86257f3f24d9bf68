"""Six-block encoder producing a fixed-width utterance embedding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Tuple, Union

import numpy as np

from durspoof.autograd import ops
from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, InputError
from durspoof.model.blocks import (
    DEFAULT_POOL,
    Res2NetBlock,
    Res2NetBlockConfig,
    ResidualBlock,
    res2net_parameter_count,
    residual_parameter_count,
)
from durspoof.model.frontend import FrontEnd, FrontEndConfig
from durspoof.model.module import Mode, Module

NUM_BLOCKS = 6
DEFAULT_CHANNEL_PLAN: List[Tuple[int, int]] = [
    (32, 32),
    (32, 32),
    (32, 64),
    (64, 64),
    (64, 112),
    (112, 112),
]

Variant = Literal["res2net", "residual"]
_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass(kw_only=True)
class EncoderConfig:
    """Encoder architecture.

    With ``variant="res2net"`` block 1 is a plain residual block and the
    remaining blocks are Res2Net blocks with SE gating; ``variant="residual"``
    uses plain residual blocks throughout.
    """

    front_end: FrontEndConfig = field(
        default_factory=FrontEndConfig, metadata={"description": "Spectrogram and projection settings"}
    )
    channels: List[Tuple[int, int]] = field(
        default_factory=lambda: list(DEFAULT_CHANNEL_PLAN),
        metadata={"description": "(in, out) channels per block"},
    )
    scale: int = field(default=8, metadata={"description": "Res2Net scale s"})
    width: int = field(default=14, metadata={"description": "Res2Net group width w"})
    se_reduction: int = field(default=8, metadata={"description": "SE reduction ratio r"})
    variant: Variant = field(default="res2net", metadata={"description": "res2net or residual"})
    first_block_plain: bool = field(
        default=True, metadata={"description": "Keep block 1 a plain residual block"}
    )
    reduced_depth: bool = field(
        default=False, metadata={"description": "Allow fewer than six blocks (verification configs only)"}
    )
    dtype: str = field(default="float32", metadata={"description": "float32 or float64 parameters"})

    def __post_init__(self) -> None:
        self.channels = [tuple(int(c) for c in pair) for pair in self.channels]  # type: ignore[misc]

    @property
    def numpy_dtype(self) -> Any:
        return _DTYPES[self.dtype]

    @property
    def embedding_dim(self) -> int:
        return 2 * self.channels[-1][1]

    def is_res2net_block(self, index: int) -> bool:
        if self.variant == "residual":
            return False
        return not (index == 0 and self.first_block_plain)

    def block_config(self, index: int) -> Res2NetBlockConfig:
        cin, cout = self.channels[index]
        return Res2NetBlockConfig(
            in_channels=cin,
            out_channels=cout,
            scale=self.scale,
            width=self.width,
            se_reduction=self.se_reduction,
        )

    def validate(self) -> None:
        """Check depth, channel chaining and pooling headroom.

        Raises:
            ConfigurationError: On any inconsistency.
        """
        self.front_end.validate()
        if self.variant not in ("res2net", "residual"):
            raise ConfigurationError(f"unknown encoder variant {self.variant!r}")
        if self.dtype not in _DTYPES:
            raise ConfigurationError(f"dtype must be one of {sorted(_DTYPES)}, got {self.dtype!r}")
        n = len(self.channels)
        if n == 0 or (n != NUM_BLOCKS and not self.reduced_depth):
            raise ConfigurationError(f"encoder needs exactly {NUM_BLOCKS} blocks, got {n}")
        if any(len(pair) != 2 for pair in self.channels):
            raise ConfigurationError(f"channel plan entries must be (in, out) pairs, got {self.channels}")
        if self.channels[0][0] != self.front_end.channels:
            raise ConfigurationError(
                f"block 1 expects {self.channels[0][0]} channels but the front-end produces "
                f"{self.front_end.channels}"
            )
        for i in range(1, n):
            if self.channels[i][0] != self.channels[i - 1][1]:
                raise ConfigurationError(
                    f"channel plan mismatch between block {i} (out {self.channels[i - 1][1]}) "
                    f"and block {i + 1} (in {self.channels[i][0]})"
                )
        pool_w = DEFAULT_POOL[1]
        if self.front_end.proj_dim < pool_w**n:
            raise ConfigurationError(
                f"proj_dim={self.front_end.proj_dim} is too small for {n} pooling stages "
                f"(needs >= {pool_w**n})"
            )
        for i in range(n):
            if self.is_res2net_block(i):
                self.block_config(i).validate()


class Encoder(Module):
    """Front-end, six blocks and global average+max pooling."""

    def __init__(self, config: EncoderConfig, seed: int) -> None:
        """Build all layers with weights drawn from ``default_rng(seed)``."""
        super().__init__()
        config.validate()
        self.config = config
        rng = np.random.default_rng(seed)
        dtype = config.numpy_dtype
        self.front_end = self.add_module("front_end", FrontEnd(rng, config.front_end, dtype))
        self.blocks: List[Union[ResidualBlock, Res2NetBlock]] = []
        for i, (cin, cout) in enumerate(config.channels):
            if config.is_res2net_block(i):
                block: Module = Res2NetBlock(rng, config.block_config(i), dtype)
            else:
                block = ResidualBlock(rng, cin, cout, DEFAULT_POOL, dtype)
            self.blocks.append(self.add_module(f"block{i + 1}", block))  # type: ignore[arg-type]

    @property
    def embedding_dim(self) -> int:
        return self.config.embedding_dim

    def feature_map(self, samples: np.ndarray, mode: Mode) -> Tensor:
        """Output of the last block, ``[N, C_last, T, F']``."""
        h = self.front_end(samples, mode)
        for block in self.blocks:
            h = block(h, mode)
        return h

    def __call__(self, samples: np.ndarray, mode: Mode) -> Tensor:
        """Embed a batch of waveforms ``[N, L]`` into ``[N, D]``."""
        h = self.feature_map(samples, mode)
        return ops.concat([ops.mean(h, axis=(2, 3)), ops.amax(h, axis=(2, 3))], axis=1)


def encoder_forward(encoder: Encoder, samples: np.ndarray, mode: Mode = "eval") -> Tensor:
    """Embedding ``f`` of a single utterance, shape ``[D]``."""
    waveform = np.asarray(samples)
    if waveform.ndim != 1:
        raise InputError(f"encoder_forward expects a 1-D waveform, got shape {waveform.shape}")
    return ops.reshape(encoder(waveform[None, :], mode), (encoder.embedding_dim,))


def count_parameters(module: Module) -> int:
    return module.num_parameters()


def encoder_parameter_formula(config: EncoderConfig) -> Dict[str, int]:
    """Hand-derived parameter counts per component of an :class:`Encoder`."""
    fe = config.front_end
    counts = {"front_end": fe.proj_dim * fe.n_bins + fe.proj_dim + 9 * fe.channels + 2 * fe.channels}
    for i, (cin, cout) in enumerate(config.channels):
        if config.is_res2net_block(i):
            counts[f"block{i + 1}"] = res2net_parameter_count(config.block_config(i))
        else:
            counts[f"block{i + 1}"] = residual_parameter_count(cin, cout)
    return counts
