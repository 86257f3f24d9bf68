"""Encoder building blocks: residual, Res2Net and squeeze-excitation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from durspoof.autograd import ops
from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, DimensionError
from durspoof.model.module import Conv1x1, ConvBN, Mode, Module, lecun_normal

DEFAULT_POOL = (1, 2)


@dataclass
class SELayerConfig:
    """Squeeze-excitation gate over ``channels`` with reduction ratio ``reduction``."""

    channels: int
    reduction: int = field(default=8, metadata={"description": "Bottleneck reduction ratio r"})

    @property
    def bottleneck(self) -> int:
        return max(1, self.channels // self.reduction)

    def validate(self) -> None:
        if self.channels < 1 or self.reduction < 1:
            raise ConfigurationError(
                f"SE layer needs channels >= 1 and reduction >= 1, got {self.channels}, {self.reduction}"
            )


@dataclass
class Res2NetBlockConfig:
    """Shape of one Res2Net block.

    The internal representation has ``scale · width`` channels split into
    ``scale`` groups of ``width`` channels each.
    """

    in_channels: int
    out_channels: int
    scale: int = field(default=8, metadata={"description": "Number of channel groups s"})
    width: int = field(default=14, metadata={"description": "Channels per group w"})
    se_reduction: int = field(default=8, metadata={"description": "SE reduction ratio r"})
    pool: Tuple[int, int] = DEFAULT_POOL

    @property
    def internal_channels(self) -> int:
        return self.scale * self.width

    def validate(self) -> None:
        if self.scale < 1 or self.width < 1:
            raise ConfigurationError(
                f"Res2Net block needs scale >= 1 and width >= 1, got s={self.scale}, w={self.width}"
            )
        if self.in_channels < 1 or self.out_channels < 1:
            raise ConfigurationError(
                f"Res2Net block channels must be positive, got {self.in_channels} -> {self.out_channels}"
            )
        SELayerConfig(self.out_channels, self.se_reduction).validate()


class SELayer(Module):
    """Channel gate ``x ⊙ σ(W2·ReLU(W1·avgpool(x) + b1) + b2)``."""

    def __init__(self, rng: np.random.Generator, config: SELayerConfig, dtype: Any = np.float32) -> None:
        """Create the squeeze and excitation projections."""
        super().__init__()
        config.validate()
        self.config = config
        c, b = config.channels, config.bottleneck
        self.squeeze_weight = self.add_parameter("squeeze_weight", lecun_normal(rng, (b, c), c, dtype))
        self.squeeze_bias = self.add_parameter("squeeze_bias", np.zeros(b, dtype=dtype))
        self.excite_weight = self.add_parameter("excite_weight", lecun_normal(rng, (c, b), b, dtype))
        self.excite_bias = self.add_parameter("excite_bias", np.zeros(c, dtype=dtype))

    def gates(self, x: Tensor) -> Tensor:
        """Per-sample channel gates ``[N, C]`` in ``(0, 1)``."""
        if x.ndim != 4 or x.shape[1] != self.config.channels:
            raise DimensionError("se_gates", x.shape, (self.config.channels,), detail="channel count")
        pooled = ops.mean(x, axis=(2, 3))
        hidden = ops.relu(ops.linear(pooled, self.squeeze_weight, self.squeeze_bias))
        return ops.sigmoid(ops.linear(hidden, self.excite_weight, self.excite_bias))

    def __call__(self, x: Tensor) -> Tensor:
        gate = self.gates(x)
        return x * ops.reshape(gate, (x.shape[0], x.shape[1], 1, 1))


class ResidualBlock(Module):
    """Two 3×3 conv-BN stages with an identity or 1×1-projected skip."""

    def __init__(
        self,
        rng: np.random.Generator,
        in_channels: int,
        out_channels: int,
        pool: Tuple[int, int] = DEFAULT_POOL,
        dtype: Any = np.float32,
    ) -> None:
        """Create both convolution stages and the skip projection if needed."""
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.pool = pool
        self.conv1 = self.add_module("conv1", ConvBN(rng, in_channels, out_channels, 3, dtype))
        self.conv2 = self.add_module("conv2", ConvBN(rng, out_channels, out_channels, 3, dtype))
        self.skip: Optional[Conv1x1] = None
        if in_channels != out_channels:
            self.skip = self.add_module("skip", Conv1x1(rng, in_channels, out_channels, dtype))

    def __call__(self, x: Tensor, mode: Mode) -> Tensor:
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise DimensionError("residual_block", x.shape, (self.in_channels,), detail="channel count")
        h = ops.selu(self.conv1(x, mode))
        h = self.conv2(h, mode)
        shortcut = self.skip(x) if self.skip is not None else x
        return ops.max_pool2d(ops.selu(h + shortcut), self.pool)


class Res2NetBlock(Module):
    """Res2Net bottleneck with hierarchical group connections and an SE gate.

    The block runs: 1×1 conv-BN-SeLU to ``s·w`` channels, split into
    ``s`` groups, hierarchical 3×3 conv-BN-SeLU over groups 2..s
    (``y1 = x1``, ``y2 = K2(x2)``, ``yi = Ki(xi + y(i-1))``), concatenation,
    1×1 conv-BN back to ``out_channels``, SE gating, skip addition, SeLU
    and max-pooling.
    """

    def __init__(
        self,
        rng: np.random.Generator,
        config: Res2NetBlockConfig,
        dtype: Any = np.float32,
    ) -> None:
        """Create the entry, group, exit, SE and skip layers."""
        super().__init__()
        config.validate()
        self.config = config
        inner = config.internal_channels
        self.entry = self.add_module("entry", ConvBN(rng, config.in_channels, inner, 1, dtype))
        self.group_convs: List[ConvBN] = [
            self.add_module(f"group{i}", ConvBN(rng, config.width, config.width, 3, dtype))
            for i in range(2, config.scale + 1)
        ]
        self.exit = self.add_module("exit", ConvBN(rng, inner, config.out_channels, 1, dtype))
        self.se = self.add_module(
            "se", SELayer(rng, SELayerConfig(config.out_channels, config.se_reduction), dtype)
        )
        self.skip: Optional[Conv1x1] = None
        if config.in_channels != config.out_channels:
            self.skip = self.add_module("skip", Conv1x1(rng, config.in_channels, config.out_channels, dtype))

    def hierarchical(self, groups: List[Tensor], mode: Mode) -> List[Tensor]:
        """Apply the hierarchical group connections to split groups ``x1..xs``.

        Output group ``yi`` depends only on input groups ``x1..xi``.
        """
        if len(groups) != self.config.scale:
            raise ConfigurationError(
                f"expected {self.config.scale} groups at the split point, got {len(groups)}"
            )
        outputs = [groups[0]]
        previous: Optional[Tensor] = None
        for conv, group in zip(self.group_convs, groups[1:]):
            inp = group if previous is None else group + previous
            previous = ops.selu(conv(inp, mode))
            outputs.append(previous)
        return outputs

    def pre_merge_groups(self, x: Tensor, mode: Mode) -> List[Tensor]:
        """Run the entry projection and split; return ``y1..ys`` before concatenation."""
        h = ops.selu(self.entry(x, mode))
        if h.shape[1] != self.config.internal_channels:
            raise ConfigurationError(
                f"split point has {h.shape[1]} channels, expected s·w = {self.config.internal_channels}"
            )
        return self.hierarchical(ops.split(h, self.config.scale, axis=1), mode)

    def __call__(self, x: Tensor, mode: Mode) -> Tensor:
        if x.ndim != 4 or x.shape[1] != self.config.in_channels:
            raise DimensionError("res2net_block", x.shape, (self.config.in_channels,), detail="channel count")
        groups = self.pre_merge_groups(x, mode)
        merged = groups[0] if len(groups) == 1 else ops.concat(groups, axis=1)
        h = self.se(self.exit(merged, mode))
        shortcut = self.skip(x) if self.skip is not None else x
        return ops.max_pool2d(ops.selu(h + shortcut), self.config.pool)


def res2net_forward(x: Tensor, block: Res2NetBlock, mode: Mode = "train") -> Tensor:
    return block(x, mode)


def residual_forward(x: Tensor, block: ResidualBlock, mode: Mode = "train") -> Tensor:
    return block(x, mode)


def se_forward(x: Tensor, layer: SELayer) -> Tensor:
    return layer(x)


def se_parameter_count(config: SELayerConfig) -> int:
    c, b = config.channels, config.bottleneck
    return b * c + b + c * b + c


def res2net_parameter_count(config: Res2NetBlockConfig) -> int:
    """Closed-form parameter count of a :class:`Res2NetBlock` (BN counts gamma and beta)."""
    cin, cout = config.in_channels, config.out_channels
    inner, w = config.internal_channels, config.width
    entry = cin * inner + 2 * inner
    groups = (config.scale - 1) * (9 * w * w + 2 * w)
    exit_ = inner * cout + 2 * cout
    skip = cin * cout if cin != cout else 0
    return entry + groups + exit_ + se_parameter_count(SELayerConfig(cout, config.se_reduction)) + skip


def residual_parameter_count(in_channels: int, out_channels: int) -> int:
    """Closed-form parameter count of a :class:`ResidualBlock`."""
    cin, cout = in_channels, out_channels
    skip = cin * cout if cin != cout else 0
    return 9 * cin * cout + 2 * cout + 9 * cout * cout + 2 * cout + skip
