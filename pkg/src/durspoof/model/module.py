"""Parameter containers shared by the model layers."""

from __future__ import annotations

from typing import Any, Dict, Iterator, Literal, Tuple

import numpy as np

from durspoof.autograd import ops
from durspoof.autograd.ops import RunningStats
from durspoof.autograd.tensor import Tensor

Mode = Literal["train", "eval"]


def lecun_normal(
    rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, dtype: Any
) -> np.ndarray:
    """Draw weights with std ``1/sqrt(fan_in)`` (suits SeLU networks)."""
    return (rng.standard_normal(shape) / np.sqrt(fan_in)).astype(dtype)


class Module:
    """Owns named parameters, batch-norm statistics and child modules."""

    def __init__(self) -> None:
        """Start with no parameters, statistics or children."""
        self._params: Dict[str, Tensor] = {}
        self._stats: Dict[str, RunningStats] = {}
        self._children: Dict[str, Module] = {}

    def add_parameter(self, name: str, data: np.ndarray) -> Tensor:
        tensor = Tensor(data, requires_grad=True, dtype=data.dtype, name=name)
        self._params[name] = tensor
        return tensor

    def add_stats(self, name: str, stats: RunningStats) -> RunningStats:
        self._stats[name] = stats
        return stats

    def add_module(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._params.items():
            yield f"{prefix}{name}", tensor
        for child_name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def named_stats(self, prefix: str = "") -> Iterator[Tuple[str, RunningStats]]:
        for name, stats in self._stats.items():
            yield f"{prefix}{name}", stats
        for child_name, child in self._children.items():
            yield from child.named_stats(f"{prefix}{child_name}.")

    def parameters(self) -> Dict[str, Tensor]:
        return dict(self.named_parameters())

    def num_parameters(self) -> int:
        return sum(t.size for _, t in self.named_parameters())


class ConvBN(Module):
    """Bias-free ``k×k`` convolution (same padding) followed by batch norm."""

    def __init__(
        self,
        rng: np.random.Generator,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        dtype: Any = np.float32,
    ) -> None:
        """Initialize the kernel, ``gamma = 1``, ``beta = 0`` and fresh statistics."""
        super().__init__()
        self.padding = kernel_size // 2
        fan_in = in_channels * kernel_size * kernel_size
        self.kernel = self.add_parameter(
            "kernel",
            lecun_normal(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in, dtype),
        )
        self.gamma = self.add_parameter("gamma", np.ones(out_channels, dtype=dtype))
        self.beta = self.add_parameter("beta", np.zeros(out_channels, dtype=dtype))
        self.stats = self.add_stats("bn", RunningStats.initial(out_channels, dtype))

    def __call__(self, x: Tensor, mode: Mode) -> Tensor:
        y = ops.conv2d(x, self.kernel, stride=1, padding=self.padding)
        return ops.batch_norm(y, self.gamma, self.beta, self.stats, mode=mode)


class Conv1x1(Module):
    """Bias-free pointwise convolution, used for projected skip paths."""

    def __init__(
        self,
        rng: np.random.Generator,
        in_channels: int,
        out_channels: int,
        dtype: Any = np.float32,
    ) -> None:
        """Initialize the ``[out, in, 1, 1]`` kernel."""
        super().__init__()
        self.kernel = self.add_parameter(
            "kernel", lecun_normal(rng, (out_channels, in_channels, 1, 1), in_channels, dtype)
        )

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.kernel)
