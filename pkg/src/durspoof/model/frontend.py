"""Spectral front-end: fixed log-magnitude spectrogram plus a learned projection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from durspoof.autograd import ops
from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, InputError
from durspoof.model.module import ConvBN, Mode, Module, lecun_normal

SAMPLE_RATE = 16000
LOG_FLOOR = 1e-6


@dataclass
class FrontEndConfig:
    """Spectrogram framing and projection widths."""

    n_fft: int = field(default=512, metadata={"description": "FFT size"})
    win_length: int = field(default=400, metadata={"description": "Hann window length in samples (25 ms)"})
    hop_length: int = field(default=160, metadata={"description": "Frame hop in samples (10 ms)"})
    proj_dim: int = field(default=64, metadata={"description": "Learned projection width per frame"})
    channels: int = field(default=32, metadata={"description": "Stem output channels C0"})

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1

    def validate(self) -> None:
        if self.win_length < 1 or self.hop_length < 1 or self.n_fft < self.win_length:
            raise ConfigurationError(
                f"invalid framing: n_fft={self.n_fft}, win_length={self.win_length}, hop_length={self.hop_length}"
            )
        if self.proj_dim < 1 or self.channels < 1:
            raise ConfigurationError(
                f"proj_dim and channels must be positive, got {self.proj_dim}, {self.channels}"
            )

    def num_frames(self, n_samples: int) -> int:
        """Frames produced for ``n_samples`` (0 when shorter than one window)."""
        if n_samples < self.win_length:
            return 0
        return 1 + (n_samples - self.win_length) // self.hop_length


def log_spectrogram(samples: np.ndarray, config: FrontEndConfig) -> np.ndarray:
    """Log-magnitude spectrogram of a batch of waveforms.

    Args:
        samples: ``[L]`` or ``[N, L]`` float waveform(s).
        config: Framing parameters.

    Returns:
        float64 array ``[N, T, n_fft // 2 + 1]``.

    Raises:
        InputError: If the waveform is empty or shorter than one window.
    """
    batch = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if batch.ndim != 2 or batch.shape[-1] == 0:
        raise InputError(f"front_end expects a non-empty [N, L] waveform, got shape {np.shape(samples)}")
    if config.num_frames(batch.shape[-1]) == 0:
        raise InputError(
            f"waveform of {batch.shape[-1]} samples is shorter than one frame ({config.win_length} samples)"
        )
    window = get_window("hann", config.win_length, fftbins=True)
    frames = sliding_window_view(batch, config.win_length, axis=-1)[:, :: config.hop_length, :]
    spectrum = np.fft.rfft(frames * window, n=config.n_fft, axis=-1)
    return np.log(np.abs(spectrum) + LOG_FLOOR)


class FrontEnd(Module):
    """Spectrogram → per-frame linear projection → 3×3 stem conv-BN-SeLU.

    Output is ``[N, C0, T, proj_dim]`` (time on H, projected frequency on W).
    """

    def __init__(self, rng: np.random.Generator, config: FrontEndConfig, dtype: Any = np.float32) -> None:
        """Create the projection and the stem convolution."""
        super().__init__()
        config.validate()
        self.config = config
        self.dtype = np.dtype(dtype)
        self.proj_weight = self.add_parameter(
            "proj_weight", lecun_normal(rng, (config.proj_dim, config.n_bins), config.n_bins, dtype)
        )
        self.proj_bias = self.add_parameter("proj_bias", np.zeros(config.proj_dim, dtype=dtype))
        self.stem = self.add_module("stem", ConvBN(rng, 1, config.channels, 3, dtype))

    def __call__(self, samples: np.ndarray, mode: Mode) -> Tensor:
        spec = log_spectrogram(samples, self.config)
        n, t, bins = spec.shape
        frames = Tensor(spec.reshape(n * t, bins).astype(self.dtype), dtype=self.dtype)
        projected = ops.linear(frames, self.proj_weight, self.proj_bias)
        image = ops.reshape(projected, (n, 1, t, self.config.proj_dim))
        return ops.selu(self.stem(image, mode))


def front_end(samples: np.ndarray, module: FrontEnd, mode: Mode = "eval") -> Tensor:
    return module(samples, mode)
