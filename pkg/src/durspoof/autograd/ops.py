"""Differentiable primitives.

Every function takes and returns :class:`Tensor` objects, computes its
forward result with numpy and registers a backward closure through
:func:`durspoof.autograd.tensor.record`. Shapes are checked up front and
mismatches raise :class:`DimensionError` naming both shapes.
"""

from __future__ import annotations

import builtins
from dataclasses import dataclass
from typing import Any, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from durspoof.autograd.tensor import Tensor, record
from durspoof.errors import DimensionError, InputError

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

BN_EPS = 1e-5
BN_MOMENTUM = 0.1

Axis = Union[None, int, Tuple[int, ...]]


def as_tensor(value: Any, like: Optional[Tensor] = None) -> Tensor:
    """Return ``value`` as a Tensor, matching ``like``'s dtype for constants."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value), dtype=dtype)


def _pair(a: Any, b: Any) -> Tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise DimensionError(op, a.shape, b.shape, detail="not broadcastable") from exc


def _normalize_axes(axis: Axis, ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------


def add(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("add", a, b)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return record("add", a.data + b.data, (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("sub", a, b)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return record("sub", a.data - b.data, (a, b), backward)


def mul(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("mul", a, b)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return record("mul", a.data * b.data, (a, b), backward)


def div(a: Any, b: Any) -> Tensor:
    a, b = _pair(a, b)
    _broadcast_shape("div", a, b)
    if np.any(b.data == 0):
        raise InputError("div: division by zero")
    out = a.data / b.data

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * out / b.data, b.shape),
        )

    return record("div", out, (a, b), backward)


def neg(x: Tensor) -> Tensor:
    return record("neg", -x.data, (x,), lambda g: (-g,))


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return record("exp", out, (x,), lambda g: (g * out,))


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise InputError("log: input must be strictly positive")
    return record("log", np.log(x.data), (x,), lambda g: (g / x.data,))


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return record("relu", x.data * mask, (x,), lambda g: (g * mask,))


def sigmoid(x: Tensor) -> Tensor:
    z = x.data
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return record("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),))


def selu(x: Tensor) -> Tensor:
    """Scaled exponential linear unit.

    ``λx`` for ``x > 0`` and ``λα(eˣ − 1)`` otherwise, with the standard
    self-normalizing constants ``SELU_LAMBDA`` and ``SELU_ALPHA``.
    """
    z = x.data
    positive = z > 0
    neg_exp = np.exp(np.minimum(z, 0.0))
    dtype = z.dtype.type
    lam, alpha = dtype(SELU_LAMBDA), dtype(SELU_ALPHA)
    out = lam * np.where(positive, z, alpha * (neg_exp - 1.0))
    slope = lam * np.where(positive, dtype(1.0), alpha * neg_exp)
    return record("selu", out.astype(z.dtype), (x,), lambda g: (g * slope,))


# ---------------------------------------------------------------------------
# Reductions and shape manipulation
# ---------------------------------------------------------------------------


def sum(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    axes = _normalize_axes(axis, x.ndim)
    out = np.sum(x.data, axis=axes, keepdims=keepdims)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", np.asarray(out, dtype=x.dtype), (x,), backward)


def mean(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    return mul(sum(x, axis=axes, keepdims=keepdims), 1.0 / count)


def amax(x: Tensor, axis: Axis = None, keepdims: bool = False) -> Tensor:
    """Maximum over ``axis``; the gradient goes to the first maximal element."""
    axes = _normalize_axes(axis, x.ndim)
    kept = [a for a in range(x.ndim) if a not in axes]
    moved = np.transpose(x.data, kept + list(axes))
    lead = moved.shape[: len(kept)]
    flat = moved.reshape(lead + (-1,))
    index = np.argmax(flat, axis=-1)
    out = np.take_along_axis(flat, index[..., None], axis=-1)[..., 0]
    if keepdims:
        out = np.expand_dims(out, axes)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        if keepdims:
            g = np.squeeze(g, axis=axes)
        grad_flat = np.zeros_like(flat)
        np.put_along_axis(grad_flat, index[..., None], g[..., None], axis=-1)
        grad_moved = grad_flat.reshape(moved.shape)
        return (np.transpose(grad_moved, np.argsort(kept + list(axes))),)

    return record("amax", np.asarray(out, dtype=x.dtype), (x,), backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as exc:
        raise DimensionError("reshape", x.shape, tuple(shape)) from exc
    return record("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return record("transpose", np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),))


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise InputError("concat: no tensors given")
    ref = tensors[0]
    axis = axis % ref.ndim
    for t in tensors[1:]:
        other = [d for i, d in enumerate(t.shape) if i != axis]
        mine = [d for i, d in enumerate(ref.shape) if i != axis]
        if t.ndim != ref.ndim or other != mine:
            raise DimensionError("concat", ref.shape, t.shape, detail=f"axis {axis}")
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        return [
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis)
            for i in range(len(tensors))
        ]

    out = np.concatenate([t.data for t in tensors], axis=axis)
    return record("concat", out, tuple(tensors), backward)


def slice_axis(x: Tensor, start: int, stop: int, axis: int) -> Tensor:
    axis = axis % x.ndim
    if not 0 <= start < stop <= x.shape[axis]:
        raise DimensionError("slice_axis", x.shape, detail=f"[{start}:{stop}] on axis {axis}")
    index = [builtins.slice(None)] * x.ndim
    index[axis] = builtins.slice(start, stop)
    index = tuple(index)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        grad = np.zeros_like(x.data)
        grad[index] = g
        return (grad,)

    return record("slice", x.data[index].copy(), (x,), backward)


def split(x: Tensor, sections: int, axis: int = 1) -> List[Tensor]:
    """Split ``x`` into ``sections`` equal chunks along ``axis``."""
    size = x.shape[axis]
    if sections < 1 or size % sections:
        raise DimensionError(
            "split", x.shape, detail=f"axis {axis} of size {size} not divisible into {sections} groups"
        )
    step = size // sections
    return [slice_axis(x, i * step, (i + 1) * step, axis) for i in range(sections)]


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul", a.shape, b.shape)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return g @ b.data.T, a.data.T @ g

    return record("matmul", a.data @ b.data, (a, b), backward)


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map ``x @ weight.T + bias``.

    Args:
        x: Input of shape ``[N, Din]``.
        weight: Weight of shape ``[Dout, Din]``.
        bias: Optional bias of shape ``[Dout]``.
    """
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise DimensionError("linear", x.shape, weight.shape)
    if bias is not None and bias.shape != (weight.shape[0],):
        raise DimensionError("linear", weight.shape, bias.shape, detail="bias length")
    out = x.data @ weight.data.T
    inputs: Tuple[Tensor, ...] = (x, weight)
    if bias is not None:
        out = out + bias.data
        inputs = (x, weight, bias)

    def backward(g: np.ndarray) -> List[np.ndarray]:
        grads = [g @ weight.data, g.T @ x.data]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return grads

    return record("linear", out, inputs, backward)


def l2_normalize(x: Tensor, axis: int = -1, eps: float = 1e-12) -> Tensor:
    """Scale ``x`` to unit Euclidean norm along ``axis``.

    The norm is floored at ``eps`` so all-zero slices stay zero instead of
    dividing by zero.
    """
    norm = np.sqrt(np.sum(x.data * x.data, axis=axis, keepdims=True))
    denom = np.maximum(norm, eps)
    out = x.data / denom
    active = norm > eps

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        projected = g - out * np.sum(g * out, axis=axis, keepdims=True)
        return (np.where(active, projected, g) / denom,)

    return record("l2_normalize", out, (x,), backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Log-softmax stabilized by max subtraction."""
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    lse = np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))
    out = shifted - lse
    softmax = np.exp(out)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (g - softmax * np.sum(g, axis=axis, keepdims=True),)

    return record("log_softmax", out, (x,), backward)


# ---------------------------------------------------------------------------
# Convolution, pooling, normalization
# ---------------------------------------------------------------------------


def _pair_int(value: Union[int, Sequence[int]], name: str) -> Tuple[int, int]:
    if isinstance(value, int):
        pair = (value, value)
    else:
        pair = tuple(int(v) for v in value)
    if len(pair) != 2:
        raise InputError(f"{name} must be an int or a pair, got {value!r}")
    return pair  # type: ignore[return-value]


def conv2d(
    x: Tensor,
    kernel: Tensor,
    stride: Union[int, Sequence[int]] = 1,
    padding: Union[int, Sequence[int]] = 0,
) -> Tensor:
    """2D cross-correlation without bias.

    Args:
        x: Input ``[N, C, H, W]``.
        kernel: Filters ``[Co, C, kh, kw]``.
        stride: Step between windows, ≥ 1.
        padding: Zero padding added to both sides of H and W.

    Returns:
        ``[N, Co, H', W']`` with ``H' = (H + 2·pad − kh) // stride + 1``.
    """
    if x.ndim != 4 or kernel.ndim != 4 or x.shape[1] != kernel.shape[1]:
        raise DimensionError("conv2d", x.shape, kernel.shape)
    sh, sw = _pair_int(stride, "stride")
    ph, pw = _pair_int(padding, "padding")
    if sh < 1 or sw < 1 or ph < 0 or pw < 0:
        raise InputError(f"conv2d: invalid stride {stride!r} or padding {padding!r}")
    n, c, h, w = x.shape
    co, _, kh, kw = kernel.shape
    if h + 2 * ph < kh or w + 2 * pw < kw:
        raise DimensionError("conv2d", x.shape, kernel.shape, detail="kernel larger than padded input")
    xp = np.pad(x.data, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    ho, wo = windows.shape[2], windows.shape[3]
    out = np.tensordot(windows, kernel.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        grad_kernel = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        grad_padded = np.zeros_like(xp)
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(g, kernel.data[:, :, i, j], axes=([1], [0]))
                grad_padded[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw] += contrib.transpose(0, 3, 1, 2)
        return grad_padded[:, :, ph : ph + h, pw : pw + w], grad_kernel

    return record("conv2d", np.ascontiguousarray(out), (x, kernel), backward)


def max_pool2d(
    x: Tensor,
    window: Union[int, Sequence[int]],
    stride: Optional[Union[int, Sequence[int]]] = None,
) -> Tensor:
    """Max over windows of the two trailing axes of ``[N, C, H, W]``.

    Ties resolve to the first position in a row-major scan of the window,
    and only that position receives gradient.
    """
    if x.ndim != 4:
        raise DimensionError("max_pool2d", x.shape, detail="expected [N, C, H, W]")
    wh, ww = _pair_int(window, "window")
    sh, sw = _pair_int(stride if stride is not None else (wh, ww), "stride")
    n, c, h, w = x.shape
    if wh > h or ww > w:
        raise DimensionError("max_pool2d", x.shape, (wh, ww), detail="window larger than input")
    windows = sliding_window_view(x.data, (wh, ww), axis=(2, 3))[:, :, ::sh, ::sw]
    ho, wo = windows.shape[2], windows.shape[3]
    flat = windows.reshape(n, c, ho, wo, wh * ww)
    index = np.argmax(flat, axis=-1)
    out = np.take_along_axis(flat, index[..., None], axis=-1)[..., 0]

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        di, dj = np.divmod(index, ww)
        nn_, cc, ii, jj = np.indices((n, c, ho, wo), sparse=True)
        rows = ii * sh + di
        cols = jj * sw + dj
        grad = np.zeros_like(x.data)
        np.add.at(grad, (nn_, cc, rows, cols), g)
        return (grad,)

    return record("max_pool2d", np.ascontiguousarray(out), (x,), backward)


@dataclass
class RunningStats:
    """Per-channel running mean and variance of a batch-norm layer."""

    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def initial(cls, channels: int, dtype: Any = np.float32) -> "RunningStats":
        return cls(mean=np.zeros(channels, dtype=dtype), var=np.ones(channels, dtype=dtype))


def batch_norm(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running: RunningStats,
    mode: Literal["train", "eval"] = "train",
    momentum: float = BN_MOMENTUM,
    eps: float = BN_EPS,
) -> Tensor:
    """Batch normalization over every axis except channels (axis 1).

    In ``train`` mode the batch statistics normalize the input and the
    running statistics move towards them by ``momentum`` (the running
    variance uses the unbiased estimate). ``eval`` mode uses the running
    statistics only.
    """
    if x.ndim not in (2, 4):
        raise DimensionError("batch_norm", x.shape, detail="expected [N, C] or [N, C, H, W]")
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise DimensionError("batch_norm", x.shape, gamma.shape, beta.shape, detail="gamma/beta length")
    if running.mean.shape != (channels,):
        raise DimensionError("batch_norm", x.shape, running.mean.shape, detail="running stats")
    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    view = (1, channels) + (1,) * (x.ndim - 2)
    count = x.size // channels

    if mode == "train":
        mu = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        unbiased = var * count / (count - 1) if count > 1 else var
        running.mean[...] = (1 - momentum) * running.mean + momentum * mu
        running.var[...] = (1 - momentum) * running.var + momentum * unbiased
    elif mode == "eval":
        mu = running.mean.astype(x.dtype)
        var = running.var.astype(x.dtype)
    else:
        raise InputError(f"batch_norm: mode must be 'train' or 'eval', got {mode!r}")

    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu.reshape(view)) * inv_std.reshape(view)
    out = gamma.data.reshape(view) * xhat + beta.data.reshape(view)

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        grad_gamma = np.sum(g * xhat, axis=axes)
        grad_beta = np.sum(g, axis=axes)
        dxhat = g * gamma.data.reshape(view)
        if mode == "train":
            grad_x = (
                inv_std.reshape(view)
                / count
                * (
                    count * dxhat
                    - np.sum(dxhat, axis=axes, keepdims=True)
                    - xhat * np.sum(dxhat * xhat, axis=axes, keepdims=True)
                )
            )
        else:
            grad_x = dxhat * inv_std.reshape(view)
        return grad_x, grad_gamma, grad_beta

    return record("batch_norm", out.astype(x.dtype), (x, gamma, beta), backward)
