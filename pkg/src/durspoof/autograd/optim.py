"""Adam with a fixed learning rate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, DimensionError

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


@dataclass
class AdamState:
    """First and second moment estimates plus the shared step counter."""

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float,
    betas: Tuple[float, float] = ADAM_BETAS,
    eps: float = ADAM_EPS,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """Apply one bias-corrected Adam update without mutating the inputs.

    No weight decay and no gradient clipping are applied.

    Args:
        params: Parameter arrays by name.
        grads: Gradients by name, same shapes as ``params``.
        state: Moments from the previous step (empty on the first step).
        lr: Learning rate, constant across steps.
        betas: Exponential decay rates of the two moments.
        eps: Denominator guard.

    Returns:
        The updated parameters and the new state.
    """
    if lr <= 0:
        raise ConfigurationError(f"learning rate must be positive, got {lr}")
    beta1, beta2 = betas
    step = state.step + 1
    new_params: Dict[str, np.ndarray] = {}
    new_m: Dict[str, np.ndarray] = {}
    new_v: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise DimensionError(f"adam_step[{name}]", value.shape, grad.shape)
        m_prev = state.m.get(name)
        v_prev = state.v.get(name)
        if m_prev is None or v_prev is None:
            m_prev = np.zeros_like(value)
            v_prev = np.zeros_like(value)
        elif m_prev.shape != value.shape or v_prev.shape != value.shape:
            raise DimensionError(f"adam_step[{name}] state", value.shape, m_prev.shape, v_prev.shape)
        m = beta1 * m_prev + (1.0 - beta1) * grad
        v = beta2 * v_prev + (1.0 - beta2) * grad * grad
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        update = lr * m_hat / (np.sqrt(v_hat) + eps)
        new_params[name] = (value - update).astype(value.dtype)
        new_m[name] = m.astype(value.dtype)
        new_v[name] = v.astype(value.dtype)
    return new_params, AdamState(step=step, m=new_m, v=new_v)


class Adam:
    """Stateful optimizer over named parameter tensors.

    Args:
        params: Parameter tensors by name; updated in place by :meth:`step`.
        lr: Fixed learning rate.
        betas: Moment decay rates.
        eps: Denominator guard.
    """

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float,
        betas: Tuple[float, float] = ADAM_BETAS,
        eps: float = ADAM_EPS,
    ) -> None:
        """Create the optimizer with empty moment estimates."""
        self.params = dict(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.grad = None

    def step(self) -> None:
        """Update every parameter from its accumulated gradient.

        Parameters that received no gradient are treated as having a zero
        gradient so the moment estimates stay aligned across steps.
        """
        values = {name: t.data for name, t in self.params.items()}
        grads = {
            name: t.grad if t.grad is not None else np.zeros_like(t.data)
            for name, t in self.params.items()
        }
        updated, self.state = adam_step(values, grads, self.state, self.lr, self.betas, self.eps)
        for name, tensor in self.params.items():
            tensor.data = np.ascontiguousarray(updated[name])

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Flatten the moments into a name → array mapping for checkpoints."""
        flat: Dict[str, np.ndarray] = {"adam.step": np.array([self.state.step], dtype=np.int64)}
        for name in self.params:
            if name in self.state.m:
                flat[f"adam.m.{name}"] = self.state.m[name]
                flat[f"adam.v.{name}"] = self.state.v[name]
        return flat

    def load_state_dict(self, flat: Mapping[str, np.ndarray]) -> None:
        step: Optional[np.ndarray] = flat.get("adam.step")
        state = AdamState(step=int(step[0]) if step is not None else 0)
        for name in self.params:
            if f"adam.m.{name}" in flat:
                state.m[name] = np.array(flat[f"adam.m.{name}"])
                state.v[name] = np.array(flat[f"adam.v.{name}"])
        self.state = state
