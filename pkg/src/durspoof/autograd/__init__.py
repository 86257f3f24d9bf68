"""Minimal dense-tensor numerics with reverse-mode differentiation."""

from durspoof.autograd import ops
from durspoof.autograd.checkpoint import load_checkpoint, save_checkpoint
from durspoof.autograd.gradcheck import (
    GradCheckReport,
    finite_diff_check,
    finite_diff_check_parameter,
)
from durspoof.autograd.optim import Adam, AdamState, adam_step
from durspoof.autograd.tensor import (
    ComputationRecord,
    Node,
    Tensor,
    backward,
    is_grad_enabled,
    no_grad,
)

__all__ = [
    "Adam",
    "AdamState",
    "ComputationRecord",
    "GradCheckReport",
    "Node",
    "Tensor",
    "adam_step",
    "backward",
    "finite_diff_check",
    "finite_diff_check_parameter",
    "is_grad_enabled",
    "load_checkpoint",
    "no_grad",
    "ops",
    "save_checkpoint",
]
