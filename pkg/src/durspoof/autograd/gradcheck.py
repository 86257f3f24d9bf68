"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from durspoof.autograd.tensor import Tensor, backward, no_grad
from durspoof.errors import GradientContractError

DEFAULT_STEP_SCALE = 1e-3
# Multiple of machine epsilon below which a derivative difference is round-off.
ROUNDOFF_FACTOR = 1e4


@dataclass
class GradCheckReport:
    """Outcome of one finite-difference comparison.

    ``max_rel_error`` is ``max |a − n| / max(|a|, |n|, floor / tolerance)`` over
    the checked coordinates, where ``a`` is the analytic and ``n`` the numeric
    derivative. ``floor = ROUNDOFF_FACTOR · eps · max(1, |f(x)|) / h`` is the
    difference central differences cannot resolve at step ``h``; derivatives
    well above it are held to the relative tolerance, smaller ones to the
    absolute floor.
    """

    name: str
    max_rel_error: float
    max_abs_error: float
    tolerance: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def to_dict(self) -> Dict[str, Union[str, float, int, bool]]:
        return {
            "name": self.name,
            "max_rel_error": self.max_rel_error,
            "max_abs_error": self.max_abs_error,
            "tolerance": self.tolerance,
            "n_checked": self.n_checked,
            "passed": self.passed,
        }


def _scalar(value: Tensor) -> float:
    if value.size != 1:
        raise GradientContractError(
            f"finite_diff_check needs a scalar-valued function, got shape {value.shape}"
        )
    return value.item()


def _central(evaluate_at: Callable[[int, float], float], index: int, x0: float, h: float) -> float:
    return (evaluate_at(index, x0 + h) - evaluate_at(index, x0 - h)) / (2.0 * h)


def _compare(
    name: str,
    analytic: np.ndarray,
    evaluate_at: Callable[[int, float], float],
    values: np.ndarray,
    f0: float,
    tolerance: float,
    step_scale: float,
    coordinates: Optional[Sequence[int]],
) -> GradCheckReport:
    flat_analytic = analytic.reshape(-1)
    flat_values = values.reshape(-1)
    indices = range(flat_values.size) if coordinates is None else coordinates
    eps = float(np.finfo(values.dtype if np.issubdtype(values.dtype, np.floating) else np.float64).eps)
    max_rel = 0.0
    max_abs = 0.0
    count = 0
    for index in indices:
        x0 = float(flat_values[index])
        h = step_scale * max(1.0, abs(x0))
        # Richardson: cancels the h² truncation term of the central difference.
        numeric = (4.0 * _central(evaluate_at, index, x0, h / 2) - _central(evaluate_at, index, x0, h)) / 3.0
        exact = float(flat_analytic[index])
        diff = abs(exact - numeric)
        floor = ROUNDOFF_FACTOR * eps * max(1.0, abs(f0)) / h
        max_abs = max(max_abs, diff)
        max_rel = max(max_rel, diff / max(abs(exact), abs(numeric), floor / tolerance))
        count += 1
    return GradCheckReport(
        name=name,
        max_rel_error=max_rel,
        max_abs_error=max_abs,
        tolerance=tolerance,
        n_checked=count,
    )


def finite_diff_check(
    fn: Callable[[Tensor], Tensor],
    point: Union[Tensor, np.ndarray],
    tolerance: float = 1e-4,
    step_scale: float = DEFAULT_STEP_SCALE,
    coordinates: Optional[Sequence[int]] = None,
    name: str = "",
) -> GradCheckReport:
    """Compare the gradient of ``fn`` at ``point`` with central differences.

    The numeric derivative extrapolates central differences at steps ``h``
    and ``h / 2`` with ``h = step_scale · max(1, |x_i|)``.

    Args:
        fn: Scalar-valued tensor program; it is evaluated ``4k + 1`` times.
        point: Where to differentiate. Its dtype is kept, so pass float64 for
            verification-grade checks.
        tolerance: Pass threshold on the maximum relative error.
        step_scale: Relative finite-difference step.
        coordinates: Flat indices to check; all of them by default.
        name: Label for the report.

    Returns:
        The comparison report.
    """
    base = np.array(point.data if isinstance(point, Tensor) else point)
    x = Tensor(base.copy(), requires_grad=True, dtype=base.dtype)
    value = fn(x)
    f0 = _scalar(value)
    backward(value)
    analytic = x.grad if x.grad is not None else np.zeros_like(base)

    def evaluate_at(index: int, value: float) -> float:
        shifted = base.copy()
        shifted.reshape(-1)[index] = value
        with no_grad():
            return _scalar(fn(Tensor(shifted, dtype=base.dtype)))

    return _compare(name, analytic, evaluate_at, base, f0, tolerance, step_scale, coordinates)


def finite_diff_check_parameter(
    loss_fn: Callable[[], Tensor],
    param: Tensor,
    tolerance: float = 1e-4,
    step_scale: float = DEFAULT_STEP_SCALE,
    coordinates: Optional[Sequence[int]] = None,
    name: str = "",
) -> GradCheckReport:
    """Like :func:`finite_diff_check` for a parameter used inside ``loss_fn``.

    The parameter is perturbed in place and restored afterwards; its
    ``grad`` is reset before the analytic pass.
    """
    original = param.data.copy()
    param.grad = None
    value = loss_fn()
    f0 = _scalar(value)
    backward(value)
    analytic = param.grad.copy() if param.grad is not None else np.zeros_like(original)
    param.grad = None

    def evaluate_at(index: int, value: float) -> float:
        param.data.reshape(-1)[index] = value
        try:
            with no_grad():
                return _scalar(loss_fn())
        finally:
            param.data[...] = original

    return _compare(name, analytic, evaluate_at, original, f0, tolerance, step_scale, coordinates)
