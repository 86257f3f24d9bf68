"""Dense tensors with reverse-mode differentiation.

A ``Tensor`` wraps a numpy array. When gradient recording is enabled and any
input of an operation requires a gradient, the operation appends a ``Node`` to
the computation: the node keeps its inputs, its output and a closure mapping
the output gradient to input gradients. Nodes carry a global sequence number,
so replaying them in decreasing sequence order is exactly the reverse of the
order in which they were executed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from durspoof.errors import GradientContractError, InputError, NonFiniteError

DEFAULT_DTYPE = np.float32

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_sequence = itertools.count()
_grad_enabled = True


class no_grad:
    """Context manager that disables recording of operations.

    Used for scoring and for the perturbed evaluations of the finite
    difference checker. Nesting restores the previous state on exit.
    """

    def __enter__(self) -> "no_grad":
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc: object) -> None:
        global _grad_enabled
        _grad_enabled = self._prev


def is_grad_enabled() -> bool:
    """Return whether operations are currently recorded."""
    return _grad_enabled


@dataclass(eq=False)
class Node:
    """One executed primitive operation."""

    op: str
    inputs: Tuple["Tensor", ...]
    output: "Tensor"
    backward_fn: BackwardFn
    seq: int = field(default_factory=lambda: next(_sequence))


class ComputationRecord:
    """The nodes a scalar depends on, ordered by execution.

    Args:
        nodes: Nodes in any order; they are sorted by sequence number.
    """

    def __init__(self, nodes: Sequence[Node]) -> None:
        """Sort the nodes into execution order."""
        self.nodes: List[Node] = sorted(nodes, key=lambda n: n.seq)

    @classmethod
    def from_root(cls, root: "Tensor") -> "ComputationRecord":
        """Collect every node reachable from ``root`` through node inputs."""
        seen: Dict[int, Node] = {}
        stack = [root]
        while stack:
            tensor = stack.pop()
            node = tensor._node
            if node is None or id(node) in seen:
                continue
            seen[id(node)] = node
            stack.extend(node.inputs)
        return cls(list(seen.values()))

    def replay_order(self) -> Iterator[Node]:
        """Yield nodes in reverse execution order."""
        return reversed(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def _check_finite(data: np.ndarray, op: str) -> None:
    if data.dtype.kind == "f" and not np.isfinite(data).all():
        bad = int(np.size(data) - np.count_nonzero(np.isfinite(data)))
        raise NonFiniteError(f"{op} produced {bad} non-finite value(s)")


class Tensor:
    """Dense float array with optional gradient tracking.

    Args:
        data: Array-like values. Python scalars and lists become float32;
            floating numpy arrays keep their dtype.
        requires_grad: Whether gradients should be accumulated into ``grad``.
        dtype: Force a dtype (float32 or float64).
        name: Optional label, used in error messages and checkpoints.
    """

    # numpy defers mixed arithmetic to the reflected Tensor operators
    __array_ufunc__ = None

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        dtype: Optional[Any] = None,
        name: Optional[str] = None,
    ) -> None:
        """Validate shape and finiteness and store a private copy."""
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            if isinstance(data, np.ndarray) and data.dtype.kind == "f":
                dtype = data.dtype
            else:
                dtype = DEFAULT_DTYPE
        array = np.array(data, dtype=dtype)
        if any(dim <= 0 for dim in array.shape):
            raise InputError(f"tensor dimensions must be positive, got {array.shape}")
        _check_finite(array, name or "tensor")
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._node: Optional[Node] = None
        self._backward_done = False

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def is_leaf(self) -> bool:
        return self._node is None

    def item(self) -> float:
        """Return the value of a one-element tensor as a Python float."""
        if self.data.size != 1:
            raise InputError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def detach(self) -> "Tensor":
        """Return a new leaf tensor sharing no history with this one."""
        return Tensor(self.data, dtype=self.data.dtype, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> List["Tensor"]:
        """Differentiate this scalar; see :func:`backward`."""
        return backward(self)

    # Operator sugar; the implementations live in durspoof.autograd.ops.
    def __add__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        from durspoof.autograd import ops

        return ops.div(other, self)

    def __neg__(self) -> "Tensor":
        from durspoof.autograd import ops

        return ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from durspoof.autograd import ops

        return ops.matmul(self, other)

    def sum(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        from durspoof.autograd import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Any = None, keepdims: bool = False) -> "Tensor":
        from durspoof.autograd import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: Any) -> "Tensor":
        from durspoof.autograd import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{grad}{label})"


def record(
    op: str,
    data: np.ndarray,
    inputs: Sequence[Tensor],
    backward_fn: BackwardFn,
) -> Tensor:
    """Wrap an op result and, when needed, append its node to the computation.

    Args:
        op: Operation name (used in error messages).
        data: The forward result.
        inputs: Tensors the result was computed from.
        backward_fn: Maps the output gradient to one gradient (or None) per input.

    Returns:
        The output tensor.

    Raises:
        NonFiniteError: If ``data`` contains NaN or Inf.
    """
    _check_finite(data, op)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    out._node = None
    out._backward_done = False
    out.requires_grad = False
    if _grad_enabled and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out._node = Node(op=op, inputs=tuple(inputs), output=out, backward_fn=backward_fn)
    return out


def backward(loss: Tensor) -> List[Tensor]:
    """Propagate d(loss)/d(leaf) into every reachable leaf's ``grad``.

    Gradients accumulate into ``grad`` of leaves that require them, so the
    caller resets them (``zero_grad``) between steps.

    Args:
        loss: A one-element tensor produced by recorded operations.

    Returns:
        The leaf tensors that received a gradient, in no particular order.

    Raises:
        GradientContractError: If ``loss`` is not scalar, is not part of a
            recorded computation, or was already differentiated.
    """
    if loss.size != 1:
        raise GradientContractError(
            f"backward() needs a scalar loss, got shape {loss.shape}"
        )
    if not loss.requires_grad:
        raise GradientContractError(
            "backward() called on a tensor that is not part of a recorded computation"
        )
    if loss._backward_done:
        raise GradientContractError(
            "backward() already ran for this loss; run a new forward pass first"
        )

    seed = np.ones_like(loss.data)
    touched: Dict[int, Tensor] = {}
    if loss.is_leaf:
        loss.grad = seed if loss.grad is None else loss.grad + seed
        loss._backward_done = True
        return [loss]

    pending: Dict[int, np.ndarray] = {id(loss): seed}
    for node in ComputationRecord.from_root(loss).replay_order():
        grad_out = pending.pop(id(node.output), None)
        if grad_out is None:
            continue
        grads_in = node.backward_fn(grad_out)
        for tensor, grad in zip(node.inputs, grads_in):
            if grad is None or not tensor.requires_grad:
                continue
            _check_finite(grad, f"{node.op} backward")
            if tensor.is_leaf:
                tensor.grad = grad.copy() if tensor.grad is None else tensor.grad + grad
                touched[id(tensor)] = tensor
            elif id(tensor) in pending:
                pending[id(tensor)] = pending[id(tensor)] + grad
            else:
                pending[id(tensor)] = grad
    loss._backward_done = True
    return list(touched.values())
