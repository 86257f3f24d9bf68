"""Exception hierarchy for durspoof.

Every error raised on purpose by the library derives from ``DurspoofError`` so
the CLI can turn it into a single machine-parsable line. Most classes also
derive from the matching builtin (``ValueError``, ``RuntimeError``...) so
callers that only know the builtins keep working.
"""

from __future__ import annotations

from typing import Optional, Sequence


class DurspoofError(Exception):
    """Base class for all durspoof errors."""


class ConfigurationError(DurspoofError, ValueError):
    """A configuration value is missing, inconsistent or out of range."""


class InputError(DurspoofError, ValueError):
    """Data handed to an operation violates its preconditions."""


class DimensionError(InputError):
    """Tensor shapes are incompatible for an operation."""

    def __init__(self, op: str, *shapes: Sequence[int], detail: str = "") -> None:
        """Build the message from the op name and every offending shape."""
        shown = " vs ".join(str(tuple(s)) for s in shapes)
        message = f"{op}: incompatible shapes {shown}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.op = op
        self.shapes = [tuple(s) for s in shapes]


class AudioFormatError(InputError):
    """An audio file is not PCM16 mono 16 kHz WAV."""

    def __init__(self, path: str, field: str, found: object, expected: object) -> None:
        """Name the offending header field, what was found and what is required."""
        super().__init__(
            f"{path}: unsupported {field} {found!r} (expected {expected!r})"
        )
        self.path = path
        self.field = field


class ProtocolParseError(InputError):
    """A protocol file line cannot be parsed."""

    def __init__(self, path: str, line_number: int, reason: str) -> None:
        """Point at the 1-based line number of the bad line."""
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = path
        self.line_number = line_number


class UndefinedMetricError(DurspoofError, ValueError):
    """A metric cannot be computed, e.g. EER with a single class present."""


class GradientContractError(DurspoofError, RuntimeError):
    """Reverse-mode differentiation was invoked outside its contract."""


class NonFiniteError(DurspoofError, FloatingPointError):
    """An operation produced NaN or Inf."""


class NonFiniteLossError(NonFiniteError):
    """The training loss became non-finite."""

    def __init__(
        self,
        value: float,
        batch_index: int,
        batch_seed: int,
        epoch: Optional[int] = None,
    ) -> None:
        """Record enough to replay the failing batch."""
        where = f"batch {batch_index} (seed {batch_seed}"
        if epoch is not None:
            where += f", epoch {epoch}"
        where += ")"
        super().__init__(f"non-finite training loss {value!r} at {where}")
        self.batch_index = batch_index
        self.batch_seed = batch_seed
        self.epoch = epoch
