"""AM-Softmax with a duration-adaptive margin, and the weighted cross-entropy baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np

from durspoof.autograd import ops
from durspoof.autograd.tensor import Tensor
from durspoof.errors import ConfigurationError, DimensionError, InputError

SPOOF = 0
BONAFIDE = 1
NUM_CLASSES = 2

LossKind = Literal["am_softmax", "weighted_ce"]
Labels = Union[Sequence[int], np.ndarray]


@dataclass
class AMSoftmaxConfig:
    """Scale ``s`` and class count ``c`` of the AM-Softmax head."""

    scale_factor: float = field(default=15.0, metadata={"description": "Logit scale s"})
    num_classes: int = field(default=NUM_CLASSES, metadata={"description": "Number of classes c"})

    def validate(self) -> None:
        if not self.scale_factor > 0:
            raise ConfigurationError(f"AM-Softmax scale must be positive, got {self.scale_factor}")
        if self.num_classes < 2:
            raise ConfigurationError(f"AM-Softmax needs at least 2 classes, got {self.num_classes}")


@dataclass
class MarginSchedule:
    """Affine margin ``A · duration + B`` clamped to ``[m_min, m_max]``.

    Durations are clamped to ``[d_min, d_max]`` seconds before the affine map,
    and the endpoints must agree: ``A·d_min + B = m_min`` and
    ``A·d_max + B = m_max``.
    """

    slope: float = field(default=0.06, metadata={"description": "A, margin per second"})
    intercept: float = field(default=0.14, metadata={"description": "B, margin at zero duration"})
    m_min: float = field(default=0.2, metadata={"description": "Smallest margin"})
    m_max: float = field(default=0.5, metadata={"description": "Largest margin"})
    d_min: float = field(default=1.0, metadata={"description": "Duration (s) mapped to m_min"})
    d_max: float = field(default=6.0, metadata={"description": "Duration (s) mapped to m_max"})
    sample_rate: int = field(default=16000, metadata={"description": "Samples per second"})

    @classmethod
    def from_ranges(
        cls, m_min: float, m_max: float, d_min: float, d_max: float, sample_rate: int = 16000
    ) -> "MarginSchedule":
        """Derive ``A`` and ``B`` from the margin and duration ranges."""
        if not d_max > d_min:
            raise ConfigurationError(f"duration range must be increasing, got [{d_min}, {d_max}]")
        slope = (m_max - m_min) / (d_max - d_min)
        return cls(
            slope=slope,
            intercept=m_min - slope * d_min,
            m_min=m_min,
            m_max=m_max,
            d_min=d_min,
            d_max=d_max,
            sample_rate=sample_rate,
        )

    def validate(self) -> None:
        if not self.d_max > self.d_min:
            raise ConfigurationError(f"duration range must be increasing, got [{self.d_min}, {self.d_max}]")
        if not 0 <= self.m_min <= self.m_max < 1:
            raise ConfigurationError(f"margin range must satisfy 0 <= m_min <= m_max < 1, got [{self.m_min}, {self.m_max}]")
        for d, m in ((self.d_min, self.m_min), (self.d_max, self.m_max)):
            if abs(self.slope * d + self.intercept - m) > 1e-9:
                raise ConfigurationError(
                    f"margin schedule endpoints disagree: {self.slope}·{d} + {self.intercept} != {m}"
                )

    def margin_for_duration(self, duration_s: float) -> float:
        duration = min(max(float(duration_s), self.d_min), self.d_max)
        return float(np.clip(self.slope * duration + self.intercept, self.m_min, self.m_max))

    def margin_for_samples(self, n_samples: int) -> float:
        return self.margin_for_duration(n_samples / self.sample_rate)


def margin_for_duration(duration_s: float, schedule: MarginSchedule) -> float:
    """Margin for a training chunk of ``duration_s`` seconds."""
    return schedule.margin_for_duration(duration_s)


@dataclass(kw_only=True)
class LossConfig:
    """Training objective.

    ``am_softmax`` uses the schedule when ``almft`` is on and ``fixed_margin``
    otherwise; ``weighted_ce`` weights classes by ``class_weights``
    (indexed spoof, bonafide).
    """

    kind: LossKind = field(default="am_softmax", metadata={"description": "am_softmax or weighted_ce"})
    am_softmax: AMSoftmaxConfig = field(default_factory=AMSoftmaxConfig)
    schedule: MarginSchedule = field(default_factory=MarginSchedule)
    almft: bool = field(default=True, metadata={"description": "Duration-adaptive margin during training"})
    fixed_margin: float = field(default=0.2, metadata={"description": "Margin when ALMFT is off"})
    class_weights: Tuple[float, float] = field(
        default=(0.1, 0.9), metadata={"description": "Weighted-CE weights (spoof, bonafide)"}
    )

    def __post_init__(self) -> None:
        self.class_weights = tuple(float(w) for w in self.class_weights)  # type: ignore[assignment]

    def validate(self) -> None:
        if self.kind not in ("am_softmax", "weighted_ce"):
            raise ConfigurationError(f"unknown loss kind {self.kind!r}")
        self.am_softmax.validate()
        self.schedule.validate()
        _check_margin(self.fixed_margin)
        if len(self.class_weights) != self.am_softmax.num_classes or min(self.class_weights) <= 0:
            raise ConfigurationError(f"class weights must be {self.am_softmax.num_classes} positive values, got {self.class_weights}")

    def margin_for_samples(self, n_samples: int) -> float:
        if self.almft:
            return self.schedule.margin_for_samples(n_samples)
        return self.fixed_margin


def _check_margin(margin: float) -> None:
    if not 0 <= margin < 1:
        raise ConfigurationError(f"margin must lie in [0, 1), got {margin}")


def _labels(labels: Labels, n: int, num_classes: int) -> np.ndarray:
    array = np.asarray(labels)
    if array.shape != (n,):
        raise DimensionError("labels", array.shape, (n,))
    if array.dtype.kind not in "iub" or np.any(array < 0) or np.any(array >= num_classes):
        raise InputError(f"labels must be integers in [0, {num_classes}), got {array.tolist()}")
    return array.astype(np.int64)


def _one_hot(labels: np.ndarray, num_classes: int, dtype: np.dtype) -> np.ndarray:
    return np.eye(num_classes, dtype=dtype)[labels]


def cosine_logits(embeddings: Tensor, weights: Tensor) -> Tensor:
    """Cosines between unit-normalized embeddings ``[n, D]`` and class columns of ``W [D, c]``."""
    if embeddings.ndim != 2 or weights.ndim != 2 or embeddings.shape[1] != weights.shape[0]:
        raise DimensionError("cosine_logits", embeddings.shape, weights.shape)
    return ops.matmul(ops.l2_normalize(embeddings, axis=1), ops.l2_normalize(weights, axis=0))


def am_softmax_loss(
    embeddings: Tensor,
    labels: Labels,
    weights: Tensor,
    config: Optional[AMSoftmaxConfig] = None,
    margin: float = 0.0,
    per_sample: bool = False,
) -> Tensor:
    """Additive-margin softmax loss.

    The margin is subtracted from the target-class cosine only; all logits
    are then scaled by ``s`` and the negative log-likelihood is averaged.

    Args:
        embeddings: ``[n, D]`` embeddings (normalized internally).
        labels: ``n`` class ids.
        weights: Class weight matrix ``[D, c]`` (columns normalized internally).
        config: Scale and class count; defaults to ``s = 15``, ``c = 2``.
        margin: Additive margin ``m`` in ``[0, 1)``.
        per_sample: Return the ``[n]`` vector of losses instead of the mean.

    Raises:
        ConfigurationError: If the margin is outside ``[0, 1)``.
        InputError: If a label is outside ``[0, c)``.
    """
    config = config or AMSoftmaxConfig()
    config.validate()
    _check_margin(margin)
    if weights.ndim != 2 or weights.shape[1] != config.num_classes:
        raise DimensionError("am_softmax_loss", weights.shape, detail=f"expected [D, {config.num_classes}]")
    y = _labels(labels, embeddings.shape[0], config.num_classes)
    target = _one_hot(y, config.num_classes, embeddings.dtype)
    logits = (cosine_logits(embeddings, weights) - margin * target) * config.scale_factor
    nll = -ops.sum(ops.log_softmax(logits, axis=1) * target, axis=1)
    return nll if per_sample else ops.mean(nll)


def weighted_ce_loss(
    logits: Tensor,
    labels: Labels,
    class_weights: Sequence[float] = (0.1, 0.9),
) -> Tensor:
    """Class-weighted cross-entropy, normalized by the sum of applied weights."""
    if logits.ndim != 2 or logits.shape[1] != len(class_weights):
        raise DimensionError("weighted_ce_loss", logits.shape, (len(class_weights),))
    weights = np.asarray(class_weights, dtype=logits.dtype)
    if np.any(weights <= 0):
        raise ConfigurationError(f"class weights must be positive, got {list(class_weights)}")
    y = _labels(labels, logits.shape[0], len(class_weights))
    target = _one_hot(y, len(class_weights), logits.dtype) * weights[y][:, None]
    total = ops.sum(ops.log_softmax(logits, axis=1) * target)
    return -total / float(weights[y].sum())


def scores_from_embeddings(embeddings: Tensor, weights: Tensor, kind: LossKind) -> np.ndarray:
    """Bonafide scores: the bonafide cosine for AM-Softmax heads, the logit difference otherwise."""
    if kind == "am_softmax":
        return cosine_logits(embeddings, weights).data[:, BONAFIDE].copy()
    logits = ops.matmul(embeddings, weights).data
    return logits[:, BONAFIDE] - logits[:, SPOOF]
