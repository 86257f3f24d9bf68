"""Finite-difference verification suites run by ``durspoof gradcheck``.

Every suite runs in float64. Primitive ops are checked at several seeds with
the default relative step; blocks and the tiny model use a much smaller step
so perturbations stay clear of max-pool switches and the SeLU kink.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from durspoof.autograd import ops
from durspoof.autograd.gradcheck import GradCheckReport, finite_diff_check, finite_diff_check_parameter
from durspoof.autograd.ops import RunningStats
from durspoof.autograd.tensor import Tensor
from durspoof.console import Console, NullConsole
from durspoof.losses import AMSoftmaxConfig, am_softmax_loss, weighted_ce_loss
from durspoof.model.blocks import Res2NetBlock, Res2NetBlockConfig, ResidualBlock, SELayer, SELayerConfig
from durspoof.model.countermeasure import Countermeasure
from durspoof.model.encoder import EncoderConfig
from durspoof.model.frontend import FrontEndConfig

PRIMITIVE_TOLERANCE = 1e-4
MODEL_TOLERANCE = 1e-3
MODEL_STEP = 1e-6
DEFAULT_SEEDS = (0, 1, 2, 3, 4)
TINY_WAVEFORM = 880
COORDINATES_PER_TENSOR = 12

Program = Callable[[Tensor], Tensor]


def tiny_encoder_config() -> EncoderConfig:
    """Two-block float64 encoder (plain block, then Res2Net with s=2, w=2)."""
    return EncoderConfig(
        front_end=FrontEndConfig(proj_dim=4, channels=2),
        channels=[(2, 2), (2, 4)],
        scale=2,
        width=2,
        se_reduction=2,
        reduced_depth=True,
        dtype="float64",
    )


def _away_from_zero(rng: np.random.Generator, shape: Sequence[int], low: float = 0.1, high: float = 1.5) -> np.ndarray:
    return rng.uniform(low, high, shape) * rng.choice([-1.0, 1.0], shape)


def _separated(rng: np.random.Generator, shape: Sequence[int]) -> np.ndarray:
    size = int(np.prod(shape))
    return (rng.permutation(size).reshape(shape) - size / 2) * 0.1


def _weighted(rng: np.random.Generator, fn: Program, out_shape: Sequence[int]) -> Program:
    """Reduce ``fn``'s output to a scalar through fixed random weights."""
    weights = rng.standard_normal(out_shape)
    return lambda x: ops.sum(fn(x) * weights)


def primitive_programs(rng: np.random.Generator) -> List[tuple]:
    """``(name, program, point)`` triples covering every differentiable primitive."""
    w = rng.standard_normal((4, 3))
    b = rng.standard_normal(3)
    other = rng.standard_normal((3, 4))
    kernel = Tensor(rng.standard_normal((3, 2, 3, 3)), dtype=np.float64)
    gamma = Tensor(rng.uniform(0.5, 1.5, 2), dtype=np.float64)
    beta = Tensor(rng.standard_normal(2), dtype=np.float64)
    stats = RunningStats(mean=rng.standard_normal(2), var=rng.uniform(0.5, 2.0, 2))
    weight = Tensor(rng.standard_normal((5, 4)), dtype=np.float64)
    bias = Tensor(rng.standard_normal(5), dtype=np.float64)
    return [
        ("add", _weighted(rng, lambda x: x + other, (3, 4)), rng.standard_normal((3, 4))),
        ("sub", _weighted(rng, lambda x: other - x, (3, 4)), rng.standard_normal((3, 4))),
        ("mul", _weighted(rng, lambda x: x * x * b[:, None], (3, 4)), rng.standard_normal((3, 4))),
        ("div", _weighted(rng, lambda x: other / x, (3, 4)), rng.uniform(0.5, 2.0, (3, 4))),
        ("broadcast", _weighted(rng, lambda x: ops.reshape(x, (3, 1)) * other, (3, 4)), rng.standard_normal(3)),
        ("exp", _weighted(rng, ops.exp, (3, 4)), rng.standard_normal((3, 4))),
        ("log", _weighted(rng, ops.log, (3, 4)), rng.uniform(0.5, 2.0, (3, 4))),
        ("relu", _weighted(rng, ops.relu, (3, 4)), _away_from_zero(rng, (3, 4))),
        ("sigmoid", _weighted(rng, ops.sigmoid, (3, 4)), rng.standard_normal((3, 4))),
        ("selu", _weighted(rng, ops.selu, (3, 4)), _away_from_zero(rng, (3, 4))),
        ("mean", _weighted(rng, lambda x: ops.mean(x, axis=1), (3,)), rng.standard_normal((3, 4))),
        ("amax", _weighted(rng, lambda x: ops.amax(x, axis=(1, 2)), (2,)), _separated(rng, (2, 3, 4))),
        ("transpose", _weighted(rng, lambda x: ops.transpose(x, (1, 0)), (4, 3)), rng.standard_normal((3, 4))),
        (
            "concat_split",
            _weighted(rng, lambda x: ops.concat(ops.split(x, 2, axis=1)[::-1], axis=0), (6, 2)),
            rng.standard_normal((3, 4)),
        ),
        ("matmul", _weighted(rng, lambda x: ops.matmul(x, Tensor(w, dtype=np.float64)), (3, 3)), rng.standard_normal((3, 4))),
        ("linear", _weighted(rng, lambda x: ops.linear(x, weight, bias), (3, 5)), rng.standard_normal((3, 4))),
        ("l2_normalize", _weighted(rng, lambda x: ops.l2_normalize(x, axis=1), (3, 4)), rng.standard_normal((3, 4))),
        ("log_softmax", _weighted(rng, lambda x: ops.log_softmax(x, axis=1), (3, 4)), rng.standard_normal((3, 4))),
        (
            "conv2d",
            _weighted(rng, lambda x: ops.conv2d(x, kernel, stride=1, padding=1), (2, 3, 4, 5)),
            rng.standard_normal((2, 2, 4, 5)),
        ),
        (
            "conv2d_strided",
            _weighted(rng, lambda x: ops.conv2d(x, kernel, stride=2, padding=0), (2, 3, 2, 2)),
            rng.standard_normal((2, 2, 5, 6)),
        ),
        ("max_pool2d", _weighted(rng, lambda x: ops.max_pool2d(x, (1, 2)), (2, 2, 3, 2)), _separated(rng, (2, 2, 3, 4))),
        (
            "batch_norm_train",
            _weighted(rng, lambda x: ops.batch_norm(x, gamma, beta, RunningStats.initial(2, np.float64)), (3, 2, 2, 2)),
            rng.standard_normal((3, 2, 2, 2)),
        ),
        (
            "batch_norm_eval",
            _weighted(rng, lambda x: ops.batch_norm(x, gamma, beta, stats, mode="eval"), (3, 2, 2, 2)),
            rng.standard_normal((3, 2, 2, 2)),
        ),
        (
            "chain",
            lambda x: ops.sum(ops.exp(ops.log_softmax(ops.matmul(ops.sigmoid(x), Tensor(w, dtype=np.float64)), axis=1))),
            rng.standard_normal((3, 4)),
        ),
    ]


def check_primitives(seeds: Iterable[int] = DEFAULT_SEEDS) -> List[GradCheckReport]:
    reports = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for name, program, point in primitive_programs(rng):
            reports.append(
                finite_diff_check(program, np.asarray(point, dtype=np.float64), PRIMITIVE_TOLERANCE, name=f"{name}[seed={seed}]")
            )
    return reports


def check_losses(seeds: Iterable[int] = DEFAULT_SEEDS) -> List[GradCheckReport]:
    reports = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        head = Tensor(rng.standard_normal((6, 2)), dtype=np.float64)
        labels = rng.integers(0, 2, 5)
        reports.append(
            finite_diff_check(
                lambda f: am_softmax_loss(f, labels, head, AMSoftmaxConfig(), margin=0.3),
                rng.standard_normal((5, 6)),
                PRIMITIVE_TOLERANCE,
                name=f"am_softmax_loss[seed={seed}]",
            )
        )
        reports.append(
            finite_diff_check(
                lambda z: weighted_ce_loss(z, labels, (0.1, 0.9)),
                rng.standard_normal((5, 2)),
                PRIMITIVE_TOLERANCE,
                name=f"weighted_ce_loss[seed={seed}]",
            )
        )
    return reports


def check_blocks(seeds: Iterable[int] = DEFAULT_SEEDS) -> List[GradCheckReport]:
    """Input gradients through a residual block, a Res2Net block and an SE layer."""
    reports = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        residual = ResidualBlock(rng, 2, 3, dtype=np.float64)
        res2net = Res2NetBlock(rng, Res2NetBlockConfig(2, 3, scale=2, width=2, se_reduction=2), dtype=np.float64)
        se = SELayer(rng, SELayerConfig(3, 2), dtype=np.float64)
        cases = [
            ("residual_block", lambda x: residual(x, "train"), (2, 3, 3, 2)),
            ("res2net_block", lambda x: res2net(x, "train"), (2, 3, 3, 2)),
            ("se_layer", se, (2, 3, 3, 4)),
        ]
        for name, block, out_shape in cases:
            in_shape = (2, 2, 3, 4) if name != "se_layer" else (2, 3, 3, 4)
            reports.append(
                finite_diff_check(
                    _weighted(rng, block, out_shape),
                    rng.standard_normal(in_shape),
                    PRIMITIVE_TOLERANCE,
                    step_scale=MODEL_STEP,
                    name=f"{name}[seed={seed}]",
                )
            )
    return reports


def check_tiny_model(seed: int = 0, coordinates_per_tensor: int = COORDINATES_PER_TENSOR) -> List[GradCheckReport]:
    """Parameter gradients of the full tiny countermeasure under AM-Softmax."""
    rng = np.random.default_rng([seed, 99])
    model = Countermeasure(tiny_encoder_config(), seed).train()
    samples = 0.3 * rng.standard_normal((4, TINY_WAVEFORM))
    labels = np.array([0, 1, 0, 1])

    def loss() -> Tensor:
        return am_softmax_loss(model.embed(samples), labels, model.head, AMSoftmaxConfig(), margin=0.3)

    reports = []
    for name, param in model.named_parameters():
        coords = rng.choice(param.size, size=min(param.size, coordinates_per_tensor), replace=False)
        reports.append(
            finite_diff_check_parameter(
                loss, param, MODEL_TOLERANCE, step_scale=MODEL_STEP, coordinates=coords.tolist(), name=f"tiny_model.{name}"
            )
        )
    return reports


def run_gradcheck_suite(
    seeds: Sequence[int] = DEFAULT_SEEDS,
    console: Optional[Console] = None,
) -> List[GradCheckReport]:
    console = console or NullConsole()
    reports: List[GradCheckReport] = []
    suites = [
        ("primitives", lambda: check_primitives(seeds)),
        ("losses", lambda: check_losses(seeds)),
        ("blocks", lambda: check_blocks(seeds)),
        ("tiny model", lambda: check_tiny_model(seeds[0] if seeds else 0)),
    ]
    for label, suite in suites:
        with console.status(f"Checking {label}..."):
            batch = suite()
        failed = [r for r in batch if not r.passed]
        if failed:
            console.warning(f"{label}: {len(failed)} of {len(batch)} checks failed")
        else:
            console.success(f"{label}: {len(batch)} checks passed")
        reports.extend(batch)
    return reports


def reports_frame(reports: Sequence[GradCheckReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in reports], columns=["name", "max_rel_error", "max_abs_error", "tolerance", "n_checked", "passed"])


def write_gradcheck_csv(reports: Sequence[GradCheckReport], out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir) / "gradcheck.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    reports_frame(reports).to_csv(path, index=False)
    return path
