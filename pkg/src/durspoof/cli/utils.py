"""CLI utility functions."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

import click

from durspoof.autograd.checkpoint import load_checkpoint
from durspoof.configuration import RunConfig
from durspoof.console import Verbosity
from durspoof.data.adapters import create_adapter
from durspoof.data.records import Utterance
from durspoof.errors import ConfigurationError
from durspoof.model.countermeasure import Countermeasure
from durspoof.model.encoder import EncoderConfig
from durspoof.utils import build_dataclass

if TYPE_CHECKING:
    from durspoof.console import Console
    from durspoof.result import EvalReport
    from durspoof.training import TrainingResult


def verbosity_from_flags(quiet: bool, verbose: int) -> Verbosity:
    """Map ``-q`` / ``-v`` / ``-vv`` to a verbosity level (NORMAL by default)."""
    if quiet:
        return Verbosity.QUIET
    elif verbose >= 2:
        return Verbosity.DEBUG
    elif verbose == 1:
        return Verbosity.VERBOSE
    return Verbosity.NORMAL


def validate_file(path: str) -> bool:
    """Validate file exists and is readable.

    Raises:
        click.BadParameter: If file is invalid
    """
    file_path = Path(path)
    if not file_path.exists():
        raise click.BadParameter(f"File not found: {path}")
    if not file_path.is_file():
        raise click.BadParameter(f"Not a file: {path}")
    if not file_path.stat().st_size > 0:
        raise click.BadParameter(f"File is empty: {path}")
    return True


def load_run_config(
    config_path: str,
    seed: Optional[int],
    overrides: Sequence[str],
    out: Optional[str],
    console: "Console",
) -> RunConfig:
    """Read a run config, applying ``--set`` overrides and the ``--seed``/``--out`` flags."""
    validate_file(config_path)
    extra = list(overrides)
    if seed is not None:
        extra.append(f"seed={seed}")
    config = RunConfig.from_file(config_path, extra)
    if out is not None:
        config.paths.output_dir = str(Path(out).resolve())
    else:
        config.paths.output_dir = str(config.paths.resolve(config.paths.output_dir))
    config.verbosity = console.verbosity
    config.console = console
    return config


def load_split(
    config: RunConfig, protocol_field: str, audio_field: str, console: "Console", label: str
) -> List[Utterance]:
    """Load one protocol-described split named by its ``paths`` fields."""
    protocol = config.paths.resolve(getattr(config.paths, protocol_field))
    audio = config.paths.resolve(getattr(config.paths, audio_field))
    with console.status(f"Loading {label} set..."):
        utterances = create_adapter(audio, protocol, "protocol").load(config.n_jobs)  # type: ignore[arg-type]
    console.success(f"Loaded {len(utterances):,} {label} utterances")
    return utterances


def load_eval_sets(config: RunConfig, console: "Console") -> Dict[str, List[Utterance]]:
    """Load every ``paths.eval_sets`` entry, keyed by dataset tag."""
    corpus = {}
    for tag, (protocol, audio) in config.paths.eval_pairs().items():
        with console.status(f"Loading {tag}..."):
            corpus[tag] = create_adapter(audio, protocol, "protocol").load(config.n_jobs)
        console.success(f"Loaded {len(corpus[tag]):,} utterances from {tag}")
    return corpus


def model_from_checkpoint(checkpoint: str, config: RunConfig) -> Tuple[Countermeasure, Dict]:
    """Rebuild the countermeasure stored in ``checkpoint``.

    The encoder section and loss kind recorded in the checkpoint win over
    the ones in ``config``, so evaluation configs need not repeat them.
    """
    validate_file(checkpoint)
    _, metadata = load_checkpoint(checkpoint)
    stored = metadata.get("config") or {}
    encoder = config.encoder
    loss_kind = config.loss.kind
    if "encoder" in stored:
        encoder = build_dataclass(EncoderConfig, stored["encoder"], prefix="encoder.")
        encoder.validate()
    if "loss" in stored and "kind" in stored["loss"]:
        loss_kind = stored["loss"]["kind"]
    if loss_kind not in ("am_softmax", "weighted_ce"):
        raise ConfigurationError(f"checkpoint records unknown loss kind {loss_kind!r}")
    return Countermeasure.from_checkpoint(checkpoint, encoder, config.seed or 0, loss_kind)


def print_training_summary(result: "TrainingResult", output_dir: str, console: "Console") -> None:
    """Print the outcome of a training run."""
    console.print()
    console.success("Training complete!")
    last = result.records[-1]
    best = result.records[result.best_epoch] if result.best_epoch >= 0 else last
    rows = [
        ("epochs", len(result.records)),
        ("final train loss", f"{last.train_loss:.4f}"),
        ("best epoch", best.epoch + 1),
        ("best dev loss", "—" if best.dev_loss is None else f"{best.dev_loss:.4f}"),
        ("best dev EER", "—" if best.dev_eer is None else f"{100 * best.dev_eer:.2f}%"),
    ]
    console.table("Training", ["", "value"], rows)
    console.print(f"Results saved to: [cyan bold]{output_dir}[/cyan bold]")


def print_report(report: "EvalReport", output_dir: str, console: "Console") -> None:
    """Print the EER grid, one row per dataset."""
    console.print()
    console.table(
        "EER (%)",
        ["dataset", *report.conditions],
        [[d, *(report.cell(d, c).eer_percent for c in report.conditions)] for d in report.datasets],
    )
    console.print(f"Results saved to: [cyan bold]{output_dir}[/cyan bold]")
