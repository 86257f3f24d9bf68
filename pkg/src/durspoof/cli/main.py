"""Command-line interface for durspoof."""

import sys
from pathlib import Path
from typing import NoReturn, Optional, Tuple

import click

from durspoof import __version__
from durspoof.cli.utils import (
    load_eval_sets,
    load_run_config,
    load_split,
    model_from_checkpoint,
    print_report,
    print_training_summary,
    validate_file,
    verbosity_from_flags,
)
from durspoof.console import Console, Verbosity
from durspoof.errors import DurspoofError

quiet_option = click.option("-q", "--quiet", is_flag=True, help="Only show errors")
verbose_option = click.option(
    "-v", "--verbose", count=True, help="Increase verbosity (-v for progress bars, -vv for debug)"
)
set_option = click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override a config field, e.g. --set optimizer.epochs=5 (repeatable)",
)


def _abort(console: Console, error: BaseException) -> NoReturn:
    """Report ``error`` as one line on stderr and exit 1."""
    console.error(error)
    if console.verbosity >= Verbosity.DEBUG and not isinstance(error, (DurspoofError, click.ClickException)):
        import traceback

        console.debug("Full error details:")
        traceback.print_exc()
    sys.exit(1)


@click.group()
@click.version_option(version=__version__)
def cli():
    """durspoof - duration-robust speech anti-spoofing at desk scale.

    Train Res2Net countermeasures with dynamic chunk sizes and
    duration-adaptive margins, then measure EER per utterance duration.

    \b
    Examples:
      # Generate a synthetic corpus
      durspoof synth-data --config configs/synth.yaml --seed 7 --out data/synth

      # Train and evaluate
      durspoof train --config configs/desk_dcs_almft.yaml --seed 1 --out runs/almft
      durspoof eval --config configs/desk_dcs_almft.yaml \\
        --checkpoint runs/almft/checkpoint_best.dspk --out runs/almft/eval
    """
    pass


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config (YAML)")
@click.option("--seed", type=int, help="Master seed (overrides the config)")
@click.option("--out", type=click.Path(), help="Output directory (overrides paths.output_dir)")
@set_option
@quiet_option
@verbose_option
def train(
    config_path: str,
    seed: Optional[int],
    out: Optional[str],
    overrides: Tuple[str, ...],
    quiet: bool,
    verbose: int,
):
    """Train a countermeasure and write checkpoints plus a JSONL training log.

    \b
    Writes to the output directory:
      train_log.jsonl         one record per epoch
      checkpoint_best.dspk    lowest dev loss
      checkpoint_last.dspk    final epoch, with optimizer state
      run_config.yaml         the resolved configuration
    """
    console = Console(verbosity_from_flags(quiet, verbose))
    try:
        from durspoof.training import Trainer

        config = load_run_config(config_path, seed, overrides, out, console)
        required = ["train_protocol", "train_audio"]
        if config.paths.dev_protocol is not None:
            required += ["dev_protocol", "dev_audio"]
        config.validate_paths(required)

        console.info(f"Seed: {config.seed}")
        console.info(f"Loss: {config.loss.kind} (ALMFT {'on' if config.loss.almft else 'off'})")
        console.info(f"Chunking: {config.chunking.mode}")

        train_set = load_split(config, "train_protocol", "train_audio", console, "train")
        dev_set = (
            load_split(config, "dev_protocol", "dev_audio", console, "dev")
            if config.paths.dev_protocol is not None
            else []
        )
        trainer = Trainer(config, train_set, dev_set, console)
        console.info(f"Model parameters: {trainer.model.num_parameters():,}")
        result = trainer.fit(config.paths.output_dir)
        print_training_summary(result, config.paths.output_dir, console)
    except Exception as e:
        _abort(console, e)


@cli.command(name="eval")
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config (YAML)")
@click.option("--checkpoint", required=True, type=click.Path(), help="Checkpoint to evaluate")
@click.option("--seed", type=int, help="Master seed (overrides the config)")
@click.option("--out", type=click.Path(), help="Output directory (overrides paths.output_dir)")
@click.option(
    "--format",
    "formats",
    multiple=True,
    type=click.Choice(["csv", "text", "json"]),
    default=["csv", "text"],
    help="Report formats (can specify multiple)",
)
@click.option("--no-variable", is_flag=True, help="Skip the full-length condition")
@set_option
@quiet_option
@verbose_option
def evaluate(
    config_path: str,
    checkpoint: str,
    seed: Optional[int],
    out: Optional[str],
    formats: Tuple[str, ...],
    no_variable: bool,
    overrides: Tuple[str, ...],
    quiet: bool,
    verbose: int,
):
    """Score every eval set at every duration and write the EER report.

    Each utterance is cut or repeat-padded to each duration in
    ``eval_durations``; the ``variable`` column scores it at full length.
    """
    console = Console(verbosity_from_flags(quiet, verbose))
    try:
        from durspoof.evaluation.scoring import evaluate_at_durations

        config = load_run_config(config_path, seed, overrides, out, console)
        config.validate_paths(["eval_sets"])
        with console.status("Loading checkpoint..."):
            model, metadata = model_from_checkpoint(checkpoint, config)
        console.success(f"Loaded checkpoint from epoch {metadata.get('epoch', 0) + 1}")

        corpus = load_eval_sets(config, console)
        report = evaluate_at_durations(
            model,
            corpus,
            config.eval_durations,
            include_variable=not no_variable,
            n_jobs=config.n_jobs,
            console=console,
        )
        report.metadata["checkpoint"] = str(Path(checkpoint).resolve())
        report.metadata["seed"] = config.seed
        report.export(config.paths.output_dir, list(formats))
        print_report(report, config.paths.output_dir, console)
    except Exception as e:
        _abort(console, e)


@cli.command()
@click.option("--config", "config_path", type=click.Path(), help="Run config supplying the seed and output directory")
@click.option("--out", type=click.Path(), help="Output directory [default: ./runs/gradcheck]")
@click.option("--seed", type=int, help="First of five consecutive seeds [default: the config seed, else 0]")
@set_option
@quiet_option
@verbose_option
def gradcheck(
    config_path: Optional[str],
    out: Optional[str],
    seed: Optional[int],
    overrides: Tuple[str, ...],
    quiet: bool,
    verbose: int,
):
    """Run the finite-difference gradient suites in float64.

    Writes ``gradcheck.csv`` and exits 1 if any check fails. With
    ``--config`` the run's seed and ``paths.output_dir`` are used unless
    ``--seed``/``--out`` are given.
    """
    console = Console(verbosity_from_flags(quiet, verbose))
    try:
        from durspoof.errors import ConfigurationError, GradientContractError
        from durspoof.verification import run_gradcheck_suite, write_gradcheck_csv

        if config_path is not None:
            config = load_run_config(config_path, seed, overrides, out, console)
            first_seed = int(config.seed or 0)
            out_dir = config.paths.output_dir
        elif overrides:
            raise ConfigurationError("--set needs --config")
        else:
            first_seed = 0 if seed is None else seed
            out_dir = out or "./runs/gradcheck"
        console.info(f"Seeds: {first_seed}..{first_seed + 4}")

        reports = run_gradcheck_suite(tuple(range(first_seed, first_seed + 5)), console)
        path = write_gradcheck_csv(reports, out_dir)
        failed = [r for r in reports if not r.passed]
        if failed:
            worst = max(failed, key=lambda r: r.max_rel_error)
            raise GradientContractError(
                f"{len(failed)} of {len(reports)} gradient checks failed; worst {worst.name} "
                f"(relative error {worst.max_rel_error:.3e} > {worst.tolerance:g}); see {path}"
            )
        console.print()
        console.success(f"All {len(reports)} gradient checks passed")
        console.print(f"Results saved to: [cyan bold]{path}[/cyan bold]")
    except Exception as e:
        _abort(console, e)


@cli.command(name="synth-data")
@click.option("--config", "config_path", type=click.Path(), help="Synthetic corpus spec (YAML)")
@click.option("--seed", type=int, required=True, help="Master seed")
@click.option("--out", type=click.Path(), required=True, help="Corpus root directory")
@click.option("--n-jobs", type=int, default=1, help="Parallel workers for rendering")
@quiet_option
@verbose_option
def synth_data(
    config_path: Optional[str],
    seed: int,
    out: str,
    n_jobs: int,
    quiet: bool,
    verbose: int,
):
    """Generate a labeled synthetic bonafide/spoof corpus.

    Writes ``<out>/<split>/<utt_id>.wav`` and ``<out>/<split>.protocol.txt``
    for every split in the spec.
    """
    console = Console(verbosity_from_flags(quiet, verbose))
    try:
        from durspoof.data.synthetic import SynthSpec, synth_dataset_generate

        if config_path is not None:
            validate_file(config_path)
            spec = SynthSpec.from_file(config_path)
        else:
            spec = SynthSpec()
        with console.status("Rendering synthetic corpus..."):
            corpus = synth_dataset_generate(spec, out, seed, n_jobs)
        console.success("Synthetic corpus written")
        console.table(
            "Splits",
            ["split", "bonafide", "spoof", "protocol"],
            [[name, b, s, corpus.protocols[name]] for name, (b, s) in corpus.counts.items()],
        )
    except Exception as e:
        _abort(console, e)


@cli.command()
@click.argument("directories", nargs=-1, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), help="Run config whose protocols to summarize")
@click.option("--out", type=click.Path(), default="./runs/stats", help="Output directory")
@click.option("--bin-width", type=float, default=1.0, help="Histogram bin width in seconds")
@click.option("--max-duration", type=float, default=10.0, help="Start of the open last bin")
@set_option
@quiet_option
@verbose_option
def stats(
    directories: Tuple[str, ...],
    config_path: Optional[str],
    out: str,
    bin_width: float,
    max_duration: float,
    overrides: Tuple[str, ...],
    quiet: bool,
    verbose: int,
):
    """Write per-dataset duration histograms (``durations_<tag>.csv``).

    Datasets come from DIRECTORIES of WAV files (tagged by folder name) or
    from the train, dev and eval protocols of --config.
    """
    console = Console(verbosity_from_flags(quiet, verbose))
    try:
        import numpy as np

        from durspoof.data.adapters import create_adapter
        from durspoof.data.statistics import duration_histogram, write_histograms
        from durspoof.errors import ConfigurationError

        adapters = [create_adapter(directory, source_type="directory") for directory in directories]
        if config_path is not None:
            config = load_run_config(config_path, None, overrides, None, console)
            paths = config.paths
            for split in ("train", "dev"):
                protocol = paths.resolve(getattr(paths, f"{split}_protocol"))
                if protocol is not None:
                    adapters.append(create_adapter(paths.resolve(getattr(paths, f"{split}_audio")), protocol, tag=split))
            for tag, (protocol, audio) in paths.eval_pairs().items():
                adapters.append(create_adapter(audio, protocol, tag=tag))
        sources = {adapter.name: adapter for adapter in adapters}
        if not sources:
            raise ConfigurationError("give at least one directory or --config")
        if bin_width <= 0 or max_duration <= 0:
            raise ConfigurationError("--bin-width and --max-duration must be positive")

        edges = np.arange(0.0, max_duration + bin_width / 2, bin_width)
        with console.status("Reading WAV headers..."):
            histograms = duration_histogram({tag: src.paths() for tag, src in sources.items()}, edges)
        written = write_histograms(histograms, out)  # type: ignore[arg-type]
        for tag, frame in histograms.items():  # type: ignore[union-attr]
            console.table(
                f"{tag} ({int(frame['count'].sum()):,} files)",
                ["seconds", "count"],
                [[f"[{r.bin_start:g}, {r.bin_end:g})", r.count] for r in frame.itertuples()],
            )
        console.success(f"Wrote {len(written)} histogram(s) to {out}")
    except Exception as e:
        _abort(console, e)


if __name__ == "__main__":
    cli()
