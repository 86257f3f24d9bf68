"""Run configuration: every knob of a training or evaluation run."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from durspoof.console import Console, Verbosity
from durspoof.data.chunking import BATCH_SIZE, ChunkPolicy
from durspoof.errors import ConfigurationError
from durspoof.losses import LossConfig
from durspoof.model.encoder import EncoderConfig
from durspoof.utils import build_dataclass, dataclass_to_dict, load_yaml, set_dotted


@dataclass(kw_only=True)
class OptimizerConfig:
    """Adam with a fixed learning rate."""

    lr: float = field(default=1e-6, metadata={"description": "Fixed learning rate"})
    betas: Tuple[float, float] = field(default=(0.9, 0.999), metadata={"description": "Adam moment decay rates"})
    eps: float = field(default=1e-8, metadata={"description": "Adam denominator guard"})
    batch_size: int = field(default=BATCH_SIZE, metadata={"description": "Utterances per batch"})
    epochs: int = field(default=100, metadata={"description": "Training epochs"})

    def __post_init__(self) -> None:
        self.betas = tuple(float(b) for b in self.betas)  # type: ignore[assignment]

    def validate(self) -> None:
        if self.lr <= 0:
            raise ConfigurationError(f"optimizer.lr must be positive, got {self.lr}")
        if len(self.betas) != 2 or not all(0 <= b < 1 for b in self.betas):
            raise ConfigurationError(f"optimizer.betas must be two values in [0, 1), got {self.betas}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigurationError(
                f"batch_size and epochs must be positive, got {self.batch_size}, {self.epochs}"
            )


@dataclass(kw_only=True)
class PathsConfig:
    """Corpus locations and the output directory.

    Protocol paths point at five-field protocol files; audio roots hold
    ``<utterance_id>.wav``. ``eval_sets`` maps dataset tags to
    ``{protocol, audio}`` pairs for the evaluation grid.
    """

    train_protocol: Optional[str] = None
    train_audio: Optional[str] = None
    dev_protocol: Optional[str] = None
    dev_audio: Optional[str] = None
    eval_sets: Dict[str, Dict[str, str]] = field(default_factory=dict)
    output_dir: str = field(default="./runs/default", metadata={"description": "Checkpoints, logs and reports"})
    base_dir: Optional[str] = field(
        default=None,
        repr=False,
        metadata={"description": "Directory relative paths are resolved against (the config file's folder)"},
    )

    def resolve(self, value: Optional[str]) -> Optional[Path]:
        if value is None:
            return None
        path = Path(value).expanduser()
        if not path.is_absolute() and self.base_dir is not None:
            path = Path(self.base_dir) / path
        return path

    def eval_pairs(self) -> Dict[str, Tuple[Path, Path]]:
        pairs = {}
        for tag, entry in self.eval_sets.items():
            if not isinstance(entry, Mapping) or set(entry) != {"protocol", "audio"}:
                raise ConfigurationError(f"paths.eval_sets.{tag} needs exactly 'protocol' and 'audio'")
            pairs[tag] = (self.resolve(entry["protocol"]), self.resolve(entry["audio"]))
        return pairs  # type: ignore[return-value]


@dataclass(kw_only=True)
class RunConfig:
    """The configuration of a durspoof run."""

    seed: Optional[int] = field(default=None, metadata={"description": "Master seed; mandatory"})
    encoder: EncoderConfig = field(default_factory=EncoderConfig, metadata={"description": "Encoder architecture"})
    loss: LossConfig = field(default_factory=LossConfig, metadata={"description": "Training objective"})
    chunking: ChunkPolicy = field(default_factory=ChunkPolicy, metadata={"description": "Training chunk policy"})
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig, metadata={"description": "Adam settings"})
    paths: PathsConfig = field(default_factory=PathsConfig, metadata={"description": "Corpus and output paths"})
    eval_durations: List[float] = field(
        default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        metadata={"description": "Fixed evaluation durations in seconds"},
    )
    dev_chunk: int = field(default=64600, metadata={"description": "Samples per dev utterance for the dev loss"})
    n_jobs: int = field(default=1, metadata={"description": "joblib workers for loading and scoring"})
    verbosity: Verbosity = field(
        default=Verbosity.SILENT,
        metadata={"description": "Verbosity level: SILENT (0), QUIET (1), NORMAL (2), VERBOSE (3), DEBUG (4)."},
    )
    console: Optional[Console] = field(
        default=None, repr=False, metadata={"description": "Console instance for output. Not serialized."}
    )

    def __post_init__(self) -> None:
        """Normalize verbosity and create the console."""
        if isinstance(self.verbosity, int) and not isinstance(self.verbosity, Verbosity):
            self.verbosity = Verbosity(self.verbosity)
        if self.console is None:
            self.console = Console(self.verbosity)

    def get_console(self) -> Console:
        if self.console is None:
            self.console = Console(self.verbosity)
        return self.console

    def validate(self) -> "RunConfig":
        """Check every section.

        Raises:
            ConfigurationError: On a missing seed or any invalid value.
        """
        if self.seed is None:
            raise ConfigurationError("seed is mandatory (set it in the config or pass --seed)")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        self.encoder.validate()
        self.loss.validate()
        self.chunking.validate()
        self.optimizer.validate()
        if self.dev_chunk <= 0:
            raise ConfigurationError(f"dev_chunk must be positive, got {self.dev_chunk}")
        if not self.eval_durations or min(self.eval_durations) <= 0:
            raise ConfigurationError(f"eval_durations must be positive, got {self.eval_durations}")
        if self.n_jobs == 0:
            raise ConfigurationError("n_jobs must be non-zero (use -1 for all cores)")
        return self

    def validate_paths(self, required: Iterable[str]) -> None:
        """Check that the named path fields (and every eval set when ``eval_sets`` is named) exist.

        Raises:
            ConfigurationError: Naming the first missing field or path.
        """
        for name in required:
            if name == "eval_sets":
                pairs = self.paths.eval_pairs()
                if not pairs:
                    raise ConfigurationError("paths.eval_sets is empty")
                for tag, (protocol, audio) in pairs.items():
                    if not protocol.is_file():
                        raise ConfigurationError(f"paths.eval_sets.{tag}.protocol not found: {protocol}")
                    if not audio.is_dir():
                        raise ConfigurationError(f"paths.eval_sets.{tag}.audio not found: {audio}")
                continue
            value = self.paths.resolve(getattr(self.paths, name))
            if value is None:
                raise ConfigurationError(f"paths.{name} is not set")
            if not value.exists():
                raise ConfigurationError(f"paths.{name} not found: {value}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Optional[Union[str, Path]] = None) -> "RunConfig":
        """Build from a nested mapping; unknown keys raise :class:`ConfigurationError`."""
        data = dict(data)
        if "console" in data:
            raise ConfigurationError("unknown config key 'console'")
        config = build_dataclass(cls, data)
        if base_dir is not None and config.paths.base_dir is None:
            config.paths.base_dir = str(base_dir)
        return config

    @classmethod
    def from_file(
        cls, path: Union[str, Path], overrides: Sequence[str] = ()
    ) -> "RunConfig":
        """Load a YAML config, apply ``key=value`` overrides, and validate."""
        data = apply_overrides(load_yaml(path), overrides)
        return cls.from_dict(data, base_dir=Path(path).resolve().parent).validate()

    def to_dict(self) -> Dict[str, Any]:
        data = dataclass_to_dict(self)
        data.pop("console", None)
        data["paths"].pop("base_dir", None)
        return data

    def to_yaml(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=False)
        return path


def apply_overrides(data: Mapping[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Return a copy of ``data`` with ``dotted.key=value`` overrides applied.

    Values are parsed as YAML scalars, so ``3``, ``1e-4``, ``true`` and
    ``[1, 2]`` become numbers, booleans and lists.
    """
    result: Dict[str, Any] = yaml.safe_load(yaml.safe_dump(dict(data))) or {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"override {item!r} must look like 'section.key=value'")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"override {item!r}: unparsable value ({exc})") from exc
        set_dotted(result, key.strip(), value)
    return result
