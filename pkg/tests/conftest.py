"""Shared fixtures: tiny models, utterances and on-disk corpora."""

from pathlib import Path
from typing import Callable

import numpy as np
import pytest
import yaml

from durspoof.data.records import Utterance
from durspoof.data.synthetic import DurationSpec, SplitSpec, SynthSpec, synth_dataset_generate
from durspoof.verification import tiny_encoder_config

TINY_CHUNK = 3200


def tiny_run_config(corpus_root: Path, out_dir: Path, **overrides) -> dict:
    """A run config small enough to train in a few seconds."""
    config = {
        "seed": 11,
        "encoder": {
            "front_end": {"proj_dim": 4, "channels": 2},
            "channels": [[2, 2], [2, 4]],
            "scale": 2,
            "width": 2,
            "se_reduction": 2,
            "reduced_depth": True,
            "dtype": "float64",
        },
        "loss": {"kind": "am_softmax", "almft": True},
        "chunking": {"mode": "fixed", "fixed_len": TINY_CHUNK},
        "optimizer": {"lr": 0.01, "batch_size": 4, "epochs": 2},
        "paths": {
            "train_protocol": str(corpus_root / "train.protocol.txt"),
            "train_audio": str(corpus_root / "train"),
            "dev_protocol": str(corpus_root / "dev.protocol.txt"),
            "dev_audio": str(corpus_root / "dev"),
            "eval_sets": {
                "tiny": {"protocol": str(corpus_root / "eval.protocol.txt"), "audio": str(corpus_root / "eval")}
            },
            "output_dir": str(out_dir),
        },
        "eval_durations": [0.1, 0.2],
        "dev_chunk": TINY_CHUNK,
    }
    for key, value in overrides.items():
        config[key] = value
    return config


@pytest.fixture
def tiny_config():
    """Two-block float64 encoder used by the gradient checks."""
    return tiny_encoder_config()


@pytest.fixture
def make_utterance() -> Callable[..., Utterance]:
    """Factory for labeled utterances with seeded noise samples."""

    def _make(utt_id: str = "utt", n_samples: int = 1600, label: str = "bonafide", seed: int = 0) -> Utterance:
        rng = np.random.default_rng(seed)
        samples = (0.1 * rng.standard_normal(n_samples)).astype(np.float32)
        return Utterance(id=utt_id, samples=samples, label=label)

    return _make


@pytest.fixture
def tiny_corpus(tmp_path: Path) -> Path:
    """Synthetic corpus with short utterances: 8 train, 4 dev, 6 eval."""
    spec = SynthSpec(
        splits={
            "train": SplitSpec(bonafide=4, spoof=4),
            "dev": SplitSpec(bonafide=2, spoof=2),
            "eval": SplitSpec(bonafide=3, spoof=3),
        },
        durations=DurationSpec(distribution="uniform", min=0.1, max=0.3),
    )
    root = tmp_path / "corpus"
    synth_dataset_generate(spec, root, seed=3)
    return root


@pytest.fixture
def tiny_config_file(tmp_path: Path, tiny_corpus: Path) -> Path:
    """YAML run config pointing at ``tiny_corpus``."""
    path = tmp_path / "tiny.yaml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(tiny_run_config(tiny_corpus, tmp_path / "run"), f, sort_keys=False)
    return path
