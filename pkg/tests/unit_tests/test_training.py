"""Tests for the training loop."""

import json

import numpy as np
import pytest

from durspoof.autograd.checkpoint import load_checkpoint
from durspoof.configuration import RunConfig
from durspoof.errors import InputError, NonFiniteError, NonFiniteLossError
from durspoof.model.countermeasure import Countermeasure
from durspoof.training import BEST_CHECKPOINT, LAST_CHECKPOINT, LOG_NAME, RUN_CONFIG, Trainer
from tests.conftest import tiny_run_config


@pytest.fixture
def utterances(make_utterance):
    labels = ["bonafide", "spoof"]
    train = [make_utterance(f"t{i}", 1600 + 400 * i, labels[i % 2], seed=i) for i in range(8)]
    dev = [make_utterance(f"d{i}", 2400, labels[i % 2], seed=100 + i) for i in range(4)]
    return train, dev


def make_config(tmp_path, **overrides):
    return RunConfig.from_dict(tiny_run_config(tmp_path, tmp_path / "run", **overrides)).validate()


class TestTrainer:
    def test_fit_writes_log_and_checkpoints(self, tmp_path, utterances):
        train, dev = utterances
        config = make_config(tmp_path)
        result = Trainer(config, train, dev).fit(tmp_path / "run")

        for name in (LOG_NAME, LAST_CHECKPOINT, BEST_CHECKPOINT, RUN_CONFIG):
            assert (tmp_path / "run" / name).is_file()
        lines = result.log_path.read_text().splitlines()
        assert len(lines) == 2
        records = [json.loads(line) for line in lines]
        assert [r["epoch"] for r in records] == [0, 1]
        assert all(r["n_batches"] == 2 for r in records)
        assert all(r["chunk_min"] == r["chunk_max"] == 3200 for r in records)
        assert all(np.isfinite(r["train_loss"]) and np.isfinite(r["dev_loss"]) for r in records)
        assert sum(r["best"] for r in records) >= 1
        assert records[0]["best"]

        arrays, metadata = load_checkpoint(result.last_checkpoint)
        assert metadata["epoch"] == 1
        assert metadata["config"]["seed"] == 11
        assert arrays["adam.step"][0] == 4

        model, best_meta = Countermeasure.from_checkpoint(result.best_checkpoint, config.encoder, config.seed)
        assert best_meta["epoch"] == result.best_epoch
        assert model.mode == "eval"

    def test_runs_are_bit_identical(self, tmp_path, utterances):
        train, dev = utterances
        config = make_config(tmp_path, chunking={"mode": "dcs", "n_min": 1600, "n_max": 4800})
        Trainer(config, train, dev).fit(tmp_path / "a")
        Trainer(config, train, dev).fit(tmp_path / "b")
        for name in (LOG_NAME, LAST_CHECKPOINT, BEST_CHECKPOINT):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_margins_follow_chunk_durations(self, tmp_path, utterances):
        train, _ = utterances
        config = make_config(
            tmp_path,
            chunking={"mode": "dcs", "n_min": 1600, "n_max": 4800},
            loss={"kind": "am_softmax", "almft": True, "schedule": {"slope": 1.5, "intercept": 0.05, "d_min": 0.1, "d_max": 0.3}},
        )
        trainer = Trainer(config, train)
        stats = trainer.train_epoch(0)
        assert 1600 <= stats["chunk_min"] <= stats["chunk_max"] <= 4800
        assert stats["margin_min"] == pytest.approx(1.5 * stats["chunk_min"] / 16000 + 0.05)
        assert stats["margin_max"] == pytest.approx(1.5 * stats["chunk_max"] / 16000 + 0.05)

    def test_weighted_ce_without_dev(self, tmp_path, utterances):
        train, _ = utterances
        config = make_config(tmp_path, loss={"kind": "weighted_ce"}, optimizer={"lr": 0.01, "batch_size": 4, "epochs": 1})
        result = Trainer(config, train).fit(tmp_path / "wce")
        record = result.records[0]
        assert record.dev_loss is None and record.dev_eer is None
        assert result.best_epoch == 0

    def test_non_finite_loss_names_the_batch(self, tmp_path, utterances):
        train, _ = utterances
        trainer = Trainer(make_config(tmp_path), train)

        def overflow(*args, **kwargs):
            raise NonFiniteError("overflow in exp")

        trainer.model.loss = overflow
        with pytest.raises(NonFiniteLossError) as exc_info:
            trainer.train_epoch(0)
        assert exc_info.value.batch_index == 0
        assert exc_info.value.batch_seed == 11
        assert exc_info.value.epoch == 0
        assert "batch 0 (seed 11, epoch 0)" in str(exc_info.value)

    def test_unlabeled_training_data(self, tmp_path, make_utterance):
        with pytest.raises(InputError, match="labeled"):
            Trainer(make_config(tmp_path), [make_utterance(label="unknown")])
