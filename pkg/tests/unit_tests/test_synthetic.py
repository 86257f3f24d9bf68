"""Tests for the synthetic corpus generator."""

import numpy as np
import pytest

from durspoof.data.audio import load_wav
from durspoof.data.protocol import parse_protocol
from durspoof.data.synthetic import (
    ArtifactSpec,
    DurationSpec,
    SplitSpec,
    SynthSpec,
    bonafide_waveform,
    sample_durations,
    spoof_waveform,
    synth_dataset_generate,
)
from durspoof.errors import ConfigurationError


@pytest.fixture
def small_spec():
    return SynthSpec(
        splits={"train": SplitSpec(bonafide=3, spoof=2), "eval": SplitSpec(bonafide=1, spoof=2)},
        durations=DurationSpec(distribution="uniform", min=0.1, max=0.2),
    )


class TestWaveforms:
    def test_bonafide_is_bounded_and_seeded(self):
        a = bonafide_waveform(1600, np.random.default_rng(0))
        b = bonafide_waveform(1600, np.random.default_rng(0))
        np.testing.assert_array_equal(a, b)
        assert a.shape == (1600,)
        assert np.max(np.abs(a)) < 1.0

    def test_spoof_is_quantized(self):
        artifacts = ArtifactSpec(quant_bits=4, noise_level=0.0)
        wave = spoof_waveform(3200, np.random.default_rng(1), artifacts)
        levels = 2 ** (artifacts.quant_bits - 1)
        np.testing.assert_allclose(wave * levels, np.round(wave * levels))
        assert len(np.unique(wave)) <= 2 * levels

    @pytest.mark.parametrize(
        "kwargs",
        [{"phase_jump_interval": 0}, {"notch_hz": 9000}, {"quant_bits": 1}, {"noise_level": -1}],
    )
    def test_invalid_artifacts(self, kwargs):
        with pytest.raises(ConfigurationError):
            ArtifactSpec(**kwargs).validate()


class TestDurations:
    def test_uniform_range(self):
        spec = SynthSpec(durations=DurationSpec(min=1.0, max=2.0))
        values = sample_durations(spec, np.random.default_rng(0), 500)
        assert values.min() >= 1.0 and values.max() <= 2.0

    def test_lognormal_is_clipped(self):
        spec = SynthSpec(durations=DurationSpec(distribution="lognormal", min=0.5, max=4.0, median=3.0, sigma=1.0))
        values = sample_durations(spec, np.random.default_rng(0), 2000)
        assert values.min() >= 0.5 and values.max() <= 4.0
        assert np.median(values) == pytest.approx(3.0, rel=0.1)

    def test_weighted_choices(self):
        spec = SynthSpec(durations=DurationSpec(distribution="choices", choices=[1.0, 5.0], weights=[0.0, 1.0]))
        assert set(sample_durations(spec, np.random.default_rng(0), 50)) == {5.0}

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"distribution": "gamma"},
            {"min": 3.0, "max": 2.0},
            {"min": 0.0},
            {"distribution": "choices"},
            {"distribution": "choices", "choices": [1.0], "weights": [1.0, 2.0]},
            {"distribution": "lognormal", "sigma": 0.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigurationError):
            DurationSpec(**kwargs).validate()


class TestSynthSpec:
    def test_from_dict(self):
        spec = SynthSpec.from_dict(
            {"splits": {"dev": {"bonafide": 2, "spoof": 3}}, "durations": {"min": 1.0, "max": 2.0}}
        )
        assert spec.splits["dev"].total == 5
        assert spec.durations.max == 2.0

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="unknown config key"):
            SynthSpec.from_dict({"splits": {"dev": {"bonafide": 1, "fake": 1}}})

    def test_empty_split(self):
        with pytest.raises(ConfigurationError):
            SynthSpec.from_dict({"splits": {"dev": {"bonafide": 0, "spoof": 0}}})

    def test_from_file(self, tmp_path):
        path = tmp_path / "synth.yaml"
        path.write_text("splits:\n  train: {bonafide: 1, spoof: 1}\ndurations:\n  distribution: uniform\n  min: 0.5\n  max: 1.0\n")
        spec = SynthSpec.from_file(path)
        assert list(spec.splits) == ["train"]


class TestSynthDatasetGenerate:
    def test_layout_and_counts(self, tmp_path, small_spec):
        corpus = synth_dataset_generate(small_spec, tmp_path / "synth", seed=4)
        assert corpus.counts == {"train": (3, 2), "eval": (1, 2)}
        assert corpus.protocols["train"] == tmp_path / "synth" / "train.protocol.txt"
        entries = parse_protocol(corpus.protocols["train"])
        assert [e.utterance_id for e in entries] == [f"train_{i:06d}" for i in range(5)]
        assert sorted(e.key for e in entries) == ["bonafide"] * 3 + ["spoof"] * 2
        for entry in entries:
            utt = load_wav(tmp_path / "synth" / "train" / f"{entry.utterance_id}.wav", entry.key)
            assert 0.1 - 1e-4 <= utt.duration <= 0.2 + 1e-4
            assert (entry.system_id == "-") == (entry.key == "bonafide")

    def test_same_seed_same_bytes(self, tmp_path, small_spec):
        synth_dataset_generate(small_spec, tmp_path / "a", seed=9)
        synth_dataset_generate(small_spec, tmp_path / "b", seed=9, n_jobs=2)
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        assert len(files) == 2 + 8
        for rel in files:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_different_seed_different_audio(self, tmp_path, small_spec):
        synth_dataset_generate(small_spec, tmp_path / "a", seed=1)
        synth_dataset_generate(small_spec, tmp_path / "b", seed=2)
        wav = "eval/eval_000000.wav"
        assert (tmp_path / "a" / wav).read_bytes() != (tmp_path / "b" / wav).read_bytes()
