"""Tests for WAV decoding, protocol files and corpus adapters."""

import numpy as np
import pytest
import soundfile as sf

from durspoof.data.adapters import (
    DirectoryCorpusAdapter,
    ProtocolCorpusAdapter,
    create_adapter,
)
from durspoof.data.audio import check_wav_header, load_wav, wav_duration, write_wav
from durspoof.data.protocol import parse_protocol, write_protocol
from durspoof.data.records import ProtocolEntry, Utterance
from durspoof.errors import AudioFormatError, ConfigurationError, InputError, ProtocolParseError


class TestWav:
    def test_round_trip_within_one_quantization_step(self, tmp_path):
        samples = np.random.default_rng(0).uniform(-0.9, 0.9, 4000)
        path = write_wav(tmp_path / "a.wav", samples)
        utt = load_wav(path, label="spoof")
        assert utt.id == "a"
        assert utt.label == "spoof"
        assert utt.samples.dtype == np.float32
        assert np.max(np.abs(utt.samples - samples)) <= 1 / 32768
        assert utt.duration == pytest.approx(0.25)
        assert wav_duration(path) == pytest.approx(0.25)

    def test_samples_clipped_to_pcm_range(self, tmp_path):
        path = write_wav(tmp_path / "loud.wav", np.array([2.0, -2.0, 0.0]))
        samples = load_wav(path).samples
        assert samples.max() < 1.0
        assert samples.min() == -1.0

    def test_explicit_utterance_id(self, tmp_path):
        path = write_wav(tmp_path / "file.wav", np.zeros(10))
        assert load_wav(path, utterance_id="LA_0001").id == "LA_0001"

    @pytest.mark.parametrize(
        "data,rate,kwargs,field",
        [
            (np.zeros((100, 2)), 16000, {"subtype": "PCM_16"}, "channels"),
            (np.zeros(100), 8000, {"subtype": "PCM_16"}, "sample rate"),
            (np.zeros(100), 16000, {"subtype": "FLOAT"}, "subtype"),
            (np.zeros(100), 16000, {"format": "FLAC", "subtype": "PCM_16"}, "container"),
        ],
    )
    def test_rejects_other_formats(self, tmp_path, data, rate, kwargs, field):
        path = tmp_path / "bad.wav"
        sf.write(str(path), data, rate, **kwargs)
        with pytest.raises(AudioFormatError) as exc_info:
            load_wav(path)
        assert exc_info.value.field == field

    def test_not_audio_at_all(self, tmp_path):
        path = tmp_path / "text.wav"
        path.write_text("hello")
        with pytest.raises(AudioFormatError) as exc_info:
            check_wav_header(path)
        assert exc_info.value.field == "container"

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            load_wav(tmp_path / "nope.wav")


class TestUtterance:
    def test_labels_map_to_class_ids(self, make_utterance):
        assert make_utterance(label="spoof").class_id == 0
        assert make_utterance(label="bonafide").class_id == 1

    @pytest.mark.parametrize(
        "kwargs",
        [{"sample_rate": 8000}, {"label": "fake"}, {"samples": np.array([])}],
    )
    def test_invalid(self, kwargs):
        base = {"id": "x", "samples": np.zeros(10), "sample_rate": 16000, "label": "bonafide"}
        base.update(kwargs)
        with pytest.raises(InputError):
            Utterance(**base)


class TestProtocol:
    def test_round_trip(self, tmp_path):
        entries = [
            ProtocolEntry("LA_0079", "LA_T_1138215", "-", "bonafide"),
            ProtocolEntry("LA_0079", "LA_T_1271820", "A01", "spoof", gender="f"),
        ]
        path = write_protocol(tmp_path / "p.txt", entries)
        assert path.read_text().splitlines()[0] == "LA_0079 LA_T_1138215 - - bonafide"
        assert parse_protocol(path) == entries

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("\nA u1 - - bonafide\n\n  \nA u2 - S1 spoof\n")
        assert [e.utterance_id for e in parse_protocol(path)] == ["u1", "u2"]

    def test_wrong_field_count_reports_the_line(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("A u1 - - bonafide\nA u2 - spoof\n")
        with pytest.raises(ProtocolParseError) as exc_info:
            parse_protocol(path)
        assert exc_info.value.line_number == 2
        assert "expected 5 fields, found 4" in str(exc_info.value)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("\nA u1 - - genuine\n")
        with pytest.raises(ProtocolParseError) as exc_info:
            parse_protocol(path)
        assert exc_info.value.line_number == 2


class TestAdapters:
    def test_protocol_adapter_loads_labels_in_file_order(self, tiny_corpus):
        adapter = create_adapter(tiny_corpus / "dev", tiny_corpus / "dev.protocol.txt")
        assert isinstance(adapter, ProtocolCorpusAdapter)
        entries = parse_protocol(tiny_corpus / "dev.protocol.txt")
        utterances = adapter.load()
        assert [u.id for u in utterances] == [e.utterance_id for e in entries]
        assert [u.label for u in utterances] == [e.key for e in entries]

    def test_parallel_load_matches_serial(self, tiny_corpus):
        adapter = ProtocolCorpusAdapter(tiny_corpus / "eval.protocol.txt", tiny_corpus / "eval")
        serial = adapter.load(n_jobs=1)
        parallel = adapter.load(n_jobs=2)
        for a, b in zip(serial, parallel):
            assert a.id == b.id
            np.testing.assert_array_equal(a.samples, b.samples)

    def test_missing_audio(self, tiny_corpus):
        (tiny_corpus / "dev" / "dev_000000.wav").unlink()
        adapter = ProtocolCorpusAdapter(tiny_corpus / "dev.protocol.txt", tiny_corpus / "dev")
        with pytest.raises(InputError, match="missing"):
            adapter.load()

    def test_missing_protocol(self, tmp_path):
        with pytest.raises(InputError, match="protocol file not found"):
            ProtocolCorpusAdapter(tmp_path / "none.txt", tmp_path).paths()

    def test_directory_adapter(self, tmp_path):
        for name in ("b", "a", "c"):
            write_wav(tmp_path / f"{name}.wav", np.zeros(160))
        (tmp_path / "notes.txt").write_text("ignored")
        adapter = create_adapter(tmp_path)
        assert isinstance(adapter, DirectoryCorpusAdapter)
        utterances = adapter.load()
        assert [u.id for u in utterances] == ["a", "b", "c"]
        assert all(u.label == "unknown" for u in utterances)

    def test_source_names(self, tiny_corpus):
        dev = create_adapter(tiny_corpus / "dev", tiny_corpus / "dev.protocol.txt")
        assert dev.name == "dev"
        assert dev.source.kind == "protocol"
        assert dev.source.protocol == tiny_corpus / "dev.protocol.txt"
        tagged = create_adapter(tiny_corpus / "eval", tiny_corpus / "eval.protocol.txt", tag="tiny")
        assert tagged.name == "tiny"
        assert create_adapter(tiny_corpus / "train", source_type="directory").source.kind == "directory"

    def test_directory_adapter_needs_a_directory(self, tmp_path):
        with pytest.raises(InputError):
            DirectoryCorpusAdapter(tmp_path / "missing").paths()

    def test_unknown_source_type(self, tmp_path):
        with pytest.raises(ConfigurationError, match="Unsupported source type"):
            create_adapter(tmp_path, source_type="s3")

    def test_protocol_type_needs_a_protocol(self, tmp_path):
        with pytest.raises(ConfigurationError):
            create_adapter(tmp_path, source_type="protocol")
