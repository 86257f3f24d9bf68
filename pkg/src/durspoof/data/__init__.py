"""Audio ingestion, protocols, batching, synthetic corpora and duration statistics."""

from durspoof.data.adapters import (
    DataSource,
    DirectoryCorpusAdapter,
    ProtocolCorpusAdapter,
    create_adapter,
)
from durspoof.data.audio import load_wav, wav_duration, write_wav
from durspoof.data.chunking import (
    BatchSampler,
    ChunkPolicy,
    chunk_size_for_batch,
    dcs_sample_chunk_size,
    fix_length,
    make_batch,
)
from durspoof.data.protocol import parse_protocol, write_protocol
from durspoof.data.records import SAMPLE_RATE, Batch, ProtocolEntry, Utterance
from durspoof.data.statistics import duration_histogram, histogram_from_durations, write_histograms
from durspoof.data.synthetic import SynthCorpus, SynthSpec, synth_dataset_generate

__all__ = [
    "Batch",
    "BatchSampler",
    "ChunkPolicy",
    "DataSource",
    "DirectoryCorpusAdapter",
    "ProtocolCorpusAdapter",
    "ProtocolEntry",
    "SAMPLE_RATE",
    "SynthCorpus",
    "SynthSpec",
    "Utterance",
    "chunk_size_for_batch",
    "create_adapter",
    "dcs_sample_chunk_size",
    "duration_histogram",
    "fix_length",
    "histogram_from_durations",
    "load_wav",
    "make_batch",
    "parse_protocol",
    "synth_dataset_generate",
    "wav_duration",
    "write_histograms",
    "write_protocol",
    "write_wav",
]
