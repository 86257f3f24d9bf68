"""Encoder plus classification head, with checkpoint (de)serialization."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from durspoof.autograd import ops
from durspoof.autograd.checkpoint import load_checkpoint, save_checkpoint
from durspoof.autograd.tensor import Tensor, no_grad
from durspoof.errors import DimensionError, InputError
from durspoof.losses import NUM_CLASSES, LossConfig, LossKind, am_softmax_loss, scores_from_embeddings, weighted_ce_loss
from durspoof.model.encoder import Encoder, EncoderConfig
from durspoof.model.module import Mode, Module, lecun_normal


class Countermeasure(Module):
    """Utterance-level bonafide/spoof classifier.

    Args:
        config: Encoder architecture.
        seed: Seed for parameter initialization.
        loss_kind: Objective the head is trained with; decides how scores
            are derived.
    """

    def __init__(self, config: EncoderConfig, seed: int, loss_kind: LossKind = "am_softmax") -> None:
        """Build the encoder and the ``[D, 2]`` head."""
        super().__init__()
        self.config = config
        self.seed = seed
        self.loss_kind = loss_kind
        self.encoder = self.add_module("encoder", Encoder(config, seed))
        rng = np.random.default_rng([seed, 1])
        dim = config.embedding_dim
        self.head = self.add_parameter(
            "head", lecun_normal(rng, (dim, NUM_CLASSES), dim, config.numpy_dtype)
        )
        self.mode: Mode = "train"

    def train(self) -> "Countermeasure":
        self.mode = "train"
        return self

    def eval(self) -> "Countermeasure":
        self.mode = "eval"
        return self

    def embed(self, samples: np.ndarray) -> Tensor:
        return self.encoder(samples, self.mode)

    def loss(self, samples: np.ndarray, labels: np.ndarray, loss_config: LossConfig, margin: float) -> Tensor:
        """Training loss of a batch under ``loss_config`` with AM-Softmax margin ``margin``."""
        embeddings = self.embed(samples)
        if loss_config.kind == "am_softmax":
            return am_softmax_loss(embeddings, labels, self.head, loss_config.am_softmax, margin)
        return weighted_ce_loss(ops.matmul(embeddings, self.head), labels, loss_config.class_weights)

    def score(self, samples: np.ndarray) -> np.ndarray:
        """Bonafide scores for a batch ``[N, L]`` (or one waveform), without recording gradients."""
        batch = np.atleast_2d(samples)
        with no_grad():
            return scores_from_embeddings(self.embed(batch), self.head, self.loss_kind)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Parameters and BN running statistics in a stable order."""
        arrays = {name: t.data for name, t in self.named_parameters()}
        for name, stats in self.named_stats():
            arrays[f"{name}.running_mean"] = stats.mean
            arrays[f"{name}.running_var"] = stats.var
        return arrays

    def load_state_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Overwrite parameters and statistics in place.

        Raises:
            InputError: If a name is missing.
            DimensionError: If a shape differs.
        """
        targets: Dict[str, Tuple[Any, str]] = {}
        for name, tensor in self.named_parameters():
            targets[name] = (tensor, "data")
        for name, stats in self.named_stats():
            targets[f"{name}.running_mean"] = (stats, "mean")
            targets[f"{name}.running_var"] = (stats, "var")
        missing = [name for name in targets if name not in arrays]
        if missing:
            raise InputError(f"checkpoint is missing {len(missing)} arrays, e.g. {missing[0]!r}")
        for name, (owner, attr) in targets.items():
            current = getattr(owner, attr)
            value = np.asarray(arrays[name])
            if value.shape != current.shape:
                raise DimensionError(f"load[{name}]", current.shape, value.shape)
            current[...] = value.astype(current.dtype)

    def save(
        self,
        path: Union[str, Path],
        metadata: Optional[Mapping[str, Any]] = None,
        extra_arrays: Optional[Mapping[str, np.ndarray]] = None,
    ) -> Path:
        arrays = dict(self.state_arrays())
        arrays.update(extra_arrays or {})
        return save_checkpoint(path, arrays, metadata)

    @classmethod
    def from_checkpoint(
        cls, path: Union[str, Path], config: EncoderConfig, seed: int, loss_kind: LossKind = "am_softmax"
    ) -> Tuple["Countermeasure", Dict[str, Any]]:
        """Rebuild a model from ``path``; returns it in eval mode with the checkpoint metadata."""
        arrays, metadata = load_checkpoint(path)
        model = cls(config, seed, loss_kind)
        model.load_state_arrays(arrays)
        return model.eval(), metadata
