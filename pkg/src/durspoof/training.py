"""Training loop: DCS or fixed batching, ALMFT margins, dev selection, checkpoints."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from durspoof.autograd.optim import Adam
from durspoof.autograd.tensor import backward, no_grad
from durspoof.configuration import RunConfig
from durspoof.console import Console
from durspoof.data.chunking import BatchSampler, fix_length
from durspoof.data.records import Utterance
from durspoof.errors import InputError, NonFiniteError, NonFiniteLossError, UndefinedMetricError
from durspoof.evaluation.eer import compute_eer_fast
from durspoof.losses import BONAFIDE
from durspoof.model.countermeasure import Countermeasure

LOG_NAME = "train_log.jsonl"
LAST_CHECKPOINT = "checkpoint_last.dspk"
BEST_CHECKPOINT = "checkpoint_best.dspk"
RUN_CONFIG = "run_config.yaml"
DEV_BATCH = 32


@dataclass
class EpochRecord:
    """One line of the training log."""

    epoch: int
    train_loss: float
    dev_loss: Optional[float]
    dev_eer: Optional[float]
    margin_mean: float
    margin_min: float
    margin_max: float
    chunk_mean: float
    chunk_min: int
    chunk_max: int
    n_batches: int
    best: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass
class TrainingResult:
    records: List[EpochRecord]
    log_path: Path
    last_checkpoint: Path
    best_checkpoint: Path
    best_epoch: int
    export_paths: Dict[str, Path] = field(default_factory=dict)


class Trainer:
    """Train a :class:`Countermeasure` under a :class:`RunConfig`.

    Args:
        config: Validated run configuration (seed set).
        train: Labeled training utterances.
        dev: Labeled development utterances; model selection uses their
            loss at ``config.dev_chunk`` samples. Without a dev set the last
            epoch is kept as best.
        console: Output sink; defaults to the config's console.
    """

    def __init__(
        self,
        config: RunConfig,
        train: Sequence[Utterance],
        dev: Sequence[Utterance] = (),
        console: Optional[Console] = None,
    ) -> None:
        """Build the model, the optimizer and the batch sampler."""
        config.validate()
        self.config = config
        self.console = console or config.get_console()
        self.seed: int = config.seed  # type: ignore[assignment]
        self.model = Countermeasure(config.encoder, self.seed, config.loss.kind)
        opt = config.optimizer
        self.optimizer = Adam(self.model.parameters(), opt.lr, opt.betas, opt.eps)
        self.sampler = BatchSampler(train, config.chunking, self.seed, opt.batch_size)
        self.dev = list(dev)
        if any(u.label == "unknown" for u in list(train) + self.dev):
            raise InputError("training and dev utterances must be labeled bonafide or spoof")

    def train_epoch(self, epoch: int) -> Dict[str, Any]:
        """Run one epoch of updates and return loss, margin and chunk statistics."""
        self.model.train()
        losses: List[float] = []
        margins: List[float] = []
        chunks: List[int] = []
        per_epoch = len(self.sampler)
        with self.console.progress(per_epoch, f"Epoch {epoch + 1}") as advance:
            for b, batch in enumerate(self.sampler.epoch(epoch)):
                k = epoch * per_epoch + b
                margin = self.config.loss.margin_for_samples(batch.chunk_size)
                self.optimizer.zero_grad()
                try:
                    loss = self.model.loss(batch.samples, batch.labels, self.config.loss, margin)
                    value = loss.item()
                    if not math.isfinite(value):
                        raise NonFiniteLossError(value, k, self.seed, epoch)
                    backward(loss)
                except NonFiniteLossError:
                    raise
                except NonFiniteError as exc:
                    raise NonFiniteLossError(float("nan"), k, self.seed, epoch) from exc
                self.optimizer.step()
                losses.append(value)
                margins.append(margin)
                chunks.append(batch.chunk_size)
                self.console.debug(f"batch {k}: N={batch.chunk_size} margin={margin:.5f} loss={value:.6f}")
                advance(note=f"loss {value:.4f}")
        return {
            "train_loss": float(np.mean(losses)),
            "margin_mean": float(np.mean(margins)),
            "margin_min": float(np.min(margins)),
            "margin_max": float(np.max(margins)),
            "chunk_mean": float(np.mean(chunks)),
            "chunk_min": int(np.min(chunks)),
            "chunk_max": int(np.max(chunks)),
            "n_batches": len(losses),
        }

    def dev_metrics(self) -> Dict[str, Optional[float]]:
        """Dev loss and EER at the fixed ``dev_chunk`` length, in eval mode."""
        if not self.dev:
            return {"dev_loss": None, "dev_eer": None}
        self.model.eval()
        chunk = self.config.dev_chunk
        margin = self.config.loss.margin_for_samples(chunk)
        total = 0.0
        scores: List[float] = []
        with no_grad():
            for start in range(0, len(self.dev), DEV_BATCH):
                group = self.dev[start : start + DEV_BATCH]
                rows = np.stack([fix_length(u.samples, chunk) for u in group]).astype(np.float32)
                labels = np.array([u.class_id for u in group], dtype=np.int64)
                loss = self.model.loss(rows, labels, self.config.loss, margin)
                total += loss.item() * len(group)
                scores.extend(self.model.score(rows).tolist())
        bonafide = [s for s, u in zip(scores, self.dev) if u.class_id == BONAFIDE]
        spoof = [s for s, u in zip(scores, self.dev) if u.class_id != BONAFIDE]
        try:
            eer: Optional[float] = compute_eer_fast((bonafide, spoof)).eer
        except UndefinedMetricError:
            eer = None
        return {"dev_loss": total / len(self.dev), "dev_eer": eer}

    def _metadata(self, epoch: int, record: EpochRecord) -> Dict[str, Any]:
        return {"epoch": epoch, "record": asdict(record), "config": self.config.to_dict()}

    def fit(self, out_dir: Union[str, Path, None] = None) -> TrainingResult:
        """Train for ``optimizer.epochs`` epochs writing the log and checkpoints.

        Raises:
            NonFiniteLossError: Naming the batch seed and global batch index.
        """
        out = Path(out_dir or self.config.paths.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.config.to_yaml(out / RUN_CONFIG)
        log_path = out / LOG_NAME
        best_path = out / BEST_CHECKPOINT
        last_path = out / LAST_CHECKPOINT
        records: List[EpochRecord] = []
        best_loss = math.inf
        best_epoch = -1
        with open(log_path, "w", encoding="utf-8") as log:
            for epoch in range(self.config.optimizer.epochs):
                stats = self.train_epoch(epoch)
                dev = self.dev_metrics()
                criterion = dev["dev_loss"] if dev["dev_loss"] is not None else stats["train_loss"]
                is_best = criterion < best_loss
                record = EpochRecord(epoch=epoch, **stats, **dev, best=is_best)  # type: ignore[arg-type]
                log.write(record.to_json() + "\n")
                log.flush()
                records.append(record)
                if is_best:
                    best_loss, best_epoch = criterion, epoch
                    self.model.save(best_path, self._metadata(epoch, record))
                self.console.info(
                    f"epoch {epoch + 1}: train {record.train_loss:.4f}"
                    + (f" dev {record.dev_loss:.4f}" if record.dev_loss is not None else "")
                    + (f" EER {100 * record.dev_eer:.2f}%" if record.dev_eer is not None else "")
                )
        self.model.save(last_path, self._metadata(records[-1].epoch, records[-1]), self.optimizer.state_dict())
        return TrainingResult(
            records=records,
            log_path=log_path,
            last_checkpoint=last_path,
            best_checkpoint=best_path,
            best_epoch=best_epoch,
        )
