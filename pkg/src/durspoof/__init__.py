"""durspoof: duration-robust speech anti-spoofing at desk scale."""

from durspoof.configuration import RunConfig
from durspoof.console import Console, Verbosity
from durspoof.data.records import Utterance
from durspoof.evaluation import compute_eer, compute_eer_fast, evaluate_at_durations
from durspoof.losses import LossConfig, MarginSchedule, am_softmax_loss
from durspoof.model import Countermeasure, EncoderConfig
from durspoof.result import EvalReport
from durspoof.training import Trainer

__version__ = "0.1.0"

__all__ = [
    "Console",
    "Countermeasure",
    "EncoderConfig",
    "EvalReport",
    "LossConfig",
    "MarginSchedule",
    "RunConfig",
    "Trainer",
    "Utterance",
    "Verbosity",
    "am_softmax_loss",
    "compute_eer",
    "compute_eer_fast",
    "evaluate_at_durations",
    "__version__",
]
