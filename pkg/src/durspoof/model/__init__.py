"""Spectral front-end, Res2Net/residual blocks and the countermeasure model."""

from durspoof.model.blocks import (
    Res2NetBlock,
    Res2NetBlockConfig,
    ResidualBlock,
    SELayer,
    SELayerConfig,
    res2net_forward,
    res2net_parameter_count,
    residual_forward,
    residual_parameter_count,
    se_forward,
    se_parameter_count,
)
from durspoof.model.countermeasure import Countermeasure
from durspoof.model.encoder import (
    DEFAULT_CHANNEL_PLAN,
    NUM_BLOCKS,
    Encoder,
    EncoderConfig,
    count_parameters,
    encoder_forward,
    encoder_parameter_formula,
)
from durspoof.model.frontend import FrontEnd, FrontEndConfig, front_end, log_spectrogram
from durspoof.model.module import ConvBN, Module

__all__ = [
    "ConvBN",
    "Countermeasure",
    "DEFAULT_CHANNEL_PLAN",
    "Encoder",
    "EncoderConfig",
    "FrontEnd",
    "FrontEndConfig",
    "Module",
    "NUM_BLOCKS",
    "Res2NetBlock",
    "Res2NetBlockConfig",
    "ResidualBlock",
    "SELayer",
    "SELayerConfig",
    "count_parameters",
    "encoder_forward",
    "encoder_parameter_formula",
    "front_end",
    "log_spectrogram",
    "res2net_forward",
    "res2net_parameter_count",
    "residual_forward",
    "residual_parameter_count",
    "se_forward",
    "se_parameter_count",
]
