"""
G2P 모델 모듈

바이트 입력 트랜스포머 인코더-디코더와 체크포인트 입출력을 제공합니다.
"""

from .config import (
    BOS_ID,
    EOS_ID,
    N_SPECIAL_TOKENS,
    PAD_ID,
    SRC_PAD_ID,
    SRC_VOCAB_SIZE,
    ConfigError,
    ModelConfig,
    SequenceLengthError,
    validate_model_config,
)
from .params import ModelParams, init_model, parameter_layout
from . import transformer
from .transformer import (
    EncoderOutput,
    decoder_forward,
    encode,
    forward,
    next_token_distribution,
    next_token_log_probs,
    sinusoidal_positions,
)
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "BOS_ID",
    "EOS_ID",
    "N_SPECIAL_TOKENS",
    "PAD_ID",
    "SRC_PAD_ID",
    "SRC_VOCAB_SIZE",
    "ConfigError",
    "ModelConfig",
    "SequenceLengthError",
    "validate_model_config",
    "ModelParams",
    "init_model",
    "parameter_layout",
    "transformer",
    "EncoderOutput",
    "decoder_forward",
    "encode",
    "forward",
    "next_token_distribution",
    "next_token_log_probs",
    "sinusoidal_positions",
    "CheckpointError",
    "load_checkpoint",
    "save_checkpoint",
]
