"""
학습 모듈

Teacher forcing과 two-pass 샘플링 학습, AdamW, 그래디언트 클리핑을 제공합니다.
"""

from .config import OptimizerConfig, SamplingPolicy, TrainerConfig
from .batching import Batch, collate, encode_examples, iterate_batches
from .sampling import (
    SMOOTHING_EPS,
    LossProfile,
    build_second_pass_input,
    first_pass_profile,
    first_pass_profiles,
    position_distribution,
    replacement_count,
    sample_positions,
    uniform_distribution,
)
from .optimizer import AdamWState, adamw_update, clip_gradients, global_grad_norm
from .trainer import (
    LOG_COLUMNS,
    DivergenceError,
    EpochLog,
    TrainState,
    adaptive_ratio,
    current_ratio,
    evaluate_loss,
    log_rows,
    teacher_forcing_loss,
    train,
    train_step,
    two_pass_step,
)

__all__ = [
    "OptimizerConfig",
    "SamplingPolicy",
    "TrainerConfig",
    "Batch",
    "collate",
    "encode_examples",
    "iterate_batches",
    "SMOOTHING_EPS",
    "LossProfile",
    "build_second_pass_input",
    "first_pass_profile",
    "first_pass_profiles",
    "position_distribution",
    "replacement_count",
    "sample_positions",
    "uniform_distribution",
    "AdamWState",
    "adamw_update",
    "clip_gradients",
    "global_grad_norm",
    "LOG_COLUMNS",
    "DivergenceError",
    "EpochLog",
    "TrainState",
    "adaptive_ratio",
    "current_ratio",
    "evaluate_loss",
    "log_rows",
    "teacher_forcing_loss",
    "train",
    "train_step",
    "two_pass_step",
]
