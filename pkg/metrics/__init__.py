"""
평가 지표 모듈

편집 거리 기반 PER/WER, 이의어 정확도, AccErr 노출 편향 곡선을 제공합니다.
"""

from .edit_distance import AlignmentStep, edit_count, edit_distance
from .scoring import EvalReport, score_corpus, score_token_hypotheses, split_words
from .heteronyms import context_free_accuracy, pronunciation_counts
from .exposure import (
    ACCERR_COLUMNS,
    DENOMINATOR_GUARD,
    ExposureBiasReport,
    accerr_curve,
    accerr_from_losses,
    per_step_losses,
)

__all__ = [
    "AlignmentStep",
    "edit_count",
    "edit_distance",
    "EvalReport",
    "score_corpus",
    "score_token_hypotheses",
    "split_words",
    "context_free_accuracy",
    "pronunciation_counts",
    "ACCERR_COLUMNS",
    "DENOMINATOR_GUARD",
    "ExposureBiasReport",
    "accerr_curve",
    "accerr_from_losses",
    "per_step_losses",
]
