"""
디코딩 모듈

Greedy 탐색과 빔 탐색을 제공합니다.
"""

from .search import Hypothesis, beam_search, greedy_search
from .decoder import (
    EXCLUDED_TOKENS,
    beam_decode,
    beam_hypothesis,
    decode,
    default_max_len,
    greedy_decode,
    greedy_decode_batch,
    greedy_hypothesis,
    model_step_fn,
)

__all__ = [
    "Hypothesis",
    "beam_search",
    "greedy_search",
    "EXCLUDED_TOKENS",
    "beam_decode",
    "beam_hypothesis",
    "decode",
    "default_max_len",
    "greedy_decode",
    "greedy_decode_batch",
    "greedy_hypothesis",
    "model_step_fn",
]
