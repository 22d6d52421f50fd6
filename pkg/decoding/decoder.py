"""
모델 기반 greedy / beam 디코딩

PAD와 BOS는 출력 후보에서 제외하고, EOS에서 멈춥니다. 매 스텝 전체 prefix를
다시 계산합니다.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from g2p_model import BOS_ID, EOS_ID, PAD_ID, SRC_PAD_ID, EncoderOutput, ModelParams, transformer
from tensor_core import no_grad

from .search import Hypothesis, StepFn, mask_tokens, beam_search, greedy_search


EXCLUDED_TOKENS = (PAD_ID, BOS_ID)
MAX_LEN_FACTOR = 2
MAX_LEN_OFFSET = 16


def default_max_len(src_len: int, params: Optional[ModelParams] = None) -> int:
    """2 × 소스 바이트 길이 + 16 (모델 최대 타깃 길이를 넘지 않음)"""
    max_len = MAX_LEN_FACTOR * src_len + MAX_LEN_OFFSET
    if params is not None:
        max_len = min(max_len, params.config.max_tgt_len)
    return max_len


def _resolve_max_len(params: ModelParams, src_len: int, max_len: Optional[int]) -> int:
    if max_len is None:
        return default_max_len(src_len, params)
    # prefix(BOS 포함) 길이가 max_tgt_len을 넘지 않도록
    return max(0, min(max_len, params.config.max_tgt_len))


def _encode(params: ModelParams, src) -> EncoderOutput:
    with no_grad():
        return transformer.encode(params, src)


def model_step_fn(params: ModelParams, enc: EncoderOutput) -> StepFn:
    """인코더 출력에 고정된 step 함수"""

    def step(prefixes: Sequence[Tuple[int, ...]]) -> np.ndarray:
        batch = np.array([(BOS_ID,) + tuple(p) for p in prefixes], dtype=np.int64)
        memory = enc if len(prefixes) == 1 else enc.repeat(len(prefixes))
        return transformer.next_token_log_probs(params, memory, batch)

    return step


def greedy_hypothesis(params: ModelParams, src_bytes: Sequence[int], max_len: Optional[int] = None) -> Hypothesis:
    enc = _encode(params, list(src_bytes))
    limit = _resolve_max_len(params, len(src_bytes), max_len)
    return greedy_search(model_step_fn(params, enc), limit, EOS_ID, EXCLUDED_TOKENS)


def greedy_decode(params: ModelParams, src_bytes: Sequence[int], max_len: Optional[int] = None) -> List[int]:
    """
    Greedy 디코딩

    Args:
        params: 모델 파라미터
        src_bytes: 소스 바이트 토큰
        max_len: 최대 출력 토큰 수 (기본값: 2 × 소스 길이 + 16)

    Returns:
        EOS를 제외한 출력 토큰 목록
    """
    return list(greedy_hypothesis(params, src_bytes, max_len).tokens)


def beam_hypothesis(
    params: ModelParams,
    src_bytes: Sequence[int],
    beam_size: int,
    max_len: Optional[int] = None,
) -> Hypothesis:
    enc = _encode(params, list(src_bytes))
    limit = _resolve_max_len(params, len(src_bytes), max_len)
    return beam_search(model_step_fn(params, enc), beam_size, limit, EOS_ID, EXCLUDED_TOKENS)


def beam_decode(
    params: ModelParams,
    src_bytes: Sequence[int],
    beam_size: int = 3,
    max_len: Optional[int] = None,
) -> List[int]:
    """
    빔 탐색 디코딩 (길이 정규화 없음)

    Returns:
        가장 점수가 높은 가설의 토큰 목록 (EOS 제외)

    Raises:
        ValueError: beam_size < 1
    """
    return list(beam_hypothesis(params, src_bytes, beam_size, max_len).tokens)


def decode(params: ModelParams, src_bytes: Sequence[int], beam_size: int = 1, max_len: Optional[int] = None) -> List[int]:
    """beam_size 1이면 greedy, 아니면 빔 탐색"""
    if beam_size == 1:
        return greedy_decode(params, src_bytes, max_len)
    return beam_decode(params, src_bytes, beam_size, max_len)


def greedy_decode_batch(
    params: ModelParams,
    sources: Sequence[Sequence[int]],
    max_lens: Optional[Sequence[int]] = None,
) -> List[List[int]]:
    """
    여러 소스를 한 번에 greedy 디코딩 (검증 PER 계산용)

    결과는 예제별 greedy_decode와 부동소수점 반올림 수준에서만 다를 수 있습니다.
    """
    if not sources:
        return []
    n = len(sources)
    src = np.full((n, max(1, max(len(s) for s in sources))), SRC_PAD_ID, dtype=np.int64)
    for row, s in enumerate(sources):
        src[row, : len(s)] = s
    limits = [
        _resolve_max_len(params, len(s), None if max_lens is None else max_lens[row])
        for row, s in enumerate(sources)
    ]

    enc = _encode(params, src)
    prefix = np.full((n, 1), BOS_ID, dtype=np.int64)
    outputs: List[List[int]] = [[] for _ in range(n)]
    active = np.array([limit > 0 for limit in limits])
    while active.any():
        scores = mask_tokens(transformer.next_token_log_probs(params, enc, prefix), EXCLUDED_TOKENS)
        tokens = np.argmax(scores, axis=-1)
        for row in np.flatnonzero(active):
            token = int(tokens[row])
            if token == EOS_ID:
                active[row] = False
                continue
            outputs[row].append(token)
            if len(outputs[row]) >= limits[row]:
                active[row] = False
        fill = np.where(active, tokens, PAD_ID)[:, None]
        prefix = np.concatenate([prefix, fill], axis=1)
        if prefix.shape[1] > params.config.max_tgt_len:
            break
    return outputs
