"""
자기회귀 탐색 (모델 독립)

step 함수는 같은 길이의 prefix 목록(BOS 이후 토큰들)을 받아 [n, V] 로그 확률을
돌려줍니다. 점수는 로그 확률의 합이며 길이 정규화는 하지 않습니다.
EOS 토큰은 출력에 포함하지 않지만 점수에는 더해집니다.
"""

from dataclasses import dataclass
from typing import Callable, Collection, List, Sequence, Tuple

import numpy as np


StepFn = Callable[[Sequence[Tuple[int, ...]]], np.ndarray]


@dataclass(frozen=True)
class Hypothesis:
    """디코딩 가설 (BOS 이후 토큰, EOS 제외)"""
    tokens: Tuple[int, ...]
    score: float
    finished: bool

    def sort_key(self):
        return (-self.score, self.tokens)


def mask_tokens(log_probs: np.ndarray, excluded: Collection[int]) -> np.ndarray:
    """제외 토큰의 로그 확률을 -inf로 바꾼 float64 복사본"""
    scores = np.array(log_probs, dtype=np.float64, copy=True)
    if excluded:
        scores[..., list(excluded)] = -np.inf
    return scores


def greedy_search(
    step_fn: StepFn,
    max_len: int,
    eos_id: int,
    excluded: Collection[int] = (),
) -> Hypothesis:
    """
    매 스텝 가장 확률이 높은 토큰을 고릅니다 (동점이면 가장 작은 id)

    EOS가 나오거나 max_len 토큰을 만들면 멈춥니다.
    """
    tokens: List[int] = []
    score = 0.0
    for _ in range(max_len):
        scores = mask_tokens(step_fn([tuple(tokens)])[0], excluded)
        token = int(np.argmax(scores))
        score += float(scores[token])
        if token == eos_id:
            return Hypothesis(tuple(tokens), score, True)
        tokens.append(token)
    return Hypothesis(tuple(tokens), score, True)


def beam_search(
    step_fn: StepFn,
    beam_size: int,
    max_len: int,
    eos_id: int,
    excluded: Collection[int] = (),
) -> Hypothesis:
    """
    로그 확률 합 기준 빔 탐색

    매 스텝 살아있는 가설의 모든 확장 중 상위 beam_size개를 남기고, EOS로 끝난 가설은
    완료 목록으로 옮깁니다. max_len에 도달한 가설도 완료로 취급합니다. 가장 좋은 완료
    가설의 점수가 살아있는 가설들의 최고 점수보다 높으면 멈춥니다.
    동점은 토큰 사전순으로 정합니다. greedy 가설보다 나쁜 결과는 돌려주지 않습니다.

    Raises:
        ValueError: beam_size < 1
    """
    if beam_size < 1:
        raise ValueError(f"beam_size는 1 이상이어야 합니다: {beam_size}")
    greedy = greedy_search(step_fn, max_len, eos_id, excluded)
    if beam_size == 1:
        return greedy

    alive: List[Hypothesis] = [Hypothesis((), 0.0, False)]
    finished: List[Hypothesis] = [greedy]
    for step in range(max_len):
        log_probs = mask_tokens(step_fn([h.tokens for h in alive]), excluded)
        candidates = []
        for hyp, row in zip(alive, log_probs):
            for token in np.flatnonzero(np.isfinite(row)):
                token = int(token)
                candidates.append(Hypothesis(hyp.tokens + (token,), hyp.score + float(row[token]), False))
        candidates.sort(key=Hypothesis.sort_key)

        alive = []
        for candidate in candidates[:beam_size]:
            if candidate.tokens[-1] == eos_id:
                finished.append(Hypothesis(candidate.tokens[:-1], candidate.score, True))
            else:
                alive.append(candidate)
        if step == max_len - 1:
            finished.extend(Hypothesis(h.tokens, h.score, True) for h in alive)
            alive = []
        if not alive:
            break
        best_finished = min(finished, key=Hypothesis.sort_key)
        if best_finished.score > max(h.score for h in alive):
            break
    return min(finished, key=Hypothesis.sort_key)
