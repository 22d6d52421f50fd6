"""
Levenshtein 편집 거리와 정렬

단위 비용의 삽입/삭제/치환 최소 횟수를 동적 계획법으로 계산하고, 역추적한 정렬을
함께 돌려줍니다.
"""

from dataclasses import dataclass
from typing import Hashable, List, Optional, Sequence, Tuple

import numpy as np


MATCH = "match"
SUBSTITUTE = "sub"
INSERT = "ins"
DELETE = "del"


@dataclass(frozen=True)
class AlignmentStep:
    """정렬 한 칸. ref_index/hyp_index는 해당 쪽 토큰이 없으면 None"""
    op: str
    ref_index: Optional[int]
    hyp_index: Optional[int]


def _table(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> np.ndarray:
    n, m = len(ref), len(hyp)
    dp = np.zeros((n + 1, m + 1), dtype=np.int64)
    dp[:, 0] = np.arange(n + 1)
    dp[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            dp[i, j] = min(dp[i - 1, j - 1] + cost, dp[i - 1, j] + 1, dp[i, j - 1] + 1)
    return dp


def edit_distance(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> Tuple[int, List[AlignmentStep]]:
    """
    편집 거리와 정렬

    Args:
        ref: 정답 토큰열
        hyp: 가설 토큰열

    Returns:
        (편집 횟수, 정렬 단계 목록)
    """
    dp = _table(ref, hyp)
    steps: List[AlignmentStep] = []
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if ref[i - 1] == hyp[j - 1] else 1
            if dp[i, j] == dp[i - 1, j - 1] + cost:
                steps.append(AlignmentStep(MATCH if cost == 0 else SUBSTITUTE, i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i > 0 and dp[i, j] == dp[i - 1, j] + 1:
            steps.append(AlignmentStep(DELETE, i - 1, None))
            i -= 1
        else:
            steps.append(AlignmentStep(INSERT, None, j - 1))
            j -= 1
    steps.reverse()
    return int(dp[len(ref), len(hyp)]), steps


def edit_count(ref: Sequence[Hashable], hyp: Sequence[Hashable]) -> int:
    """정렬 없이 편집 횟수만"""
    return int(_table(ref, hyp)[len(ref), len(hyp)])
