"""
Two-pass 샘플링

1차 패스: 정답 디코더 입력으로 teacher-forced 순전파 (그래디언트 기록 없음, 드롭아웃 없음)
        → 위치별 cross-entropy 손실 프로파일과 argmax 예측
위치 선택: 손실을 정규화한 범주형 분포(loss_based) 또는 균등 분포(uniform)에서
        비복원 추출
2차 입력: 선택된 위치 i의 정답 y_i가 들어가는 디코더 입력 슬롯 i+1을 예측 ŷ_i로 치환
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from g2p_model import ModelParams, transformer
from tensor_core import ContractError, no_grad, ops

from .batching import Batch, EncodedPair, collate


SMOOTHING_EPS = 1e-8


@dataclass
class LossProfile:
    """위치별 손실 H_0..H_t와 1차 패스 argmax 예측 ŷ_0..ŷ_t"""
    losses: np.ndarray
    predictions: np.ndarray

    def __post_init__(self):
        if self.losses.shape != self.predictions.shape:
            raise ContractError("손실과 예측의 길이가 다릅니다")

    @property
    def n_eligible(self) -> int:
        """치환 가능한 위치 수 (0..t-1)"""
        return max(len(self.losses) - 1, 0)


def first_pass_profiles(params: ModelParams, batch: Batch) -> List[LossProfile]:
    """
    배치 전체의 1차 패스 손실 프로파일

    계산 그래프에 아무것도 기록하지 않습니다.
    """
    with no_grad():
        logits = transformer.forward(params, batch.src, batch.dec_input, None)
        token_losses = ops.cross_entropy(logits, batch.labels, batch.mask, reduction="none").data
    predictions = np.argmax(logits.data, axis=-1)
    profiles = []
    for row, length in enumerate(batch.target_lengths):
        profiles.append(
            LossProfile(
                losses=np.maximum(token_losses[row, :length].astype(np.float64), 0.0),
                predictions=predictions[row, :length].astype(np.int64),
            )
        )
    return profiles


def first_pass_profile(params: ModelParams, example: EncodedPair) -> LossProfile:
    """예제 하나의 1차 패스 손실 프로파일"""
    return first_pass_profiles(params, collate([example]))[0]


def position_distribution(profile: LossProfile) -> np.ndarray:
    """
    치환 후보 위치(0..t-1)에 대한 범주형 분포

    p_i = (H_i + ε) / Σ_j (H_j + ε). 후보가 없으면 빈 배열.
    """
    weights = profile.losses[: profile.n_eligible] + SMOOTHING_EPS
    if weights.size == 0:
        return weights
    return weights / weights.sum()


def uniform_distribution(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n) if n > 0 else np.zeros(0)


def replacement_count(ratio: float, n_eligible: int) -> int:
    """k = round(ratio × |eligible|), .5는 올림"""
    return min(int(np.floor(ratio * n_eligible + 0.5)), n_eligible)


def sample_positions(dist: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    분포에서 서로 다른 위치 k개를 비복원 추출 (뽑을 때마다 재정규화)

    Returns:
        정렬된 위치 인덱스 배열

    Raises:
        ContractError: k가 후보 수보다 크거나 음수인 경우
    """
    n = len(dist)
    if not 0 <= k <= n:
        raise ContractError(f"sample_positions: k={k}는 0 이상 {n} 이하여야 합니다")
    remaining = np.asarray(dist, dtype=np.float64).copy()
    available = np.ones(n, dtype=bool)
    chosen = []
    for _ in range(k):
        total = remaining.sum()
        probs = remaining / total if total > 0 else available / available.sum()
        index = int(rng.choice(n, p=probs))
        chosen.append(index)
        remaining[index] = 0.0
        available[index] = False
    return np.array(sorted(chosen), dtype=np.int64)


def build_second_pass_input(
    gold_decoder_input: Sequence[int],
    profile: LossProfile,
    positions: Sequence[int],
) -> np.ndarray:
    """
    선택된 위치 i마다 디코더 입력 슬롯 i+1을 ŷ_i로 치환 (BOS는 그대로)

    Raises:
        ContractError: 후보 범위를 벗어난 위치
    """
    replaced = np.array(gold_decoder_input, dtype=np.int64, copy=True)
    for i in positions:
        i = int(i)
        if not 0 <= i < profile.n_eligible or i + 1 >= len(replaced):
            raise ContractError(f"치환 위치 {i}가 후보 범위 [0, {profile.n_eligible})를 벗어났습니다")
        replaced[i + 1] = profile.predictions[i]
    return replaced
