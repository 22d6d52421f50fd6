"""
노출 편향(exposure bias) 측정: 누적 오류 곡선 AccErr

스텝 i의 손실은 정답 토큰 y_i의 음의 로그 확률입니다.
    TF: prefix = 정답 y_0..y_{i-1}
    AR: prefix = 모델이 greedy로 만든 ŷ_0..ŷ_{i-1}
참 분포는 위치 기준으로 정렬한 정답 토큰의 one-hot으로 두므로 KL 발산이
음의 로그 우도가 됩니다.

스텝별 평균은 그 스텝까지 도달한 예제만으로 계산하고 (ragged 평균),

    AccErr(l) = l · Σ_{i≤l} L_AR_i / Σ_{i≤l} L_TF_i

분모가 1e-12보다 작으면 AccErr(l) = l로 두고 degenerate로 표시합니다.
"""

from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from g2p_model import BOS_ID, EOS_ID, ModelParams, transformer
from tensor_core import ContractError, no_grad

from decoding import EXCLUDED_TOKENS
from decoding.search import mask_tokens


DENOMINATOR_GUARD = 1e-12
ACCERR_COLUMNS = ("l", "L_AR_cum", "L_TF_cum", "AccErr", "expected", "n_examples_at_l")


class ExposureBiasReport(BaseModel):
    """AccErr 곡선"""
    steps: List[int] = Field(default_factory=list, description="스텝 l = 1..")
    l_ar: List[float] = Field(default_factory=list, description="스텝별 평균 AR 손실")
    l_tf: List[float] = Field(default_factory=list, description="스텝별 평균 TF 손실")
    n_ar: List[int] = Field(default_factory=list, description="스텝별 AR 기여 예제 수")
    n_tf: List[int] = Field(default_factory=list, description="스텝별 TF 기여 예제 수")
    l_ar_cum: List[float] = Field(default_factory=list)
    l_tf_cum: List[float] = Field(default_factory=list)
    accerr: List[float] = Field(default_factory=list)
    degenerate: List[bool] = Field(default_factory=list, description="분모 가드가 적용된 스텝")
    n_examples: int = Field(default=0, ge=0)
    target_mode: Optional[str] = Field(default=None, description="손실을 계산한 디코더 토큰 단위")

    def rows(self) -> List[dict]:
        """AccErr CSV 행 (expected = l, 노출 편향이 없는 이상적인 곡선)"""
        return [
            {
                "l": l,
                "L_AR_cum": self.l_ar_cum[k],
                "L_TF_cum": self.l_tf_cum[k],
                "AccErr": self.accerr[k],
                "expected": float(l),
                "n_examples_at_l": min(self.n_ar[k], self.n_tf[k]),
            }
            for k, l in enumerate(self.steps)
        ]


def _log_probs_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def per_step_losses(
    params: ModelParams,
    src: Sequence[int],
    target: Sequence[int],
    mode: Literal["AR", "TF"],
    l_max: int,
) -> np.ndarray:
    """
    스텝별 손실 −log p_θ(y_i | prefix)

    Args:
        params: 모델 파라미터
        src: 소스 바이트
        target: 정답 y_0..y_t (EOS 포함)
        mode: "TF" (정답 prefix) 또는 "AR" (greedy prefix)
        l_max: 최대 스텝 수

    Returns:
        길이 min(t+1, l_max[, AR 생성 길이])의 손실 배열
    """
    steps = min(len(target), l_max, params.config.max_tgt_len)
    if steps <= 0:
        return np.zeros(0)
    with no_grad():
        enc = transformer.encode(params, list(src))

    if mode == "TF":
        dec_input = np.array([BOS_ID] + list(target[: steps - 1]), dtype=np.int64)
        with no_grad():
            logits = transformer.decoder_forward(params, enc, dec_input).data[0]
        log_probs = _log_probs_rows(logits.astype(np.float64))
        return np.array([-log_probs[i, target[i]] for i in range(steps)])

    if mode != "AR":
        raise ContractError(f"mode는 'AR' 또는 'TF'여야 합니다: {mode}")
    prefix = [BOS_ID]
    losses = []
    for i in range(steps):
        log_probs = transformer.next_token_log_probs(params, enc, prefix).astype(np.float64)
        losses.append(-log_probs[target[i]])
        token = int(np.argmax(mask_tokens(log_probs, EXCLUDED_TOKENS)))
        if token == EOS_ID:
            break
        prefix.append(token)
    return np.array(losses)


def accerr_from_losses(
    ar_losses: Sequence[Sequence[float]],
    tf_losses: Sequence[Sequence[float]],
    l_max: Optional[int] = None,
) -> ExposureBiasReport:
    """
    예제별 스텝 손실 목록으로 AccErr 곡선 계산

    어느 한쪽이라도 기여 예제가 없는 첫 스텝에서 곡선이 끝납니다.
    """
    longest = max([len(s) for s in ar_losses] + [len(s) for s in tf_losses] + [0])
    if l_max is not None:
        longest = min(longest, l_max)
    report = ExposureBiasReport(n_examples=max(len(ar_losses), len(tf_losses)))
    ar_cum = tf_cum = 0.0
    for i in range(longest):
        ar_values = [float(s[i]) for s in ar_losses if len(s) > i]
        tf_values = [float(s[i]) for s in tf_losses if len(s) > i]
        if not ar_values or not tf_values:
            break
        mean_ar = float(np.mean(ar_values))
        mean_tf = float(np.mean(tf_values))
        ar_cum += mean_ar
        tf_cum += mean_tf
        step = i + 1
        degenerate = tf_cum < DENOMINATOR_GUARD
        report.steps.append(step)
        report.l_ar.append(mean_ar)
        report.l_tf.append(mean_tf)
        report.n_ar.append(len(ar_values))
        report.n_tf.append(len(tf_values))
        report.l_ar_cum.append(ar_cum)
        report.l_tf_cum.append(tf_cum)
        report.degenerate.append(degenerate)
        report.accerr.append(float(step) if degenerate else step * ar_cum / tf_cum)
    return report


def accerr_curve(
    params: ModelParams,
    eval_pairs: Sequence[tuple],
    l_max: int,
    show_progress: bool = False,
) -> ExposureBiasReport:
    """
    평가 집합 전체의 AccErr 곡선

    Args:
        params: 모델 파라미터
        eval_pairs: (소스, 타깃) 쌍 목록
        l_max: 최대 스텝 수

    Raises:
        ContractError: 평가 집합이 비어 있는 경우
    """
    if not eval_pairs:
        raise ContractError("AccErr 평가 집합이 비어 있습니다")

    ar, tf = [], []
    for src, tgt in tqdm(eval_pairs, desc="AccErr", leave=False, disable=not show_progress):
        tf.append(per_step_losses(params, src, tgt, "TF", l_max))
        ar.append(per_step_losses(params, src, tgt, "AR", l_max))
    report = accerr_from_losses(ar, tf, l_max)
    report.target_mode = params.config.target_mode
    return report
