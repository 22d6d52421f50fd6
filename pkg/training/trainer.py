"""
학습 루프

Teacher forcing 목적함수와 two-pass 샘플링(uniform / loss_based, 고정 / 적응형 비율)을
AdamW + 그래디언트 클리핑으로 학습합니다.

난수 스트림은 모두 (seed, epoch, 인덱스, 용도)로부터 결정적으로 만들어집니다.
    [seed, epoch, example_index, 1]  예제별 위치 샘플링
    [seed, epoch, batch_index, 2]    배치별 드롭아웃
    [seed, epoch, 0, 3]              에폭별 셔플
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from corpus import CorpusSplit, Example
from g2p_model import ModelConfig, ModelParams, init_model, transformer
from tensor_core import ContractError, NonFiniteError, Tensor, backward, no_grad, ops, reset_graph

from .batching import Batch, EncodedPair, encode_examples, iterate_batches
from .config import OptimizerConfig, SamplingPolicy, TrainerConfig
from .optimizer import AdamWState, adamw_update, clip_gradients
from .sampling import (
    build_second_pass_input,
    first_pass_profiles,
    position_distribution,
    replacement_count,
    sample_positions,
    uniform_distribution,
)


SAMPLING_STREAM = 1
DROPOUT_STREAM = 2
SHUFFLE_STREAM = 3


class DivergenceError(ArithmeticError):
    """학습 손실이 NaN/Inf가 되었을 때"""

    def __init__(self, epoch: int, batch_index: int, loss: float, detail: str = ""):
        self.epoch = epoch
        self.batch_index = batch_index
        self.loss = loss
        message = f"학습이 발산했습니다 (epoch {epoch}, batch {batch_index}, loss {loss})"
        super().__init__(f"{message}: {detail}" if detail else message)


class EpochLog(BaseModel):
    """에폭 하나의 학습 기록"""
    epoch: int = Field(description="에폭 번호 (1부터)")
    train_loss: float = Field(description="토큰 가중 평균 학습 손실")
    val_loss: float = Field(description="토큰 가중 평균 검증 손실")
    val_per: float = Field(ge=0.0, description="greedy 디코딩 검증 PER")
    sample_ratio: float = Field(ge=0.0, le=1.0, description="이번 에폭의 치환 비율")


LOG_COLUMNS = ("epoch", "train_loss", "val_loss", "val_per", "sample_ratio")


@dataclass
class TrainState:
    """학습 상태"""
    params: ModelParams
    optimizer: AdamWState
    seed: int
    epoch: int = 0
    prev_val_per: Optional[float] = None
    history: List[EpochLog] = field(default_factory=list)
    best_val_loss: float = float("inf")
    best_epoch: int = 0
    best_snapshot: Optional[Dict[str, np.ndarray]] = None

    @classmethod
    def create(cls, params: ModelParams, seed: int) -> "TrainState":
        return cls(params=params, optimizer=AdamWState.zeros_like(params), seed=seed)


def example_rng(seed: int, epoch: int, index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, epoch, index, stream])


def adaptive_ratio(prev_per: Optional[float], clamp_max: float = 0.9) -> float:
    """
    이전 에폭 검증 PER로 정한 치환 비율

    첫 에폭(이전 PER 없음)은 0, 이후에는 clamp(prev_per, 0, clamp_max).
    """
    if prev_per is None:
        return 0.0
    return float(min(max(prev_per, 0.0), clamp_max))


def current_ratio(policy: SamplingPolicy, prev_per: Optional[float]) -> float:
    if not policy.is_two_pass:
        return 0.0
    if policy.ratio_mode == "fixed":
        return policy.fixed_ratio
    return adaptive_ratio(prev_per, policy.ratio_clamp_max)


def _dropout_rng(params: ModelParams, seed: int, epoch: int, batch_index: int) -> Optional[np.random.Generator]:
    if params.config.dropout_rate <= 0.0:
        return None
    return example_rng(seed, epoch, batch_index, DROPOUT_STREAM)


def teacher_forcing_loss(
    params: ModelParams,
    batch: Batch,
    dropout_rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    Teacher forcing 손실 (배치 내 PAD가 아닌 모든 타깃 위치의 평균 cross-entropy)

    Raises:
        ContractError: 빈 배치
    """
    if batch.size == 0:
        raise ContractError("빈 배치입니다")
    logits = transformer.forward(params, batch.src, batch.dec_input, dropout_rng)
    return ops.cross_entropy(logits, batch.labels, batch.mask, reduction="mean")


def second_pass_inputs(
    params: ModelParams,
    batch: Batch,
    policy: SamplingPolicy,
    ratio: float,
    seed: int,
    epoch: int,
) -> np.ndarray:
    """1차 패스 결과로 치환된 디코더 입력 [B, T]"""
    replaced = batch.dec_input.copy()
    if ratio <= 0.0:
        return replaced
    profiles = first_pass_profiles(params, batch)
    for row, profile in enumerate(profiles):
        n_eligible = profile.n_eligible
        k = replacement_count(ratio, n_eligible)
        if k == 0:
            continue
        if policy.method == "loss_based":
            dist = position_distribution(profile)
        else:
            dist = uniform_distribution(n_eligible)
        index = batch.indices[row] if batch.indices else row
        positions = sample_positions(dist, k, example_rng(seed, epoch, index, SAMPLING_STREAM))
        length = int(batch.target_lengths[row])
        replaced[row, :length] = build_second_pass_input(batch.dec_input[row, :length], profile, positions)
    return replaced


def two_pass_step(
    state: TrainState,
    batch: Batch,
    policy: SamplingPolicy,
    ratio: Optional[float] = None,
    dropout_rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    Two-pass 샘플링 손실

    1차 패스(그래디언트 없음)로 위치를 고르고 치환한 디코더 입력으로 2차 teacher-forced
    패스를 수행합니다. 손실은 바뀌지 않은 정답 라벨에 대해 PAD가 아닌 모든 위치에서
    계산하며, 그래디언트는 2차 패스로만 흐릅니다.

    Raises:
        ContractError: policy.method가 two-pass 방식이 아닌 경우
    """
    if not policy.is_two_pass:
        raise ContractError(f"two_pass_step은 uniform/loss_based 방식에서만 사용합니다: {policy.method}")
    if ratio is None:
        ratio = current_ratio(policy, state.prev_val_per)
    dec_input = second_pass_inputs(state.params, batch, policy, ratio, state.seed, state.epoch)
    logits = transformer.forward(state.params, batch.src, dec_input, dropout_rng)
    return ops.cross_entropy(logits, batch.labels, batch.mask, reduction="mean")


def train_step(
    state: TrainState,
    batch: Batch,
    batch_index: int,
    policy: SamplingPolicy,
    ratio: float,
    optimizer_config: OptimizerConfig,
) -> float:
    """
    미니배치 하나 학습 (손실 → backward → 클리핑 → AdamW)

    Raises:
        DivergenceError: 손실 또는 순전파 값이 유한하지 않은 경우
    """
    reset_graph()
    params = state.params
    dropout_rng = _dropout_rng(params, state.seed, state.epoch, batch_index)
    try:
        if policy.is_two_pass:
            loss = two_pass_step(state, batch, policy, ratio, dropout_rng)
        else:
            loss = teacher_forcing_loss(params, batch, dropout_rng)
    except NonFiniteError as e:
        reset_graph()
        raise DivergenceError(state.epoch, batch_index, float("nan"), str(e)) from e
    value = loss.item()
    if not np.isfinite(value):
        reset_graph()
        raise DivergenceError(state.epoch, batch_index, value)

    params.zero_grad()
    backward(loss)
    clip_gradients(params.parameters(), optimizer_config.max_grad_norm)
    adamw_update(params, state.optimizer, optimizer_config)
    if not params.all_finite():
        raise DivergenceError(state.epoch, batch_index, value, "파라미터에 NaN/Inf가 생겼습니다")
    return value


def evaluate_loss(params: ModelParams, pairs: Sequence[EncodedPair], batch_size: int = 64) -> float:
    """드롭아웃 없이 계산한 토큰 가중 평균 cross-entropy"""
    total, tokens = 0.0, 0
    with no_grad():
        for batch in iterate_batches(pairs, batch_size):
            logits = transformer.forward(params, batch.src, batch.dec_input, None)
            total += float(ops.cross_entropy(logits, batch.labels, batch.mask, reduction="sum").item())
            tokens += int(batch.target_lengths.sum())
    return total / max(tokens, 1)


def validation_per(
    params: ModelParams,
    examples: Sequence[Example],
    pairs: Sequence[EncodedPair],
    trainer_config: TrainerConfig,
) -> float:
    """검증 부분집합에 대한 배치 greedy 디코딩 PER"""
    from decoding import greedy_decode_batch
    from metrics import score_token_hypotheses

    limit = trainer_config.val_per_examples
    subset = range(len(pairs)) if limit is None else range(min(limit, len(pairs)))
    hypotheses: List[List[int]] = []
    size = trainer_config.val_batch_size
    indices = list(subset)
    for start in range(0, len(indices), size):
        chunk = indices[start : start + size]
        sources = [pairs[i][0] for i in chunk]
        max_lens = [trainer_config.max_len_factor * len(s) + trainer_config.max_len_offset for s in sources]
        hypotheses.extend(greedy_decode_batch(params, sources, max_lens))
    report = score_token_hypotheses([examples[i] for i in indices], hypotheses, params.config.target_mode)
    return report.per


def train(
    config: ModelConfig,
    corpus: CorpusSplit,
    policy: SamplingPolicy,
    seed: int,
    trainer_config: Optional[TrainerConfig] = None,
    optimizer_config: Optional[OptimizerConfig] = None,
    params: Optional[ModelParams] = None,
    show_progress: bool = False,
) -> TrainState:
    """
    에폭 단위 학습

    매 에폭 뒤 검증 손실과 greedy 검증 PER을 계산하고, 적응형 비율은 그 PER로
    갱신합니다. 검증 손실이 가장 낮은 에폭의 파라미터를 최종 파라미터로 남깁니다.

    Args:
        config: 모델 설정
        corpus: 학습/검증 코퍼스
        policy: 학습 방법과 치환 비율 정책
        seed: 초기화와 모든 난수 스트림의 시드
        trainer_config: 에폭 루프 설정
        optimizer_config: AdamW 설정
        params: 이어서 학습할 파라미터 (None이면 init_model)
        show_progress: 진행 상황 출력 여부

    Returns:
        TrainState (history에 에폭별 EpochLog)

    Raises:
        DivergenceError: 손실이 NaN/Inf가 된 경우
        ContractError: 학습/검증 예제가 없는 경우
    """
    trainer_config = trainer_config or TrainerConfig()
    optimizer_config = optimizer_config or OptimizerConfig()
    if not corpus.train or not corpus.validation:
        raise ContractError("학습/검증 예제가 필요합니다")

    if params is None:
        params = init_model(config, seed)
    state = TrainState.create(params, seed)
    train_pairs = encode_examples(corpus.train, params.config)
    val_pairs = encode_examples(corpus.validation, params.config)

    if show_progress:
        print(f"🔍 학습 시작: {policy.label}, 파라미터 {params.num_parameters():,}개, "
              f"학습 {len(train_pairs)}개 / 검증 {len(val_pairs)}개")

    for epoch in range(1, trainer_config.epochs + 1):
        state.epoch = epoch
        ratio = current_ratio(policy, state.prev_val_per)
        batches = iterate_batches(
            train_pairs, trainer_config.batch_size, example_rng(seed, epoch, 0, SHUFFLE_STREAM)
        )
        total, tokens = 0.0, 0
        progress = tqdm(batches, desc=f"epoch {epoch}", leave=False, disable=not show_progress)
        for batch_index, batch in enumerate(progress):
            value = train_step(state, batch, batch_index, policy, ratio, optimizer_config)
            n_tokens = int(batch.target_lengths.sum())
            total += value * n_tokens
            tokens += n_tokens
            progress.set_postfix(loss=f"{value:.4f}")

        val_loss = evaluate_loss(params, val_pairs, trainer_config.val_batch_size)
        val_per = validation_per(params, corpus.validation, val_pairs, trainer_config)
        state.prev_val_per = val_per
        log = EpochLog(
            epoch=epoch,
            train_loss=total / max(tokens, 1),
            val_loss=val_loss,
            val_per=val_per,
            sample_ratio=ratio,
        )
        state.history.append(log)
        if val_loss < state.best_val_loss:
            state.best_val_loss = val_loss
            state.best_epoch = epoch
            state.best_snapshot = params.snapshot()

        if show_progress:
            marker = " ⭐" if state.best_epoch == epoch else ""
            print(f"   ✓ epoch {epoch}: train {log.train_loss:.4f}, val {val_loss:.4f}, "
                  f"PER {val_per:.2%}, ratio {ratio:.2f}{marker}")

    if state.best_snapshot is not None:
        params.load_snapshot(state.best_snapshot)
    if show_progress:
        print(f"🎉 학습 완료: best epoch {state.best_epoch} (val loss {state.best_val_loss:.4f})")
    return state


def log_rows(history: Sequence[EpochLog]) -> List[dict]:
    """학습 로그 CSV 행"""
    return [entry.model_dump() for entry in history]
