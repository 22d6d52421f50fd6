"""
바이트 입력 트랜스포머 인코더-디코더

p_θ(y_i | y_0^{i-1}; X)를 계산합니다.
- 고정 sinusoidal 절대 위치 인코딩
- Pre-LN 블록 (LN → sublayer → dropout → residual)
- 디코더 self-attention은 엄격한 causal mask 사용
- 증분 디코딩 캐시 없음: 매 스텝 전체 prefix를 다시 계산합니다

모든 함수는 배치 차원을 가진 입력([B, L])을 받으며, 1차원 입력은 B=1로
취급합니다.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from tensor_core import ContractError, Tensor, no_grad, ops

from .config import BOS_ID, SRC_PAD_ID, SequenceLengthError
from .params import ModelParams


MASK_VALUE = -1e9

TokenBatch = Union[Sequence[int], Sequence[Sequence[int]], np.ndarray]


@dataclass
class EncoderOutput:
    """인코더 출력"""
    memory: Tensor            # [B, S, d_model]
    src_mask: np.ndarray      # [B, S] bool, True = PAD 위치

    @property
    def src_len(self) -> int:
        return self.memory.shape[1]

    def repeat(self, n: int) -> "EncoderOutput":
        """배치 크기 1인 출력을 n개로 복제 (추론 전용)"""
        if self.memory.shape[0] != 1:
            raise ContractError("repeat()은 배치 크기 1인 인코더 출력에서만 사용할 수 있습니다")
        return EncoderOutput(
            memory=Tensor(np.repeat(self.memory.data, n, axis=0)),
            src_mask=np.repeat(self.src_mask, n, axis=0),
        )


def _as_batch(tokens: TokenBatch) -> np.ndarray:
    array = np.asarray(tokens, dtype=np.int64)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise ContractError(f"토큰 입력은 1차원 또는 2차원이어야 합니다: shape={array.shape}")
    return array


@lru_cache(maxsize=16)
def _positions(length: int, d_model: int, dtype_name: str) -> np.ndarray:
    position = np.arange(length)[:, None]
    div = np.exp(np.arange(0, d_model, 2) * (-np.log(10000.0) / d_model))
    table = np.zeros((length, d_model))
    table[:, 0::2] = np.sin(position * div)
    table[:, 1::2] = np.cos(position * div)[:, : d_model // 2]
    table = table.astype(dtype_name)
    table.setflags(write=False)
    return table


def sinusoidal_positions(length: int, d_model: int, dtype: str = "float64") -> np.ndarray:
    """[length, d_model] 고정 위치 인코딩"""
    return _positions(length, d_model, str(np.dtype(dtype)))


def _linear(params: ModelParams, x: Tensor, weight: str, bias: str) -> Tensor:
    return ops.add(ops.matmul(x, params[weight]), params[bias])


def _layer_norm(params: ModelParams, x: Tensor, prefix: str) -> Tensor:
    return ops.layer_norm(x, params[f"{prefix}.g"], params[f"{prefix}.b"])


def _split_heads(x: Tensor, n_heads: int) -> Tensor:
    b, t, d = x.shape
    return ops.transpose(ops.reshape(x, (b, t, n_heads, d // n_heads)), (0, 2, 1, 3))


def _merge_heads(x: Tensor) -> Tensor:
    b, h, t, dh = x.shape
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (b, t, h * dh))


def _attention(
    params: ModelParams,
    prefix: str,
    x_q: Tensor,
    x_kv: Tensor,
    mask_bias: np.ndarray,
) -> Tensor:
    """멀티헤드 어텐션. mask_bias는 [B|1, 1, Tq|1, Tk] 가산 마스크"""
    n_heads = params.config.n_heads
    q = _split_heads(_linear(params, x_q, f"{prefix}.wq", f"{prefix}.bq"), n_heads)
    k = _split_heads(_linear(params, x_kv, f"{prefix}.wk", f"{prefix}.bk"), n_heads)
    v = _split_heads(_linear(params, x_kv, f"{prefix}.wv", f"{prefix}.bv"), n_heads)
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(params.config.head_dim))
    weights = ops.softmax(ops.add(scores, Tensor(mask_bias.astype(scores.dtype))))
    context = _merge_heads(ops.matmul(weights, v))
    return _linear(params, context, f"{prefix}.wo", f"{prefix}.bo")


def _feed_forward(params: ModelParams, x: Tensor, prefix: str) -> Tensor:
    hidden = ops.gelu(_linear(params, x, f"{prefix}.w1", f"{prefix}.b1"))
    return _linear(params, hidden, f"{prefix}.w2", f"{prefix}.b2")


def _embed(params: ModelParams, table: str, ids: np.ndarray, rng) -> Tensor:
    config = params.config
    x = ops.scale(ops.embedding(params[table], ids), np.sqrt(config.d_model))
    pos = sinusoidal_positions(ids.shape[1], config.d_model, config.dtype)
    return ops.dropout(ops.add(x, Tensor(pos)), config.dropout_rate, rng)


def _padding_bias(src_mask: np.ndarray) -> np.ndarray:
    return np.where(src_mask, MASK_VALUE, 0.0)[:, None, None, :]


def _causal_bias(length: int) -> np.ndarray:
    return np.triu(np.full((length, length), MASK_VALUE), k=1)[None, None, :, :]


def encode(
    params: ModelParams,
    src_bytes: TokenBatch,
    dropout_rng: Optional[np.random.Generator] = None,
) -> EncoderOutput:
    """
    소스 바이트 시퀀스를 인코딩

    Args:
        params: 모델 파라미터
        src_bytes: [S] 또는 [B, S] 바이트 토큰 (PAD = 256)
        dropout_rng: 드롭아웃 난수 (None이면 드롭아웃 비활성화)

    Returns:
        EncoderOutput (memory [B, S, d_model])

    Raises:
        SequenceLengthError: S > max_src_len
    """
    config = params.config
    src = _as_batch(src_bytes)
    if src.shape[1] > config.max_src_len:
        raise SequenceLengthError(f"소스 길이 {src.shape[1]}가 최대 {config.max_src_len}를 초과합니다")
    src_mask = src == SRC_PAD_ID
    bias = _padding_bias(src_mask)

    x = _embed(params, "src_embed", src, dropout_rng)
    for layer in range(config.n_enc_layers):
        p = f"enc.{layer}"
        normed = _layer_norm(params, x, f"{p}.ln1")
        h = _attention(params, f"{p}.attn", normed, normed, bias)
        x = ops.add(x, ops.dropout(h, config.dropout_rate, dropout_rng))
        h = _feed_forward(params, _layer_norm(params, x, f"{p}.ln2"), f"{p}.ffn")
        x = ops.add(x, ops.dropout(h, config.dropout_rate, dropout_rng))
    return EncoderOutput(memory=_layer_norm(params, x, "enc.ln_f"), src_mask=src_mask)


def decoder_forward(
    params: ModelParams,
    enc: EncoderOutput,
    dec_input: TokenBatch,
    dropout_rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    디코더 순전파

    Args:
        params: 모델 파라미터
        enc: 인코더 출력 (배치 크기가 dec_input과 같아야 함)
        dec_input: [T] 또는 [B, T] 디코더 입력 (BOS로 시작)
        dropout_rng: 드롭아웃 난수 (None이면 비활성화)

    Returns:
        로짓 [B, T, tgt_vocab_size]; i번째 행은 p_θ(·| y_0^{i-1}; X)의 로짓

    Raises:
        ContractError: BOS로 시작하지 않는 경우
        SequenceLengthError: T > max_tgt_len
    """
    config = params.config
    tgt = _as_batch(dec_input)
    if tgt.shape[1] == 0 or np.any(tgt[:, 0] != BOS_ID):
        raise ContractError("디코더 입력은 BOS로 시작해야 합니다")
    if tgt.shape[1] > config.max_tgt_len:
        raise SequenceLengthError(f"디코더 입력 길이 {tgt.shape[1]}가 최대 {config.max_tgt_len}를 초과합니다")
    if enc.memory.shape[0] != tgt.shape[0]:
        raise ContractError(
            f"인코더 배치 크기 {enc.memory.shape[0]}와 디코더 배치 크기 {tgt.shape[0]}가 다릅니다"
        )

    self_bias = _causal_bias(tgt.shape[1])
    cross_bias = _padding_bias(enc.src_mask)
    x = _embed(params, "tgt_embed", tgt, dropout_rng)
    for layer in range(config.n_dec_layers):
        p = f"dec.{layer}"
        normed = _layer_norm(params, x, f"{p}.ln1")
        h = _attention(params, f"{p}.self_attn", normed, normed, self_bias)
        x = ops.add(x, ops.dropout(h, config.dropout_rate, dropout_rng))
        h = _attention(params, f"{p}.cross_attn", _layer_norm(params, x, f"{p}.ln2"), enc.memory, cross_bias)
        x = ops.add(x, ops.dropout(h, config.dropout_rate, dropout_rng))
        h = _feed_forward(params, _layer_norm(params, x, f"{p}.ln3"), f"{p}.ffn")
        x = ops.add(x, ops.dropout(h, config.dropout_rate, dropout_rng))
    x = _layer_norm(params, x, "dec.ln_f")
    return _linear(params, x, "out.w", "out.b")


def forward(
    params: ModelParams,
    src_bytes: TokenBatch,
    dec_input: TokenBatch,
    dropout_rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """encode + decoder_forward (teacher forcing 학습용)"""
    enc = encode(params, src_bytes, dropout_rng)
    return decoder_forward(params, enc, dec_input, dropout_rng)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def next_token_distribution(
    params: ModelParams,
    enc: EncoderOutput,
    prefix: TokenBatch,
) -> np.ndarray:
    """
    다음 토큰 확률 분포

    decoder_forward 마지막 행의 softmax이며 그래프를 기록하지 않습니다.

    Returns:
        [V] (1차원 prefix) 또는 [B, V] 확률
    """
    single = np.asarray(prefix).ndim == 1
    with no_grad():
        logits = decoder_forward(params, enc, prefix)
    probs = _softmax_rows(logits.data[:, -1, :])
    return probs[0] if single else probs


def next_token_log_probs(
    params: ModelParams,
    enc: EncoderOutput,
    prefix: TokenBatch,
) -> np.ndarray:
    """next_token_distribution의 log 버전 (수치 안정적으로 계산)"""
    single = np.asarray(prefix).ndim == 1
    with no_grad():
        logits = decoder_forward(params, enc, prefix)
    last = logits.data[:, -1, :]
    shifted = last - last.max(axis=-1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return log_probs[0] if single else log_probs
