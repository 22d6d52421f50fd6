"""
원시 연산 (순전파 + 역전파)

모든 연산은 make_op()을 통해 결과 텐서를 만들고, 입력 기울기를 돌려주는
역전파 클로저를 함께 기록합니다. 브로드캐스팅은 모델에 필요한 범위
(bias 덧셈, 마스크 덧셈, 배치 matmul)만 지원합니다.
"""

import math
from typing import Optional, Sequence

import numpy as np

from .errors import ContractError, DimensionError
from .tensor import Tensor, make_op


def _as_tensor(value, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=like.dtype))


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """브로드캐스트된 기울기를 원래 shape으로 합산"""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, size in enumerate(shape) if size == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{op}: shape {a.shape}와 {b.shape}는 브로드캐스트할 수 없습니다") from None


# ===== 원소별 연산 =====
def add(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    _broadcast_shape("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_op("add", a.data + b.data, (a, b), backward)


def sub(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    _broadcast_shape("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_op("sub", a.data - b.data, (a, b), backward)


def mul(a: Tensor, b) -> Tensor:
    b = _as_tensor(b, a)
    _broadcast_shape("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return make_op("mul", a.data * b.data, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    """상수 배"""
    factor = a.dtype.type(factor)

    def backward(g):
        return (g * factor,)

    return make_op("scale", a.data * factor, (a,), backward)


_GELU_C = math.sqrt(2.0 / math.pi)


def gelu(x: Tensor) -> Tensor:
    """tanh 근사 GELU"""
    inner = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    t = np.tanh(inner)

    def backward(g):
        d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner),)

    return make_op("gelu", 0.5 * x.data * (1.0 + t), (x,), backward)


def relu(x: Tensor) -> Tensor:
    mask = (x.data > 0).astype(x.dtype)

    def backward(g):
        return (g * mask,)

    return make_op("relu", x.data * mask, (x,), backward)


# ===== shape 연산 =====
def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError:
        raise DimensionError(f"reshape: {a.shape} → {tuple(shape)} 변환 불가") from None

    def backward(g):
        return (g.reshape(a.shape),)

    return make_op("reshape", out, (a,), backward)


def transpose(a: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(a.ndim)):
        raise DimensionError(f"transpose: 축 {axes}는 {a.ndim}차원 텐서의 순열이 아닙니다")
    inverse = tuple(np.argsort(axes))

    def backward(g):
        return (g.transpose(inverse),)

    return make_op("transpose", a.data.transpose(axes), (a,), backward)


def sum(a: Tensor) -> Tensor:  # noqa: A001 - 텐서 API 이름
    def backward(g):
        return (np.broadcast_to(g, a.shape).astype(a.dtype),)

    return make_op("sum", np.asarray(a.data.sum(), dtype=a.dtype), (a,), backward)


def mean(a: Tensor) -> Tensor:
    n = a.size

    def backward(g):
        return (np.broadcast_to(g / n, a.shape).astype(a.dtype),)

    return make_op("mean", np.asarray(a.data.mean(), dtype=a.dtype), (a,), backward)


# ===== 행렬곱 =====
def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    행렬곱 (배치 지원)

    a[..., m, k] @ b[k, n] 또는 같은 배치 차원을 가진 a[..., m, k] @ b[..., k, n]

    Raises:
        DimensionError: 내부 차원 또는 배치 차원이 맞지 않는 경우
    """
    if a.ndim < 2 or b.ndim < 2:
        raise DimensionError(f"matmul은 2차원 이상이 필요합니다: {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul 내부 차원 불일치: {a.shape} @ {b.shape}")
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise DimensionError(f"matmul 배치 차원 불일치: {a.shape} @ {b.shape}")

    def backward(g):
        grad_a = g @ np.swapaxes(b.data, -1, -2)
        if b.ndim == 2 and a.ndim > 2:
            k, n = b.shape
            grad_b = a.data.reshape(-1, k).T @ g.reshape(-1, n)
        else:
            grad_b = np.swapaxes(a.data, -1, -2) @ g
        return grad_a, grad_b

    return make_op("matmul", a.data @ b.data, (a, b), backward)


# ===== 정규화 / 확률 =====
def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (s * (g - (g * s).sum(axis=axis, keepdims=True)),)

    return make_op("softmax", s, (x,), backward)


def _log_softmax_data(data: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = data - data.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    out = _log_softmax_data(x.data, axis)

    def backward(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return make_op("log_softmax", out, (x,), backward)


LAYER_NORM_EPS = 1e-6


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    """
    마지막 축 기준 layer normalization

    y = (x - mean) / sqrt(var + eps) * gain + bias

    Raises:
        DimensionError: gain/bias 길이가 마지막 차원과 다른 경우
    """
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise DimensionError(f"layer_norm: 마지막 차원 {d}와 gain {gain.shape} / bias {bias.shape} 불일치")
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    sigma = np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    x_hat = centered / sigma

    def backward(g):
        lead = tuple(range(g.ndim - 1))
        d_hat = g * gain.data
        grad_x = (d_hat - d_hat.mean(axis=-1, keepdims=True)
                  - x_hat * (d_hat * x_hat).mean(axis=-1, keepdims=True)) / sigma
        return grad_x, (g * x_hat).sum(axis=lead), g.sum(axis=lead)

    return make_op("layer_norm", x_hat * gain.data + bias.data, (x, gain, bias), backward)


# ===== 임베딩 / 드롭아웃 =====
def embedding(weight: Tensor, ids) -> Tensor:
    """
    임베딩 조회 weight[ids]

    Raises:
        IndexError: ids가 어휘 범위를 벗어난 경우
    """
    ids = np.asarray(ids, dtype=np.int64)
    vocab = weight.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise IndexError(f"embedding: 토큰 id가 범위 [0, {vocab})를 벗어났습니다")

    def backward(g):
        grad = np.zeros_like(weight.data)
        np.add.at(grad, ids, g)
        return (grad,)

    return make_op("embedding", weight.data[ids], (weight,), backward)


def dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator]) -> Tensor:
    """rng가 None이거나 rate가 0이면 항등 함수 (기록하지 않음)"""
    if rng is None or rate <= 0.0:
        return x
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(1.0 - rate)

    def backward(g):
        return (g * keep,)

    return make_op("dropout", x.data * keep, (x,), backward)


# ===== 손실 =====
def cross_entropy(
    logits: Tensor,
    targets,
    mask=None,
    reduction: str = "mean",
) -> Tensor:
    """
    softmax cross-entropy

    Args:
        logits: [..., V] 로짓
        targets: logits.shape[:-1] 형태의 정수 정답
        mask: 같은 형태의 bool 배열 (False 위치는 손실에서 제외, 예: PAD)
        reduction: 'mean' (유효 위치 평균), 'sum', 'none' (위치별 손실)

    Returns:
        손실 텐서 (mean/sum은 스칼라)

    Raises:
        IndexError: 유효 위치의 정답이 [0, V) 범위를 벗어난 경우
        ContractError: mean인데 유효 위치가 하나도 없는 경우
    """
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != logits.shape[:-1]:
        raise DimensionError(f"cross_entropy: targets {targets.shape}와 logits {logits.shape} 불일치")
    weights = np.ones(targets.shape, dtype=logits.dtype) if mask is None else np.asarray(mask).astype(logits.dtype)
    vocab = logits.shape[-1]
    valid = weights > 0
    if np.any(valid & ((targets < 0) | (targets >= vocab))):
        raise IndexError(f"cross_entropy: 정답 id가 범위 [0, {vocab})를 벗어났습니다")
    if reduction not in ("mean", "sum", "none"):
        raise ContractError(f"지원하지 않는 reduction: {reduction}")

    safe_targets = np.where(valid, targets, 0)
    lsm = _log_softmax_data(logits.data)
    picked = np.take_along_axis(lsm, safe_targets[..., None], axis=-1)[..., 0]
    token_loss = -picked * weights

    if reduction == "mean":
        denom = weights.sum()
        if denom <= 0:
            raise ContractError("cross_entropy: 손실을 계산할 유효 위치가 없습니다")
        out = np.asarray(token_loss.sum() / denom, dtype=logits.dtype)
    elif reduction == "sum":
        denom = 1.0
        out = np.asarray(token_loss.sum(), dtype=logits.dtype)
    else:
        denom = 1.0
        out = token_loss

    def backward(g):
        probs = np.exp(lsm)
        np.put_along_axis(probs, safe_targets[..., None],
                          np.take_along_axis(probs, safe_targets[..., None], axis=-1) - 1.0, axis=-1)
        scale_ = (np.broadcast_to(g, weights.shape) * weights / denom)[..., None]
        return (probs * scale_,)

    return make_op("cross_entropy", out, (logits,), backward)


def softmax_cross_entropy(logits: Tensor, target: int) -> Tensor:
    """단일 로짓 벡터 [V]와 정답 인덱스에 대한 -log softmax(logits)[target]"""
    if logits.ndim != 1:
        raise DimensionError(f"softmax_cross_entropy는 1차원 로짓을 받습니다: {logits.shape}")
    return cross_entropy(logits, np.asarray(target), reduction="sum")
