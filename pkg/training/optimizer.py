"""
AdamW 옵티마이저와 전역 L2 norm 그래디언트 클리핑
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np

from g2p_model import ModelParams
from tensor_core import Tensor

from .config import OptimizerConfig


@dataclass
class AdamWState:
    """파라미터별 1차/2차 모멘트와 스텝 수"""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamWState":
        return cls(
            m={name: np.zeros_like(t.data) for name, t in params.named_parameters()},
            v={name: np.zeros_like(t.data) for name, t in params.named_parameters()},
        )


def global_grad_norm(tensors: Iterable[Tensor]) -> float:
    total = 0.0
    for tensor in tensors:
        if tensor.grad is not None:
            total += float(np.sum(np.square(tensor.grad, dtype=np.float64)))
    return float(np.sqrt(total))


def clip_gradients(tensors: Iterable[Tensor], max_norm: float = 5.0) -> float:
    """
    전역 L2 norm이 max_norm을 넘으면 모든 그래디언트를 max_norm/norm 배로 축소

    Returns:
        클리핑 전 norm
    """
    tensors = list(tensors)
    norm = global_grad_norm(tensors)
    if norm > max_norm:
        factor = max_norm / norm
        for tensor in tensors:
            if tensor.grad is not None:
                tensor.grad = (tensor.grad * factor).astype(tensor.grad.dtype)
    return norm


def adamw_update(
    params: ModelParams,
    state: AdamWState,
    config: OptimizerConfig,
    lr: Optional[float] = None,
) -> AdamWState:
    """
    분리형 weight decay Adam 한 스텝 (bias correction 포함)

    θ ← θ(1 − lr·λ) − lr · m̂ / (√v̂ + ε). 그래디언트가 없는 텐서는 0으로 취급합니다.
    """
    lr = config.lr if lr is None else lr
    state.step += 1
    t = state.step
    correction1 = 1.0 - config.beta1 ** t
    correction2 = 1.0 - config.beta2 ** t
    for name, tensor in params.named_parameters():
        grad = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        m = config.beta1 * state.m[name] + (1.0 - config.beta1) * grad
        v = config.beta2 * state.v[name] + (1.0 - config.beta2) * grad * grad
        state.m[name], state.v[name] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        updated = tensor.data * (1.0 - lr * config.weight_decay) - lr * m_hat / (np.sqrt(v_hat) + config.eps)
        tensor.data = updated.astype(tensor.dtype)
    return state
