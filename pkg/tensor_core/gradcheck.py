"""
수치 미분 기반 기울기 검증

역전파 기울기를 중심 차분(central finite difference)과 원소별로 비교합니다.
"""

from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .errors import ContractError
from .tensor import Tensor, backward, no_grad, reset_graph, zero_grad


class GradCheckReport(BaseModel):
    """기울기 검증 결과"""
    passed: bool = Field(description="모든 원소가 허용 오차 이내인지 여부")
    max_relative_error: float = Field(description="최대 상대 오차")
    tolerance: float = Field(description="허용 상대 오차")
    per_input_max_error: List[float] = Field(description="입력별 최대 상대 오차")
    n_checked: int = Field(description="검사한 원소 수")


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    """|a - n| / max(|a|, |n|, floor)"""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def _scalar(out: Tensor) -> float:
    if out.size != 1:
        raise ContractError(f"grad_check 대상 함수는 스칼라를 반환해야 합니다: shape={out.shape}")
    return out.item()


def grad_check(
    f: Callable[..., Tensor],
    inputs: Sequence[Tensor],
    tolerance: float = 1e-5,
    step: float = 1e-5,
    max_elements: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckReport:
    """
    f(*inputs)의 역전파 기울기를 중심 차분과 비교합니다.

    Args:
        f: 스칼라 텐서를 반환하는 결정적 함수
        inputs: requires_grad=True인 입력 텐서들 (검사 중 data가 임시로 교체됨)
        tolerance: 허용 상대 오차
        step: 차분 간격 h
        max_elements: 입력마다 검사할 최대 원소 수 (None이면 전체)
        rng: 원소 샘플링용 난수 생성기

    Returns:
        GradCheckReport
    """
    rng = rng or np.random.default_rng(0)
    zero_grad(inputs)
    reset_graph()
    out = f(*inputs)
    _scalar(out)
    backward(out)
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in inputs]

    per_input: List[float] = []
    n_checked = 0
    for tensor, grad in zip(inputs, analytic):
        original = tensor.data
        flat_indices = np.arange(original.size)
        if max_elements is not None and original.size > max_elements:
            flat_indices = np.sort(rng.choice(original.size, size=max_elements, replace=False))
        worst = 0.0
        for flat in flat_indices:
            idx = np.unravel_index(flat, original.shape)
            perturbed = original.copy()
            perturbed[idx] = original[idx] + step
            tensor.data = perturbed
            with no_grad():
                f_plus = _scalar(f(*inputs))
            perturbed[idx] = original[idx] - step
            with no_grad():
                f_minus = _scalar(f(*inputs))
            numeric = (f_plus - f_minus) / (2.0 * step)
            worst = max(worst, relative_error(float(grad[idx]), numeric))
            n_checked += 1
        tensor.data = original
        per_input.append(worst)

    zero_grad(inputs)
    max_error = max(per_input) if per_input else 0.0
    return GradCheckReport(
        passed=max_error < tolerance,
        max_relative_error=max_error,
        tolerance=tolerance,
        per_input_max_error=per_input,
        n_checked=n_checked,
    )
