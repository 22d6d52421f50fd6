"""
학습 설정 스키마
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field


class SamplingPolicy(BaseModel):
    """학습 방법과 치환 비율 정책"""
    method: Literal["teacher_forcing", "uniform", "loss_based"] = Field(
        default="teacher_forcing", description="teacher forcing 또는 two-pass 샘플링 방식"
    )
    ratio_mode: Literal["fixed", "adaptive"] = Field(default="fixed", description="고정/적응형 치환 비율")
    fixed_ratio: float = Field(default=0.0, ge=0.0, le=1.0, description="고정 치환 비율")
    ratio_clamp_max: float = Field(default=0.9, gt=0.0, le=1.0, description="적응형 비율 상한")

    @property
    def is_two_pass(self) -> bool:
        return self.method != "teacher_forcing"

    @property
    def label(self) -> str:
        if not self.is_two_pass:
            return "teacher_forcing"
        return f"{self.method}/{self.ratio_mode}"


class OptimizerConfig(BaseModel):
    """AdamW + 그래디언트 클리핑 설정"""
    lr: float = Field(default=3e-4, gt=0.0, description="학습률")
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    weight_decay: float = Field(default=5e-3, ge=0.0, description="분리형 weight decay λ")
    max_grad_norm: float = Field(default=5.0, gt=0.0, description="전역 L2 norm 클리핑 상한")


class TrainerConfig(BaseModel):
    """에폭 루프 설정"""
    epochs: int = Field(default=30, ge=1, description="에폭 수")
    batch_size: int = Field(default=32, ge=1, description="미니배치 크기")
    val_per_examples: Optional[int] = Field(
        default=200, ge=1, description="검증 PER 계산에 쓸 예제 수 (None이면 전체)"
    )
    val_batch_size: int = Field(default=64, ge=1, description="검증 배치 크기")
    max_len_factor: int = Field(default=2, ge=1, description="검증 디코딩 최대 길이 = factor × 소스 + offset")
    max_len_offset: int = Field(default=16, ge=0)
