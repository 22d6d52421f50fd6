"""
모델 설정 및 특수 토큰 정의

소스는 UTF-8 바이트(0-255) + PAD, 타깃은 PAD/BOS/EOS + 내용 토큰입니다.
"""

from typing import Any, Literal, Mapping

from pydantic import BaseModel, Field, ValidationError, model_validator


# ===== 특수 토큰 =====
PAD_ID = 0
BOS_ID = 1
EOS_ID = 2
N_SPECIAL_TOKENS = 3

SRC_PAD_ID = 256
SRC_VOCAB_SIZE = 257


class ConfigError(ValueError):
    """설정 값이 유효하지 않을 때"""


class SequenceLengthError(ValueError):
    """입력/출력 시퀀스가 설정된 최대 길이를 넘을 때"""


class ModelConfig(BaseModel):
    """바이트 입력 트랜스포머 인코더-디코더 설정"""
    d_model: int = Field(default=128, gt=0, description="모델 차원")
    n_heads: int = Field(default=4, gt=0, description="어텐션 헤드 수")
    n_enc_layers: int = Field(default=3, ge=1, description="인코더 층 수")
    n_dec_layers: int = Field(default=3, ge=1, description="디코더 층 수")
    d_ffn: int = Field(default=256, gt=0, description="피드포워드 은닉 차원")
    dropout_rate: float = Field(default=0.1, ge=0.0, lt=1.0, description="드롭아웃 확률")
    max_src_len: int = Field(default=256, gt=0, description="최대 소스 길이 (바이트)")
    max_tgt_len: int = Field(default=512, gt=1, description="최대 타깃 길이 (EOS 포함)")
    src_vocab_size: int = Field(default=SRC_VOCAB_SIZE, description="소스 어휘 크기 (256 바이트 + PAD)")
    tgt_vocab_size: int = Field(default=N_SPECIAL_TOKENS + 256, ge=4, description="타깃 어휘 크기")
    target_mode: Literal["bytes", "symbols"] = Field(default="bytes", description="타깃 표현 방식")
    dtype: Literal["float32", "float64"] = Field(default="float32", description="파라미터 정밀도")

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model({self.d_model})은 n_heads({self.n_heads})로 나누어떨어져야 합니다")
        if self.src_vocab_size != SRC_VOCAB_SIZE:
            raise ValueError(f"src_vocab_size는 {SRC_VOCAB_SIZE}이어야 합니다 (256 바이트 + PAD)")
        return self

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads


def validate_model_config(data: Mapping[str, Any]) -> ModelConfig:
    """
    dict에서 ModelConfig를 만들고, pydantic 검증 오류를 ConfigError로 바꿉니다.

    Raises:
        ConfigError: 유효하지 않은 설정
    """
    try:
        return ModelConfig.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(f"모델 설정 오류: {e}") from e
