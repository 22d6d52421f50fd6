"""
모델 파라미터 (θ)

(층, 역할) 이름으로 키가 붙은 텐서 묶음과 초기화 함수입니다.
"""

from typing import Dict, Iterator, List, Tuple

import numpy as np
from pydantic import ValidationError

from tensor_core import Tensor, resolve_dtype

from .config import ConfigError, ModelConfig


INIT_STD = 0.02


def _attention_shapes(prefix: str, d: int) -> List[Tuple[str, tuple, str]]:
    shapes = []
    for proj in ("q", "k", "v", "o"):
        shapes.append((f"{prefix}.w{proj}", (d, d), "weight"))
        shapes.append((f"{prefix}.b{proj}", (d,), "zero"))
    return shapes


def _layer_norm_shapes(prefix: str, d: int) -> List[Tuple[str, tuple, str]]:
    return [(f"{prefix}.g", (d,), "one"), (f"{prefix}.b", (d,), "zero")]


def _ffn_shapes(prefix: str, d: int, f: int) -> List[Tuple[str, tuple, str]]:
    return [
        (f"{prefix}.w1", (d, f), "weight"),
        (f"{prefix}.b1", (f,), "zero"),
        (f"{prefix}.w2", (f, d), "weight"),
        (f"{prefix}.b2", (d,), "zero"),
    ]


def parameter_layout(config: ModelConfig) -> List[Tuple[str, tuple, str]]:
    """
    파라미터 (이름, shape, 초기화 종류) 목록을 고정된 순서로 반환

    초기화 종류: weight(정규분포), zero, one
    """
    d, f = config.d_model, config.d_ffn
    layout = [
        ("src_embed", (config.src_vocab_size, d), "weight"),
        ("tgt_embed", (config.tgt_vocab_size, d), "weight"),
    ]
    for layer in range(config.n_enc_layers):
        p = f"enc.{layer}"
        layout += _layer_norm_shapes(f"{p}.ln1", d)
        layout += _attention_shapes(f"{p}.attn", d)
        layout += _layer_norm_shapes(f"{p}.ln2", d)
        layout += _ffn_shapes(f"{p}.ffn", d, f)
    layout += _layer_norm_shapes("enc.ln_f", d)
    for layer in range(config.n_dec_layers):
        p = f"dec.{layer}"
        layout += _layer_norm_shapes(f"{p}.ln1", d)
        layout += _attention_shapes(f"{p}.self_attn", d)
        layout += _layer_norm_shapes(f"{p}.ln2", d)
        layout += _attention_shapes(f"{p}.cross_attn", d)
        layout += _layer_norm_shapes(f"{p}.ln3", d)
        layout += _ffn_shapes(f"{p}.ffn", d, f)
    layout += _layer_norm_shapes("dec.ln_f", d)
    layout += [
        ("out.w", (d, config.tgt_vocab_size), "weight"),
        ("out.b", (config.tgt_vocab_size,), "zero"),
    ]
    return layout


class ModelParams:
    """
    모델 파라미터 묶음

    학습 스텝은 파라미터를 독점적으로 갱신하고, 평가 중에는 읽기 전용으로
    여러 스레드에서 공유할 수 있습니다.
    """

    def __init__(self, config: ModelConfig, tensors: Dict[str, Tensor]):
        self.config = config
        self.tensors = tensors

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self.tensors.items())

    def parameters(self) -> List[Tensor]:
        return list(self.tensors.values())

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def snapshot(self) -> Dict[str, np.ndarray]:
        """현재 값의 복사본 (best checkpoint 보관용)"""
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load_snapshot(self, arrays: Dict[str, np.ndarray]) -> None:
        for name, array in arrays.items():
            self.tensors[name].data = array.copy()

    def copy(self) -> "ModelParams":
        tensors = {
            name: Tensor(t.data.copy(), requires_grad=True, name=name)
            for name, t in self.tensors.items()
        }
        return ModelParams(self.config, tensors)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(t.data)) for t in self.tensors.values())


def init_model(config: ModelConfig, seed: int) -> ModelParams:
    """
    모델 파라미터 초기화

    가중치는 Normal(0, 0.02), bias와 layer norm offset은 0, layer norm gain은 1.
    같은 (config, seed)이면 비트 단위로 같은 결과를 냅니다.

    Args:
        config: 모델 설정
        seed: 난수 시드

    Returns:
        ModelParams

    Raises:
        ConfigError: 설정이 유효하지 않은 경우
    """
    try:
        config = ModelConfig.model_validate(config.model_dump())
    except ValidationError as e:
        raise ConfigError(f"모델 설정 오류: {e}") from e

    dtype = resolve_dtype(config.dtype)
    rng = np.random.default_rng(seed)
    tensors: Dict[str, Tensor] = {}
    for name, shape, kind in parameter_layout(config):
        if kind == "weight":
            data = rng.normal(0.0, INIT_STD, size=shape)
        elif kind == "one":
            data = np.ones(shape)
        else:
            data = np.zeros(shape)
        tensors[name] = Tensor(data.astype(dtype), requires_grad=True, name=name)
    return ModelParams(config, tensors)
