"""
공용 pytest 픽스처

- 작은 float64 모델 설정 (드롭아웃 없음)
- 작은 발음 사전 / 코퍼스
- 정답 토큰에 모든 확률을 주는 "완벽한" 모델 (transformer.encode / decoder_forward 교체)
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np
import pytest

from corpus import build_lexicon, encode_io, generate_corpus
from g2p_model import EOS_ID, SRC_PAD_ID, EncoderOutput, ModelConfig, init_model, transformer
from tensor_core import Tensor


TINY_MODEL = dict(
    d_model=16,
    n_heads=2,
    n_enc_layers=1,
    n_dec_layers=1,
    d_ffn=32,
    dropout_rate=0.0,
    max_src_len=512,
    max_tgt_len=1024,
    dtype="float64",
)
PERFECT_LOGIT = 50.0


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="느린 학습 테스트 실행")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="--runslow 옵션이 있어야 실행됩니다")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(**TINY_MODEL)


@pytest.fixture
def tiny_params(tiny_config):
    return init_model(tiny_config, seed=0)


@pytest.fixture(scope="session")
def lexicon():
    return build_lexicon(seed=7, n_words=60, n_heteronyms=4)


@pytest.fixture(scope="session")
def corpus(lexicon):
    return generate_corpus(
        lexicon, seed=7, n_train=40, n_valid=8, n_test=8, limits=ModelConfig(**TINY_MODEL)
    )


@pytest.fixture
def train_pairs(corpus, tiny_config) -> List[Tuple[List[int], List[int]]]:
    return [encode_io(example, tiny_config) for example in corpus.train]


@pytest.fixture
def perfect_model(monkeypatch):
    """
    주어진 (소스, 타깃) 쌍에 대해 항상 정답 토큰을 예측하는 모델을 설치합니다.

    인코더 memory에 소스 바이트를 그대로 담고, 디코더는 위치 i에서 정답 y_i
    (타깃이 끝난 뒤에는 EOS)의 로짓만 크게 만듭니다.
    """

    def install(pairs: Sequence[Tuple[Sequence[int], Sequence[int]]], config: ModelConfig) -> Dict[tuple, list]:
        gold = {tuple(src): list(tgt) for src, tgt in pairs}
        vocab = config.tgt_vocab_size

        def fake_encode(params, src_bytes, dropout_rng=None):
            src = np.atleast_2d(np.asarray(src_bytes, dtype=np.int64))
            return EncoderOutput(memory=Tensor(src[..., None].astype(np.float64)), src_mask=src == SRC_PAD_ID)

        def fake_decoder_forward(params, enc, dec_input, dropout_rng=None):
            tgt = np.atleast_2d(np.asarray(dec_input, dtype=np.int64))
            logits = np.zeros((tgt.shape[0], tgt.shape[1], vocab))
            for row in range(tgt.shape[0]):
                src = tuple(int(b) for b in enc.memory.data[row, :, 0] if b != SRC_PAD_ID)
                target = gold[src]
                for i in range(tgt.shape[1]):
                    logits[row, i, target[i] if i < len(target) else EOS_ID] = PERFECT_LOGIT
            return Tensor(logits)

        monkeypatch.setattr(transformer, "encode", fake_encode)
        monkeypatch.setattr(transformer, "decoder_forward", fake_decoder_forward)
        return gold

    return install
