"""
입출력 토큰 인코딩

소스는 텍스트의 UTF-8 바이트입니다. 타깃은 두 가지 표현을 지원합니다:
    bytes   : 공백으로 이은 음소 문자열의 UTF-8 바이트 (id = 3 + byte)
    symbols : 음소 기호 하나당 토큰 하나 (id = 3 + 기호 인덱스)
두 모드 모두 EOS를 끝에 붙이며, BOS는 디코더 입력을 만드는 쪽에서 붙입니다.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

from g2p_model import BOS_ID, EOS_ID, N_SPECIAL_TOKENS, PAD_ID, ModelConfig, SequenceLengthError

from .generator import Example
from .lexicon import BOUNDARY, LIAISON, PHONEME_INVENTORY


REPLACEMENT = "�"
_FAILURE_RUN = re.compile("�+")


@dataclass(frozen=True)
class TargetVocab:
    """타깃 토큰 어휘"""
    mode: str
    symbols: Tuple[str, ...]

    @property
    def size(self) -> int:
        return N_SPECIAL_TOKENS + len(self.symbols)

    def encode(self, phonemes: Sequence[str]) -> List[int]:
        """음소열 → 내용 토큰 id (EOS 미포함)"""
        if self.mode == "bytes":
            return [N_SPECIAL_TOKENS + b for b in " ".join(phonemes).encode("utf-8")]
        index = {symbol: i for i, symbol in enumerate(self.symbols)}
        try:
            return [N_SPECIAL_TOKENS + index[p] for p in phonemes]
        except KeyError as e:
            raise KeyError(f"타깃 어휘에 없는 음소입니다: {e.args[0]!r}") from e

    def decode(self, ids: Sequence[int]) -> Tuple[List[str], int]:
        """
        토큰 id → 음소열

        특수 토큰은 무시합니다. bytes 모드에서 UTF-8로 해석할 수 없는 구간은
        구간마다 대체 문자 토큰 하나로 바꾸고 그 개수를 함께 돌려줍니다.

        Returns:
            (음소 토큰 목록, 디코딩 실패 구간 수)
        """
        content = [int(i) - N_SPECIAL_TOKENS for i in ids if int(i) >= N_SPECIAL_TOKENS]
        if self.mode == "symbols":
            return [self.symbols[i] for i in content if i < len(self.symbols)], 0
        text = bytes(b for b in content if b < 256).decode("utf-8", errors="replace")
        failures = len(_FAILURE_RUN.findall(text))
        text = _FAILURE_RUN.sub(f" {REPLACEMENT} ", text)
        return text.split(), failures


@lru_cache(maxsize=2)
def target_vocab(mode: str) -> TargetVocab:
    """
    모드별 타깃 어휘

    Raises:
        ValueError: 알 수 없는 모드
    """
    if mode == "bytes":
        return TargetVocab(mode, tuple(f"<0x{b:02X}>" for b in range(256)))
    if mode == "symbols":
        return TargetVocab(mode, tuple(PHONEME_INVENTORY) + (BOUNDARY, LIAISON))
    raise ValueError(f"알 수 없는 target_mode입니다: {mode}")


def encode_source(text: str) -> List[int]:
    """텍스트 → UTF-8 바이트 id"""
    return list(text.encode("utf-8"))


def encode_io(example: Example, config: ModelConfig) -> Tuple[List[int], List[int]]:
    """
    예제를 (소스 바이트, 타깃 토큰 + EOS)로 인코딩

    Raises:
        SequenceLengthError: 소스가 max_src_len 또는 타깃(EOS 포함)이 max_tgt_len을 넘는 경우
    """
    src = encode_source(example.text)
    if len(src) > config.max_src_len:
        raise SequenceLengthError(f"소스 {len(src)}바이트가 최대 {config.max_src_len}를 초과합니다")
    tgt = target_vocab(config.target_mode).encode(example.phonemes) + [EOS_ID]
    # 디코더 입력은 BOS + tgt[:-1]로 길이가 같음
    if len(tgt) > config.max_tgt_len:
        raise SequenceLengthError(f"타깃 {len(tgt)}토큰이 최대 {config.max_tgt_len}를 초과합니다")
    return src, tgt


def decoder_input(target: Sequence[int]) -> List[int]:
    """타깃 y_0..y_t → 디코더 입력 BOS, y_0..y_{t-1}"""
    return [BOS_ID] + list(target[:-1])


def strip_special(tokens: Sequence[int]) -> List[int]:
    """PAD/BOS/EOS 제거 (EOS 이후는 버림)"""
    out = []
    for token in tokens:
        token = int(token)
        if token == EOS_ID:
            break
        if token in (PAD_ID, BOS_ID):
            continue
        out.append(token)
    return out


def decode_target(tokens: Sequence[int], mode: str) -> Tuple[List[str], int]:
    """디코딩 결과 토큰을 음소열로 변환 (특수 토큰 제거 후)"""
    return target_vocab(mode).decode(strip_special(tokens))
