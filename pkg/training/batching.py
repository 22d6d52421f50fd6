"""
미니배치 구성

인코딩된 (소스, 타깃) 쌍을 패딩된 배열로 묶습니다.
    src       [B, S]  PAD = 256
    dec_input [B, T]  BOS, y_0 .. y_{t-1}, 이후 PAD
    labels    [B, T]  y_0 .. y_t, 이후 PAD
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from corpus import Example, encode_io
from g2p_model import BOS_ID, PAD_ID, SRC_PAD_ID, ModelConfig
from tensor_core import ContractError


EncodedPair = Tuple[List[int], List[int]]


@dataclass
class Batch:
    """패딩된 미니배치"""
    src: np.ndarray
    dec_input: np.ndarray
    labels: np.ndarray
    target_lengths: np.ndarray
    indices: List[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.src.shape[0]

    @property
    def mask(self) -> np.ndarray:
        """[B, T] bool, True = 손실 계산 위치"""
        return np.arange(self.labels.shape[1])[None, :] < self.target_lengths[:, None]

    def example(self, row: int) -> EncodedPair:
        """배치의 한 행을 패딩 없는 (소스, 타깃)으로 복원"""
        src = [int(b) for b in self.src[row] if b != SRC_PAD_ID]
        tgt = [int(t) for t in self.labels[row, : self.target_lengths[row]]]
        return src, tgt


def collate(pairs: Sequence[EncodedPair], indices: Sequence[int] = ()) -> Batch:
    """
    (소스, 타깃) 쌍 목록을 Batch로 묶음

    Raises:
        ContractError: 빈 배치 또는 빈 타깃
    """
    if not pairs:
        raise ContractError("빈 배치입니다")
    batch = len(pairs)
    src_len = max(len(src) for src, _ in pairs)
    tgt_len = max(len(tgt) for _, tgt in pairs)
    if tgt_len == 0 or any(len(tgt) == 0 for _, tgt in pairs):
        raise ContractError("타깃은 최소한 EOS를 포함해야 합니다")

    src = np.full((batch, max(src_len, 1)), SRC_PAD_ID, dtype=np.int64)
    dec_input = np.full((batch, tgt_len), PAD_ID, dtype=np.int64)
    labels = np.full((batch, tgt_len), PAD_ID, dtype=np.int64)
    lengths = np.zeros(batch, dtype=np.int64)
    for row, (s, t) in enumerate(pairs):
        src[row, : len(s)] = s
        labels[row, : len(t)] = t
        dec_input[row, 0] = BOS_ID
        dec_input[row, 1 : len(t)] = t[:-1]
        lengths[row] = len(t)
    return Batch(src=src, dec_input=dec_input, labels=labels, target_lengths=lengths, indices=list(indices))


def encode_examples(examples: Sequence[Example], config: ModelConfig) -> List[EncodedPair]:
    """예제 목록을 encode_io로 인코딩"""
    return [encode_io(example, config) for example in examples]


def iterate_batches(
    pairs: Sequence[EncodedPair],
    batch_size: int,
    rng: np.random.Generator = None,
) -> List[Batch]:
    """rng가 있으면 섞어서, 없으면 순서대로 배치를 만듭니다"""
    order = rng.permutation(len(pairs)) if rng is not None else np.arange(len(pairs))
    batches = []
    for start in range(0, len(order), batch_size):
        chunk = [int(i) for i in order[start : start + batch_size]]
        batches.append(collate([pairs[i] for i in chunk], chunk))
    return batches
