"""
문장 단위 G2P 코퍼스 생성기

기본 문장(3-9 단어)을 만들고, 학습/검증은 1-3문장, test_short는 1-3문장,
test_long은 4-5문장을 ". "로 이어 붙여 예제를 만듭니다.
네 분할은 기본 문장 단위로 서로 겹치지 않습니다.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from g2p_model import ModelConfig, SequenceLengthError

from .lexicon import Lexicon, transcribe_with_slots


SENTENCE_MIN_WORDS = 3
SENTENCE_MAX_WORDS = 9
SENTENCE_JOIN = ". "
SENTENCE_END = "."
HETERONYM_SENTENCE_RATE = 0.35
CUE_BEFORE_HETERONYM_RATE = 0.5
HETERONYM_QUOTA_EVERY = 10

SPLIT_SENTENCE_COUNTS = {
    "train": (1, 3),
    "validation": (1, 3),
    "test_short": (1, 3),
    "test_long": (4, 5),
}
SPLIT_NAMES = tuple(SPLIT_SENTENCE_COUNTS)


class HeteronymSlot(BaseModel):
    """예제 안의 이의어 위치"""
    word_position: int = Field(ge=0, description="예제 전체 기준 단어 인덱스")
    pronunciation_id: int = Field(ge=0, le=1, description="정답 발음 (0 = A, 1 = B)")


class Example(BaseModel):
    """입력 텍스트와 정답 음소열 한 쌍"""
    text: str = Field(description="그래프 문자열")
    phonemes: List[str] = Field(description="단어 경계 기호가 포함된 음소열")
    n_sentences: int = Field(ge=1, description="이어 붙인 문장 수")
    heteronym_slots: List[HeteronymSlot] = Field(default_factory=list, description="이의어 위치")

    @property
    def phoneme_string(self) -> str:
        return " ".join(self.phonemes)


class CorpusSplit(BaseModel):
    """학습/검증/테스트 분할"""
    train: List[Example] = Field(default_factory=list)
    validation: List[Example] = Field(default_factory=list)
    test_short: List[Example] = Field(default_factory=list)
    test_long: List[Example] = Field(default_factory=list)

    def split(self, name: str) -> List[Example]:
        if name not in SPLIT_NAMES:
            raise KeyError(f"알 수 없는 분할입니다: {name} (가능: {', '.join(SPLIT_NAMES)})")
        return getattr(self, name)

    def sizes(self) -> dict:
        return {name: len(self.split(name)) for name in SPLIT_NAMES}


def make_example(lexicon: Lexicon, sentences: Sequence[str]) -> Example:
    """문장들을 이어 붙여 정답 변환기로 예제를 만듭니다"""
    text = SENTENCE_JOIN.join(sentences) + SENTENCE_END
    phonemes, slots = transcribe_with_slots(lexicon, text)
    return Example(
        text=text,
        phonemes=phonemes,
        n_sentences=len(sentences),
        heteronym_slots=[HeteronymSlot(word_position=p, pronunciation_id=i) for p, i in slots],
    )


def _generate_sentence(lexicon: Lexicon, rng: np.random.Generator) -> str:
    words = lexicon.words
    plain = [w for w in words if not lexicon.is_heteronym(w)]
    heteronyms = sorted(lexicon.heteronyms)
    n_words = int(rng.integers(SENTENCE_MIN_WORDS, SENTENCE_MAX_WORDS + 1))
    sentence = [plain[i] for i in rng.integers(len(plain), size=n_words)]

    if heteronyms and rng.random() < HETERONYM_SENTENCE_RATE:
        position = int(rng.integers(n_words))
        sentence[position] = heteronyms[rng.integers(len(heteronyms))]
        if position > 0 and lexicon.cue_words and rng.random() < CUE_BEFORE_HETERONYM_RATE:
            sentence[position - 1] = lexicon.cue_words[rng.integers(len(lexicon.cue_words))]
    return " ".join(sentence)


def _sentence_pool(lexicon: Lexicon, rng: np.random.Generator, size: int) -> List[str]:
    pool, seen = [], set()
    attempts = 0
    while len(pool) < size:
        attempts += 1
        if attempts > size * 50:
            break
        sentence = _generate_sentence(lexicon, rng)
        if sentence not in seen:
            seen.add(sentence)
            pool.append(sentence)
    return pool


def _has_heteronym(lexicon: Lexicon, sentence: str) -> bool:
    return any(lexicon.is_heteronym(word) for word in sentence.split())


def _fits(example: Example, limits: Optional[ModelConfig]) -> Tuple[bool, str]:
    if limits is None:
        return True, ""
    from .encoding import encode_io

    try:
        encode_io(example, limits)
    except SequenceLengthError as e:
        return False, str(e)
    return True, ""


def partition_pool(pool: Sequence[str], weights: Dict[str, int]) -> Dict[str, List[str]]:
    """
    기본 문장 풀을 가중치 비율대로 겹치지 않게 나눔 (분할마다 최소 1문장)

    Raises:
        ValueError: 풀 크기가 분할 수보다 작은 경우
    """
    if len(pool) < len(weights):
        raise ValueError(f"문장 {len(pool)}개로 {len(weights)}개 분할을 만들 수 없습니다")
    total = sum(weights.values())
    spare = len(pool) - len(weights)
    sizes = [1 + (spare * w) // total for w in weights.values()]
    sizes[0] += len(pool) - sum(sizes)
    pools, start = {}, 0
    for name, size in zip(weights, sizes):
        pools[name] = list(pool[start : start + size])
        start += size
    return pools


def _build_split(
    lexicon: Lexicon,
    pool: List[str],
    count: int,
    sentence_range: Tuple[int, int],
    rng: np.random.Generator,
    limits: Optional[ModelConfig],
    enforce_quota: bool,
    name: str,
    show_progress: bool,
) -> List[Example]:
    heteronym_pool = [s for s in pool if _has_heteronym(lexicon, s)]
    low, high = sentence_range
    examples: List[Example] = []
    skipped, max_skips = 0, max(100, count * 5)
    while len(examples) < count:
        n_sentences = int(rng.integers(low, high + 1))
        chosen = [pool[i] for i in rng.integers(len(pool), size=n_sentences)]
        if enforce_quota and heteronym_pool and len(examples) % HETERONYM_QUOTA_EVERY == 0:
            chosen[0] = heteronym_pool[rng.integers(len(heteronym_pool))]

        example = make_example(lexicon, chosen)
        ok, reason = _fits(example, limits)
        if not ok:
            skipped += 1
            if show_progress:
                print(f"   ⚠️ {name}: 길이 초과 예제 건너뜀 ({reason})")
            if skipped > max_skips:
                raise SequenceLengthError(
                    f"{name}: 길이 제한 안에 드는 예제를 만들지 못했습니다 ({skipped}회 건너뜀)"
                )
            continue
        examples.append(example)
    return examples


def generate_corpus(
    lexicon: Lexicon,
    seed: int,
    n_train: int = 8000,
    n_valid: int = 500,
    n_test: int = 500,
    limits: Optional[ModelConfig] = None,
    show_progress: bool = False,
) -> CorpusSplit:
    """
    학습/검증/테스트 코퍼스 생성

    Args:
        lexicon: 발음 사전
        seed: 난수 시드 (같은 시드 → 같은 코퍼스)
        n_train: 학습 예제 수
        n_valid: 검증 예제 수
        n_test: test_short, test_long 각각의 예제 수
        limits: 주어지면 encode_io 길이 제한을 넘는 예제를 건너뜀
        show_progress: 진행 상황 출력 여부

    Returns:
        CorpusSplit

    Raises:
        ValueError: 개수가 양수가 아닌 경우
    """
    for label, value in (("n_train", n_train), ("n_valid", n_valid), ("n_test", n_test)):
        if value <= 0:
            raise ValueError(f"{label}은(는) 양수여야 합니다: {value}")

    rng = np.random.default_rng(seed)
    weights = {"train": n_train, "validation": n_valid, "test_short": n_test, "test_long": n_test}
    pool = _sentence_pool(lexicon, rng, sum(weights.values()))
    pools = partition_pool(pool, weights)

    if show_progress:
        print(f"🔍 코퍼스 생성 중... (기본 문장 {len(pool)}개, 시드 {seed})")

    plan = [(name, pools[name], count, name.startswith("test")) for name, count in weights.items()]
    splits = {}
    for name, split_pool, count, quota in plan:
        splits[name] = _build_split(
            lexicon, split_pool, count, SPLIT_SENTENCE_COUNTS[name], rng, limits, quota, name, show_progress
        )
        if show_progress:
            print(f"   ✓ {name}: {len(splits[name])}개")
    return CorpusSplit(**splits)
