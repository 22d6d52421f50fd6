"""
합성 발음 사전과 정답 변환기 (gold transducer)

철자-발음 규칙 문법으로 단어를 만들고, 일부 단어는 불규칙 발음을 갖습니다.
이의어(heteronym)는 두 발음을 갖고, 바로 앞 단어가 cue 단어이면 발음 B,
아니면 발음 A를 씁니다 (문장 첫 단어는 항상 A).

단어 경계에서는 연음 규칙을 적용합니다: 앞 단어가 지정 자음으로 끝나고 다음
단어가 모음으로 시작하면 앞 단어 끝에 연음 기호를 붙입니다.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field


# ===== 음소 목록 (ARPAbet 유사, 39개) =====
VOWELS = ["AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW"]
CONSONANTS = [
    "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N", "NG",
    "P", "R", "S", "SH", "T", "TH", "V", "W", "Y", "Z", "ZH",
]
PHONEME_INVENTORY = VOWELS + CONSONANTS

BOUNDARY = "|"
LIAISON = "‿"
LINKING_CONSONANTS = frozenset({"N", "R", "T", "D", "Z"})
VOWEL_SET = frozenset(VOWELS)


# ===== 철자-발음 규칙 =====
ONSETS = [
    ("b", "B"), ("ch", "CH"), ("d", "D"), ("dh", "DH"), ("f", "F"), ("g", "G"),
    ("h", "HH"), ("j", "JH"), ("k", "K"), ("l", "L"), ("m", "M"), ("n", "N"),
    ("p", "P"), ("r", "R"), ("s", "S"), ("sh", "SH"), ("t", "T"), ("th", "TH"),
    ("v", "V"), ("w", "W"), ("y", "Y"), ("z", "Z"),
]
NUCLEI = [
    ("aa", "AE"), ("eh", "EH"), ("ih", "IH"), ("oh", "AA"), ("uh", "AH"),
    ("ee", "IY"), ("oo", "UW"), ("ai", "EY"), ("oa", "OW"), ("oi", "OY"),
    ("ou", "AW"), ("ie", "AY"), ("au", "AO"), ("uu", "UH"),
]
CODAS = [
    ("b", "B"), ("d", "D"), ("g", "G"), ("k", "K"), ("l", "L"), ("m", "M"),
    ("n", "N"), ("ng", "NG"), ("p", "P"), ("r", "R"), ("s", "S"), ("t", "T"),
    ("z", "Z"), ("f", "F"), ("v", "V"), ("sh", "SH"), ("th", "TH"), ("ch", "CH"),
    ("rz", "ER"), ("zh", "ZH"),
]

# 불규칙 발음: 모음 하나를 다른 모음으로 바꿈
IRREGULAR_VOWEL = {
    "AE": "EY", "EH": "IY", "IH": "AY", "AA": "OW", "AH": "UW",
    "IY": "EH", "UW": "UH", "EY": "AE", "OW": "AO", "OY": "AW",
    "AW": "OY", "AY": "IH", "AO": "AA", "UH": "AH", "ER": "AH",
}
# 이의어 발음 B: 첫 모음을 바꿈
HETERONYM_VOWEL = {
    "AE": "AA", "EH": "EY", "IH": "IY", "AA": "AE", "AH": "AO",
    "IY": "IH", "UW": "OW", "EY": "EH", "OW": "UW", "OY": "AY",
    "AW": "AH", "AY": "OY", "AO": "AH", "UH": "UW", "ER": "EH",
}

SYLLABLE_WEIGHTS = (0.4, 0.45, 0.15)
IRREGULAR_RATE = 0.08
CUE_WORD_FRACTION = 0.04
CUE_RULE = "pronunciation B iff the previous word in the sentence is a cue word"


class LexiconError(ValueError):
    """요청한 단어 수가 문법 용량을 넘는 등 사전 생성 실패"""


class VocabularyError(KeyError):
    """사전에 없는 단어"""

    def __init__(self, word: str):
        super().__init__(word)
        self.word = word

    def __str__(self) -> str:
        return f"사전에 없는 단어입니다: {self.word!r}"


class HeteronymEntry(BaseModel):
    """이의어 항목"""
    pronunciation_a: List[str] = Field(description="기본 발음 (문맥 없음)")
    pronunciation_b: List[str] = Field(description="cue 단어 뒤 발음")
    cue_rule: str = Field(default=CUE_RULE, description="발음 선택 규칙")


class Lexicon(BaseModel):
    """합성 발음 사전"""
    entries: Dict[str, List[str]] = Field(description="단어 → 기본 발음")
    heteronyms: Dict[str, HeteronymEntry] = Field(default_factory=dict, description="이의어 → 두 발음")
    cue_words: List[str] = Field(default_factory=list, description="발음 B를 유발하는 단어들 (정렬됨)")
    inventory: List[str] = Field(default_factory=lambda: list(PHONEME_INVENTORY), description="음소 목록")
    seed: Optional[int] = Field(default=None, description="생성 시드")

    @property
    def words(self) -> List[str]:
        return sorted(self.entries)

    def is_heteronym(self, word: str) -> bool:
        return word in self.heteronyms

    def pronounce(self, word: str, previous: Optional[str]) -> Tuple[List[str], Optional[int]]:
        """
        문맥(앞 단어)을 반영한 단어 발음

        Returns:
            (발음, 이의어면 발음 id 0/1, 아니면 None)

        Raises:
            VocabularyError: 사전에 없는 단어
        """
        if word in self.heteronyms:
            entry = self.heteronyms[word]
            if previous is not None and previous in self.cue_words:
                return list(entry.pronunciation_b), 1
            return list(entry.pronunciation_a), 0
        if word not in self.entries:
            raise VocabularyError(word)
        return list(self.entries[word]), None


def grammar_capacity(max_syllables: int = len(SYLLABLE_WEIGHTS)) -> int:
    """규칙 문법이 만들 수 있는 서로 다른 단어 수 (첫 음절 onset 생략, 마지막 음절만 coda)"""
    first = (len(ONSETS) + 1) * len(NUCLEI)
    inner = len(ONSETS) * len(NUCLEI)
    codas = len(CODAS) + 1
    return sum(first * inner ** (n - 1) * codas for n in range(1, max_syllables + 1))


def _generate_word(rng: np.random.Generator) -> Tuple[str, List[str]]:
    n_syllables = int(rng.choice(len(SYLLABLE_WEIGHTS), p=SYLLABLE_WEIGHTS)) + 1
    spelling, phonemes = [], []
    for index in range(n_syllables):
        # 첫 음절만 onset 생략 가능
        if index > 0 or rng.random() < 0.8:
            grapheme, phoneme = ONSETS[rng.integers(len(ONSETS))]
            spelling.append(grapheme)
            phonemes.append(phoneme)
        grapheme, phoneme = NUCLEI[rng.integers(len(NUCLEI))]
        spelling.append(grapheme)
        phonemes.append(phoneme)
    if rng.random() < 0.6:
        grapheme, phoneme = CODAS[rng.integers(len(CODAS))]
        spelling.append(grapheme)
        phonemes.append(phoneme)
    if rng.random() < IRREGULAR_RATE:
        vowel_positions = [i for i, p in enumerate(phonemes) if p in VOWEL_SET]
        target = vowel_positions[rng.integers(len(vowel_positions))]
        phonemes[target] = IRREGULAR_VOWEL[phonemes[target]]
    return "".join(spelling), phonemes


def _shift_first_vowel(pronunciation: List[str]) -> List[str]:
    shifted = list(pronunciation)
    for i, phoneme in enumerate(shifted):
        if phoneme in VOWEL_SET:
            shifted[i] = HETERONYM_VOWEL[phoneme]
            break
    return shifted


def build_lexicon(seed: int, n_words: int = 200, n_heteronyms: int = 10) -> Lexicon:
    """
    합성 발음 사전 생성

    Args:
        seed: 난수 시드 (같은 시드 → 같은 사전)
        n_words: 전체 단어 수 (이의어, cue 단어 포함)
        n_heteronyms: 이의어 수

    Returns:
        Lexicon

    Raises:
        LexiconError: n_heteronyms >= n_words 이거나 문법 용량을 넘는 경우
    """
    if n_words <= 0:
        raise LexiconError("n_words는 양수여야 합니다")
    if not 0 <= n_heteronyms < n_words:
        raise LexiconError(f"n_heteronyms({n_heteronyms})는 0 이상 n_words({n_words}) 미만이어야 합니다")
    capacity = grammar_capacity()
    if n_words > capacity // 2:
        raise LexiconError(f"n_words({n_words})가 문법 용량({capacity})에 비해 너무 큽니다")

    rng = np.random.default_rng(seed)
    entries: Dict[str, List[str]] = {}
    attempts, max_attempts = 0, n_words * 200
    while len(entries) < n_words:
        attempts += 1
        if attempts > max_attempts:
            raise LexiconError(f"{max_attempts}회 시도 후에도 서로 다른 단어 {n_words}개를 만들지 못했습니다")
        word, pronunciation = _generate_word(rng)
        if word not in entries:
            entries[word] = pronunciation

    words = sorted(entries)
    order = rng.permutation(len(words))
    heteronym_words = [words[i] for i in order[:n_heteronyms]]
    n_cue = max(2, int(round(n_words * CUE_WORD_FRACTION))) if n_heteronyms else 0
    n_cue = min(n_cue, n_words - n_heteronyms)
    cue_words = sorted(words[i] for i in order[n_heteronyms:n_heteronyms + n_cue])

    heteronyms = {
        word: HeteronymEntry(
            pronunciation_a=entries[word],
            pronunciation_b=_shift_first_vowel(entries[word]),
        )
        for word in sorted(heteronym_words)
    }
    return Lexicon(entries=entries, heteronyms=heteronyms, cue_words=cue_words, seed=seed)


def split_sentences(text: str) -> List[List[str]]:
    """'. '로 이어진 텍스트를 문장별 단어 목록으로 분리"""
    sentences = []
    for chunk in text.split("."):
        words = chunk.split()
        if words:
            sentences.append(words)
    return sentences


def transcribe_with_slots(lexicon: Lexicon, text: str) -> Tuple[List[str], List[Tuple[int, int]]]:
    """
    정답 발음열과 이의어 위치를 함께 계산

    Returns:
        (경계 기호가 포함된 음소열, [(단어 위치, 발음 id), ...])

    Raises:
        VocabularyError: 사전에 없는 단어
    """
    words: List[List[str]] = []
    slots: List[Tuple[int, int]] = []
    for sentence in split_sentences(text):
        previous = None
        for word in sentence:
            pronunciation, pron_id = lexicon.pronounce(word, previous)
            if pron_id is not None:
                slots.append((len(words), pron_id))
            words.append(pronunciation)
            previous = word

    # 연음 규칙 (문장 경계 포함 모든 단어 경계)
    for left, right in zip(words, words[1:]):
        if left[-1] in LINKING_CONSONANTS and right[0] in VOWEL_SET:
            left.append(LIAISON)

    phonemes: List[str] = []
    for index, pronunciation in enumerate(words):
        if index:
            phonemes.append(BOUNDARY)
        phonemes.extend(pronunciation)
    return phonemes, slots


def gold_transcribe(lexicon: Lexicon, text: str) -> List[str]:
    """
    텍스트의 정답 음소열 (순수 함수)

    Raises:
        VocabularyError: 사전에 없는 단어
    """
    phonemes, _ = transcribe_with_slots(lexicon, text)
    return phonemes
