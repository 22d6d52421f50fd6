"""
PER / WER / 이의어 정확도 채점

모든 비율은 코퍼스 전체 합으로 계산합니다 (micro 평균).
    PER = 전체 음소 편집 수 / 전체 정답 음소 수   (경계 기호 "|" 제외)
    WER = 전체 단어 편집 수 / 전체 정답 단어 수   (단어 = "|" 사이 음소열, 연음 기호 "‿" 제외)

연음 기호는 PER에는 음소로 세지만 단어 비교(WER, 이의어 정확도)에서는 떼어 냅니다.
"""

from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from corpus import BOUNDARY, LIAISON, Example, decode_target

from .edit_distance import MATCH, SUBSTITUTE, edit_count, edit_distance


Hypothesis = Union[str, Sequence[str]]
Word = Tuple[str, ...]


class EvalReport(BaseModel):
    """코퍼스 채점 결과"""
    per: float = Field(ge=0.0, description="음소 오류율 (삽입 때문에 1을 넘을 수 있음)")
    wer: float = Field(ge=0.0, description="단어 오류율")
    heteronym_accuracy: float = Field(ge=0.0, le=1.0, description="이의어 위치 정확도 (위치가 없으면 1)")
    n_examples: int = Field(ge=0)
    total_ref_phonemes: int = Field(ge=0)
    total_ref_words: int = Field(ge=0)
    total_phoneme_edits: int = Field(default=0, ge=0)
    total_word_edits: int = Field(default=0, ge=0)
    n_heteronym_slots: int = Field(default=0, ge=0)
    early_termination_rate: float = Field(default=0.0, ge=0.0, le=1.0, description="정답보다 단어가 적은 가설 비율")
    over_generation_rate: float = Field(default=0.0, ge=0.0, le=1.0, description="정답보다 단어가 많은 가설 비율")
    n_decode_failures: int = Field(default=0, ge=0, description="UTF-8로 해석할 수 없었던 구간 수")
    decode_failure_flag: bool = Field(default=False, description="디코딩 실패가 하나라도 있었는지")
    context_free_heteronym_accuracy: Optional[float] = Field(
        default=None, description="문맥 없는 단어 단위 최선 정확도 (비교용)"
    )
    target_mode: Optional[str] = Field(default=None, description="bytes 또는 symbols")
    decoding: Optional[str] = Field(default=None, description="greedy 또는 beam-k")


def split_words(phonemes: Sequence[str]) -> List[Word]:
    """경계 기호로 음소열을 단어로 나눔 (연음 기호와 빈 단어는 버림)"""
    words, current = [], []
    for token in phonemes:
        if token == BOUNDARY:
            if current:
                words.append(tuple(current))
            current = []
        elif token != LIAISON:
            current.append(token)
    if current:
        words.append(tuple(current))
    return words


def _tokens(hypothesis: Hypothesis) -> List[str]:
    return hypothesis.split() if isinstance(hypothesis, str) else list(hypothesis)


def _rate(edits: int, total: int) -> float:
    if total == 0:
        return float(edits)
    return edits / total


def score_corpus(
    examples: Sequence[Example],
    hypotheses: Sequence[Hypothesis],
    decode_failures: Optional[Sequence[int]] = None,
) -> EvalReport:
    """
    가설 음소열을 정답과 비교해 채점

    Args:
        examples: 정답 예제
        hypotheses: 예제와 같은 순서의 가설 (공백 구분 문자열 또는 음소 목록)
        decode_failures: 예제별 디코딩 실패 구간 수

    Raises:
        ValueError: 예제와 가설 개수가 다른 경우
    """
    if len(examples) != len(hypotheses):
        raise ValueError(f"예제 {len(examples)}개와 가설 {len(hypotheses)}개의 개수가 다릅니다")
    failures = list(decode_failures) if decode_failures is not None else [0] * len(examples)

    phoneme_edits = word_edits = ref_phonemes = ref_words = 0
    slots = correct_slots = early = over = 0
    for example, hypothesis in zip(examples, hypotheses):
        hyp_tokens = _tokens(hypothesis)
        ref_flat = [p for p in example.phonemes if p != BOUNDARY]
        hyp_flat = [p for p in hyp_tokens if p != BOUNDARY]
        phoneme_edits += edit_count(ref_flat, hyp_flat)
        ref_phonemes += len(ref_flat)

        ref_w, hyp_w = split_words(example.phonemes), split_words(hyp_tokens)
        edits, alignment = edit_distance(ref_w, hyp_w)
        word_edits += edits
        ref_words += len(ref_w)
        early += len(hyp_w) < len(ref_w)
        over += len(hyp_w) > len(ref_w)

        if example.heteronym_slots:
            aligned: Dict[int, int] = {
                step.ref_index: step.hyp_index for step in alignment if step.op in (MATCH, SUBSTITUTE)
            }
            for slot in example.heteronym_slots:
                slots += 1
                hyp_index = aligned.get(slot.word_position)
                if hyp_index is not None and hyp_w[hyp_index] == ref_w[slot.word_position]:
                    correct_slots += 1

    n = len(examples)
    n_failures = int(sum(failures))
    return EvalReport(
        per=_rate(phoneme_edits, ref_phonemes),
        wer=_rate(word_edits, ref_words),
        heteronym_accuracy=correct_slots / slots if slots else 1.0,
        n_examples=n,
        total_ref_phonemes=ref_phonemes,
        total_ref_words=ref_words,
        total_phoneme_edits=phoneme_edits,
        total_word_edits=word_edits,
        n_heteronym_slots=slots,
        early_termination_rate=early / n if n else 0.0,
        over_generation_rate=over / n if n else 0.0,
        n_decode_failures=n_failures,
        decode_failure_flag=n_failures > 0,
    )


def score_token_hypotheses(
    examples: Sequence[Example],
    token_hypotheses: Sequence[Sequence[int]],
    target_mode: str,
) -> EvalReport:
    """디코더 출력 토큰을 음소열로 바꾼 뒤 채점 (PAD/BOS 무시, EOS 이후 버림)"""
    decoded, failures = [], []
    for tokens in token_hypotheses:
        phonemes, n_failures = decode_target(tokens, target_mode)
        decoded.append(phonemes)
        failures.append(n_failures)
    report = score_corpus(examples, decoded, failures)
    report.target_mode = target_mode
    return report
