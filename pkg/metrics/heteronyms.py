"""
이의어 문맥 프로브

단어 하나만 보고 발음을 고르는 (문맥 없는) 방식의 최선 정확도를 계산합니다.
각 이의어 단어마다 분할 안에서 더 많이 나온 발음을 고르는 것이 최선이므로,
값은 단어별 다수 발음 비율의 가중 평균입니다.
"""

from collections import Counter, defaultdict
from typing import Dict, Optional, Sequence, Tuple

from corpus import Example, split_sentences


def slot_words(example: Example) -> Dict[int, str]:
    """이의어 위치 → 철자"""
    words = [word for sentence in split_sentences(example.text) for word in sentence]
    return {slot.word_position: words[slot.word_position] for slot in example.heteronym_slots}


def pronunciation_counts(examples: Sequence[Example]) -> Dict[str, Counter]:
    """이의어 단어별 정답 발음 id 빈도"""
    counts: Dict[str, Counter] = defaultdict(Counter)
    for example in examples:
        words = slot_words(example)
        for slot in example.heteronym_slots:
            counts[words[slot.word_position]][slot.pronunciation_id] += 1
    return dict(counts)


def context_free_accuracy(examples: Sequence[Example]) -> Tuple[Optional[float], int]:
    """
    문맥 없는 단어 단위 조회로 얻을 수 있는 최선 이의어 정확도

    Returns:
        (정확도, 이의어 위치 수). 위치가 없으면 정확도는 None.
    """
    counts = pronunciation_counts(examples)
    total = sum(sum(c.values()) for c in counts.values())
    if total == 0:
        return None, 0
    best = sum(max(c.values()) for c in counts.values())
    return best / total, total
