"""
합성 G2P 코퍼스 모듈

발음 사전, 정답 변환기, 문장 연결 코퍼스 생성기, 토큰 인코딩을 제공합니다.
파일 입출력은 services.FileHandler가 담당합니다.
"""

from .lexicon import (
    BOUNDARY,
    LIAISON,
    LINKING_CONSONANTS,
    PHONEME_INVENTORY,
    VOWELS,
    HeteronymEntry,
    Lexicon,
    LexiconError,
    VocabularyError,
    build_lexicon,
    gold_transcribe,
    split_sentences,
    transcribe_with_slots,
)
from .generator import (
    SPLIT_NAMES,
    CorpusSplit,
    Example,
    HeteronymSlot,
    generate_corpus,
    make_example,
)
from .encoding import (
    TargetVocab,
    decode_target,
    decoder_input,
    encode_io,
    encode_source,
    strip_special,
    target_vocab,
)

__all__ = [
    "BOUNDARY",
    "LIAISON",
    "LINKING_CONSONANTS",
    "PHONEME_INVENTORY",
    "VOWELS",
    "HeteronymEntry",
    "Lexicon",
    "LexiconError",
    "VocabularyError",
    "build_lexicon",
    "gold_transcribe",
    "split_sentences",
    "transcribe_with_slots",
    "SPLIT_NAMES",
    "CorpusSplit",
    "Example",
    "HeteronymSlot",
    "generate_corpus",
    "make_example",
    "TargetVocab",
    "decode_target",
    "decoder_input",
    "encode_io",
    "encode_source",
    "strip_special",
    "target_vocab",
]
