"""
발음 사전 / 코퍼스 생성기 / 토큰 인코딩 테스트
"""

import itertools

import pytest

from corpus import (
    BOUNDARY,
    LIAISON,
    LINKING_CONSONANTS,
    PHONEME_INVENTORY,
    VOWELS,
    LexiconError,
    VocabularyError,
    build_lexicon,
    decode_target,
    decoder_input,
    encode_io,
    generate_corpus,
    gold_transcribe,
    make_example,
    split_sentences,
    strip_special,
    target_vocab,
    transcribe_with_slots,
)
from corpus.encoding import REPLACEMENT
from corpus.generator import partition_pool
from g2p_model import BOS_ID, EOS_ID, N_SPECIAL_TOKENS, PAD_ID, ModelConfig, SequenceLengthError


def _plain_words(lexicon, n):
    return [w for w in lexicon.words if not lexicon.is_heteronym(w) and w not in lexicon.cue_words][:n]


def _sentences_of(example):
    return {" ".join(words) for words in split_sentences(example.text)}


# ===== 발음 사전 =====

def test_lexicon_is_deterministic():
    assert build_lexicon(3, 80, 5) == build_lexicon(3, 80, 5)
    assert build_lexicon(3, 80, 5) != build_lexicon(4, 80, 5)


def test_lexicon_sizes(lexicon):
    assert len(lexicon.entries) == 60
    assert len(lexicon.heteronyms) == 4
    assert len(lexicon.cue_words) >= 2
    assert not set(lexicon.cue_words) & set(lexicon.heteronyms)


def test_heteronym_pronunciations_differ(lexicon):
    for word, entry in lexicon.heteronyms.items():
        assert entry.pronunciation_a == lexicon.entries[word]
        assert entry.pronunciation_a != entry.pronunciation_b
        assert len(entry.pronunciation_a) == len(entry.pronunciation_b)


@pytest.mark.parametrize("n_words, n_heteronyms", [(10, 10), (10, 11), (0, 0), (10, -1)])
def test_invalid_lexicon_sizes(n_words, n_heteronyms):
    with pytest.raises(LexiconError):
        build_lexicon(0, n_words, n_heteronyms)


def test_lexicon_beyond_grammar_capacity():
    with pytest.raises(LexiconError):
        build_lexicon(0, 10**9, 1)


def test_cue_word_selects_second_pronunciation(lexicon):
    heteronym = sorted(lexicon.heteronyms)[0]
    cue = lexicon.cue_words[0]
    plain = _plain_words(lexicon, 1)[0]
    entry = lexicon.heteronyms[heteronym]

    assert lexicon.pronounce(heteronym, None) == (entry.pronunciation_a, 0)
    assert lexicon.pronounce(heteronym, plain) == (entry.pronunciation_a, 0)
    assert lexicon.pronounce(heteronym, cue) == (entry.pronunciation_b, 1)


def test_cue_does_not_cross_sentence_boundary(lexicon):
    heteronym = sorted(lexicon.heteronyms)[0]
    cue = lexicon.cue_words[0]
    _, slots = transcribe_with_slots(lexicon, f"{cue} {heteronym}.")
    assert slots == [(1, 1)]
    _, slots = transcribe_with_slots(lexicon, f"{cue}. {heteronym}.")
    assert slots == [(1, 0)]


def test_unknown_word_raises(lexicon):
    with pytest.raises(VocabularyError) as exc_info:
        gold_transcribe(lexicon, "zzzqqq.")
    assert exc_info.value.word == "zzzqqq"


def test_word_boundaries_and_liaison(lexicon):
    words = _plain_words(lexicon, 20)
    text = " ".join(words) + "."
    phonemes = gold_transcribe(lexicon, text)

    assert phonemes.count(BOUNDARY) == len(words) - 1
    chunks, current = [], []
    for p in phonemes:
        if p == BOUNDARY:
            chunks.append(current)
            current = []
        else:
            current.append(p)
    chunks.append(current)
    for left_word, right_word, chunk in zip(words, words[1:], chunks):
        left, right = lexicon.entries[left_word], lexicon.entries[right_word]
        linked = left[-1] in LINKING_CONSONANTS and right[0] in VOWELS
        assert chunk == left + ([LIAISON] if linked else [])


def test_liaison_crosses_sentence_boundary(lexicon):
    words = lexicon.words
    left = next(w for w in words if not lexicon.is_heteronym(w) and lexicon.entries[w][-1] in LINKING_CONSONANTS)
    right = next(w for w in words if not lexicon.is_heteronym(w) and lexicon.entries[w][0] in VOWELS)
    one = gold_transcribe(lexicon, f"{left} {right}.")
    two = gold_transcribe(lexicon, f"{left}. {right}.")
    assert one == two
    assert LIAISON in one


def test_gold_transcription_is_pure(lexicon):
    text = " ".join(_plain_words(lexicon, 6)) + "."
    assert gold_transcribe(lexicon, text) == gold_transcribe(lexicon, text)


# ===== 코퍼스 생성 =====

def test_corpus_sizes(corpus):
    assert corpus.sizes() == {"train": 40, "validation": 8, "test_short": 8, "test_long": 8}


def test_sentence_counts_per_split(corpus):
    for name, (low, high) in {"train": (1, 3), "validation": (1, 3), "test_short": (1, 3), "test_long": (4, 5)}.items():
        for example in corpus.split(name):
            assert low <= example.n_sentences <= high
            assert len(split_sentences(example.text)) == example.n_sentences


def test_splits_share_no_base_sentences(corpus):
    train = set().union(*(_sentences_of(e) for e in corpus.train))
    valid = set().union(*(_sentences_of(e) for e in corpus.validation))
    short = set().union(*(_sentences_of(e) for e in corpus.test_short))
    long = set().union(*(_sentences_of(e) for e in corpus.test_long))
    for a, b in itertools.combinations([train, valid, short, long], 2):
        assert not a & b


def test_partition_pool_keeps_every_split_non_empty():
    pool = [f"s{i}" for i in range(10)]
    pools = partition_pool(pool, {"train": 100, "validation": 1, "test_short": 1, "test_long": 1})
    assert [len(p) for p in pools.values()] == [7, 1, 1, 1]
    assert sum(pools.values(), []) == pool
    with pytest.raises(ValueError):
        partition_pool(pool[:3], {"a": 1, "b": 1, "c": 1, "d": 1})


def test_examples_use_the_gold_transducer(lexicon, corpus):
    for example in corpus.train + corpus.test_long:
        phonemes, slots = transcribe_with_slots(lexicon, example.text)
        assert example.phonemes == phonemes
        assert [(s.word_position, s.pronunciation_id) for s in example.heteronym_slots] == slots


def test_corpus_is_deterministic(lexicon):
    a = generate_corpus(lexicon, seed=5, n_train=10, n_valid=3, n_test=3)
    b = generate_corpus(lexicon, seed=5, n_train=10, n_valid=3, n_test=3)
    c = generate_corpus(lexicon, seed=6, n_train=10, n_valid=3, n_test=3)
    assert a == b
    assert a != c


def test_test_splits_carry_heteronyms(lexicon):
    corpus = generate_corpus(lexicon, seed=1, n_train=50, n_valid=10, n_test=60)
    for name in ("test_short", "test_long"):
        examples = corpus.split(name)
        with_slots = sum(1 for e in examples if e.heteronym_slots)
        assert with_slots >= len(examples) // 10


def test_length_limits_skip_long_examples(lexicon):
    limits = ModelConfig(max_src_len=160, max_tgt_len=600)
    corpus = generate_corpus(lexicon, seed=2, n_train=20, n_valid=4, n_test=4, limits=limits)
    for example in corpus.train:
        src, tgt = encode_io(example, limits)
        assert len(src) <= 160 and len(tgt) <= 600


@pytest.mark.parametrize("field", ["n_train", "n_valid", "n_test"])
def test_non_positive_sizes_are_rejected(lexicon, field):
    sizes = {"n_train": 5, "n_valid": 2, "n_test": 2, field: 0}
    with pytest.raises(ValueError):
        generate_corpus(lexicon, seed=0, **sizes)


def test_unknown_split_name(corpus):
    with pytest.raises(KeyError):
        corpus.split("dev")


# ===== 인코딩 =====

def test_encode_io_bytes_mode(lexicon):
    example = make_example(lexicon, [" ".join(_plain_words(lexicon, 3))])
    src, tgt = encode_io(example, ModelConfig())
    assert src == list(example.text.encode("utf-8"))
    assert tgt[-1] == EOS_ID
    assert bytes(t - N_SPECIAL_TOKENS for t in tgt[:-1]).decode("utf-8") == example.phoneme_string
    assert decoder_input(tgt) == [BOS_ID] + tgt[:-1]


def test_encode_io_symbols_mode(lexicon):
    example = make_example(lexicon, [" ".join(_plain_words(lexicon, 4))])
    config = ModelConfig(target_mode="symbols", tgt_vocab_size=target_vocab("symbols").size)
    _, tgt = encode_io(example, config)
    assert len(tgt) == len(example.phonemes) + 1
    assert decode_target(tgt, "symbols") == (example.phonemes, 0)


def test_encode_io_length_errors(lexicon):
    example = make_example(lexicon, [" ".join(_plain_words(lexicon, 5))])
    with pytest.raises(SequenceLengthError):
        encode_io(example, ModelConfig(max_src_len=3))
    with pytest.raises(SequenceLengthError):
        encode_io(example, ModelConfig(max_tgt_len=3))


def test_target_vocab_sizes():
    assert target_vocab("bytes").size == 259
    assert target_vocab("symbols").size == N_SPECIAL_TOKENS + len(PHONEME_INVENTORY) + 2
    with pytest.raises(ValueError):
        target_vocab("chars")


def test_strip_special_stops_at_eos():
    assert strip_special([BOS_ID, 10, PAD_ID, 11, EOS_ID, 12]) == [10, 11]


def test_invalid_utf8_counts_one_failure_per_run():
    ids = [N_SPECIAL_TOKENS + b for b in b"AA "] + [N_SPECIAL_TOKENS + 0xFF, N_SPECIAL_TOKENS + 0xFE]
    ids += [N_SPECIAL_TOKENS + b for b in b" K"]
    phonemes, failures = decode_target(ids + [EOS_ID], "bytes")
    assert phonemes == ["AA", REPLACEMENT, "K"]
    assert failures == 1
