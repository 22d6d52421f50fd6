"""
인코더-디코더 모델 테스트
"""

import numpy as np
import pytest

from g2p_model import (
    BOS_ID,
    SRC_PAD_ID,
    ConfigError,
    ModelConfig,
    SequenceLengthError,
    init_model,
    transformer,
    validate_model_config,
)
from tensor_core import ContractError, grad_check, no_grad, ops


def _logits(params, src, dec):
    with no_grad():
        return transformer.forward(params, src, dec).data


def test_forward_shapes(tiny_params, tiny_config):
    src = np.array([[10, 20, 30, SRC_PAD_ID], [40, 50, 60, 70]])
    dec = np.array([[BOS_ID, 5, 6], [BOS_ID, 7, 8]])
    logits = _logits(tiny_params, src, dec)
    assert logits.shape == (2, 3, tiny_config.tgt_vocab_size)
    assert logits.dtype == np.float64


def test_decoder_is_causal(tiny_params):
    rng = np.random.default_rng(0)
    src = rng.integers(0, 256, size=12)
    dec = np.concatenate([[BOS_ID], rng.integers(3, 200, size=9)])
    base = _logits(tiny_params, src, dec)
    for j in range(1, len(dec)):
        changed = dec.copy()
        changed[j] = 3 + (changed[j] + 17) % 200
        other = _logits(tiny_params, src, changed)
        np.testing.assert_array_equal(base[0, :j], other[0, :j])
        assert not np.array_equal(base[0, j:], other[0, j:])


def test_source_padding_does_not_change_logits(tiny_params):
    src = [72, 101, 108, 108, 111]
    dec = [BOS_ID, 4, 5, 6]
    plain = _logits(tiny_params, src, dec)
    padded = _logits(tiny_params, src + [SRC_PAD_ID] * 7, dec)
    np.testing.assert_allclose(plain, padded, rtol=0, atol=1e-12)


def test_swapping_source_bytes_changes_memory_and_logits(tiny_params):
    src = [72, 101, 108, 112, 111]
    swapped = [101, 72, 108, 112, 111]
    dec = [BOS_ID, 4, 5, 6]
    with no_grad():
        memory = transformer.encode(tiny_params, src).memory.data
        other = transformer.encode(tiny_params, swapped).memory.data
    assert not np.allclose(memory, other)
    assert not np.allclose(_logits(tiny_params, src, dec), _logits(tiny_params, swapped, dec))


def test_batched_rows_match_single_examples(tiny_params):
    sources = [[65, 66, 67], [68, 69, 70, 71, 72]]
    batch_src = np.full((2, 5), SRC_PAD_ID)
    for row, s in enumerate(sources):
        batch_src[row, : len(s)] = s
    dec = np.array([[BOS_ID, 9, 10], [BOS_ID, 11, 12]])
    batched = _logits(tiny_params, batch_src, dec)
    for row, s in enumerate(sources):
        np.testing.assert_allclose(batched[row], _logits(tiny_params, s, dec[row])[0], rtol=0, atol=1e-12)


def _closed_form_count(c: ModelConfig) -> int:
    d, f, v = c.d_model, c.d_ffn, c.tgt_vocab_size
    attention = 4 * (d * d + d)
    ffn = d * f + f + f * d + d
    encoder_layer = 2 * (2 * d) + attention + ffn
    decoder_layer = 3 * (2 * d) + 2 * attention + ffn
    return (
        c.src_vocab_size * d
        + v * d
        + c.n_enc_layers * encoder_layer
        + 2 * d
        + c.n_dec_layers * decoder_layer
        + 2 * d
        + d * v
        + v
    )


@pytest.mark.parametrize(
    "overrides",
    [{}, {"d_model": 32, "n_heads": 4, "n_enc_layers": 2, "n_dec_layers": 3, "d_ffn": 48}, {"tgt_vocab_size": 44}],
)
def test_parameter_count_closed_form(tiny_config, overrides):
    config = tiny_config.model_copy(update=overrides)
    assert init_model(config, seed=0).num_parameters() == _closed_form_count(config)


def test_default_desk_model_parameter_count():
    config = ModelConfig()
    assert init_model(config, seed=0).num_parameters() == _closed_form_count(config)


def test_init_is_deterministic(tiny_config):
    a, b, c = init_model(tiny_config, 3), init_model(tiny_config, 3), init_model(tiny_config, 4)
    for name in a:
        np.testing.assert_array_equal(a[name].data, b[name].data)
    assert any(not np.array_equal(a[name].data, c[name].data) for name in a)


def test_initial_values(tiny_params):
    assert np.all(tiny_params["enc.0.ln1.g"].data == 1.0)
    assert np.all(tiny_params["out.b"].data == 0.0)
    assert tiny_params["src_embed"].data.std() == pytest.approx(0.02, rel=0.1)


def test_full_model_gradient_check(tiny_config):
    params = init_model(tiny_config, seed=11)
    rng = np.random.default_rng(11)
    src = rng.integers(0, 256, size=(2, 6))
    src[1, 4:] = SRC_PAD_ID
    labels = rng.integers(3, tiny_config.tgt_vocab_size, size=(2, 5))
    dec = np.concatenate([np.full((2, 1), BOS_ID), labels[:, :-1]], axis=1)
    mask = np.ones((2, 5), dtype=bool)
    mask[1, 3:] = False

    def loss(*_):
        logits = transformer.forward(params, src, dec)
        return ops.cross_entropy(logits, labels, mask, reduction="mean")

    report = grad_check(loss, params.parameters(), tolerance=1e-3, max_elements=6, rng=rng)
    assert report.passed, report.max_relative_error


def test_next_token_distribution_is_normalized(tiny_params):
    enc = transformer.encode(tiny_params, [1, 2, 3])
    probs = transformer.next_token_distribution(tiny_params, enc, [BOS_ID, 7])
    assert probs.shape == (tiny_params.config.tgt_vocab_size,)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    log_probs = transformer.next_token_log_probs(tiny_params, enc, [BOS_ID, 7])
    np.testing.assert_allclose(np.exp(log_probs), probs, rtol=1e-10)


def test_decoder_requires_bos(tiny_params):
    enc = transformer.encode(tiny_params, [1, 2, 3])
    with pytest.raises(ContractError):
        transformer.decoder_forward(tiny_params, enc, [5, 6])


def test_sequence_length_limits(tiny_config):
    config = tiny_config.model_copy(update={"max_src_len": 4, "max_tgt_len": 3})
    params = init_model(config, seed=0)
    with pytest.raises(SequenceLengthError):
        transformer.encode(params, [1, 2, 3, 4, 5])
    enc = transformer.encode(params, [1, 2])
    with pytest.raises(SequenceLengthError):
        transformer.decoder_forward(params, enc, [BOS_ID, 4, 5, 6])


def test_invalid_config_is_rejected():
    with pytest.raises(ConfigError):
        validate_model_config({"d_model": 30, "n_heads": 4})
    with pytest.raises(ConfigError):
        validate_model_config({"dropout_rate": 1.5})


def test_dropout_depends_only_on_rng(tiny_config):
    params = init_model(tiny_config.model_copy(update={"dropout_rate": 0.2}), seed=0)
    src, dec = [5, 6, 7], [BOS_ID, 8]
    with no_grad():
        a = transformer.forward(params, src, dec, np.random.default_rng(1)).data
        b = transformer.forward(params, src, dec, np.random.default_rng(1)).data
        c = transformer.forward(params, src, dec, np.random.default_rng(2)).data
        plain = transformer.forward(params, src, dec).data
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, plain)
