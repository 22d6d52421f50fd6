"""
텐서 코어 테스트: 원시 연산 기울기 검증과 그래프 기록 규칙
"""

import numpy as np
import pytest

from tensor_core import (
    ContractError,
    DimensionError,
    NonFiniteError,
    Tensor,
    backward,
    current_graph,
    grad_check,
    no_grad,
    ops,
    reset_graph,
)


TOLERANCE = 1e-4
SEEDS = range(100)


def _param(rng, *shape, away_from_zero=False):
    data = rng.normal(size=shape)
    if away_from_zero:
        data = data + np.sign(data) * 0.1
    return Tensor(data, requires_grad=True, dtype="float64")


def _weighted_sum(out: Tensor, rng) -> Tensor:
    # 출력 전체에 고정 가중치를 곱해 합친 스칼라
    weights = Tensor(rng.normal(size=out.shape))
    return ops.sum(ops.mul(out, weights))


def _check(build, inputs, rng):
    weights_rng_state = rng.bit_generator.state

    def f(*tensors):
        local = np.random.default_rng()
        local.bit_generator.state = weights_rng_state
        return _weighted_sum(build(*tensors), local)

    report = grad_check(f, inputs, tolerance=TOLERANCE)
    assert report.passed, report.model_dump()


PRIMITIVES = {
    "add_broadcast": (lambda rng: [_param(rng, 3, 4), _param(rng, 4)], lambda a, b: ops.add(a, b)),
    "sub": (lambda rng: [_param(rng, 2, 3), _param(rng, 2, 3)], lambda a, b: ops.sub(a, b)),
    "mul": (lambda rng: [_param(rng, 2, 3), _param(rng, 2, 3)], lambda a, b: ops.mul(a, b)),
    "scale": (lambda rng: [_param(rng, 5)], lambda a: ops.scale(a, -1.7)),
    "gelu": (lambda rng: [_param(rng, 6)], ops.gelu),
    "relu": (lambda rng: [_param(rng, 6, away_from_zero=True)], ops.relu),
    "reshape": (lambda rng: [_param(rng, 2, 6)], lambda a: ops.reshape(a, (3, 4))),
    "transpose": (lambda rng: [_param(rng, 2, 3, 4)], lambda a: ops.transpose(a, (2, 0, 1))),
    "matmul": (lambda rng: [_param(rng, 3, 4), _param(rng, 4, 2)], ops.matmul),
    "matmul_batched": (lambda rng: [_param(rng, 2, 3, 4), _param(rng, 2, 4, 2)], ops.matmul),
    "matmul_shared_weight": (lambda rng: [_param(rng, 2, 3, 4), _param(rng, 4, 2)], ops.matmul),
    "softmax": (lambda rng: [_param(rng, 3, 5)], ops.softmax),
    "log_softmax": (lambda rng: [_param(rng, 3, 5)], ops.log_softmax),
    "layer_norm": (
        lambda rng: [_param(rng, 2, 3, 4), _param(rng, 4), _param(rng, 4)],
        ops.layer_norm,
    ),
    "embedding": (lambda rng: [_param(rng, 5, 3)], lambda w: ops.embedding(w, [[0, 2, 2], [4, 1, 0]])),
    "dropout": (
        lambda rng: [_param(rng, 4, 4)],
        lambda a: ops.dropout(a, 0.3, np.random.default_rng(123)),
    ),
}


@pytest.mark.parametrize("name", sorted(PRIMITIVES))
def test_primitive_gradients_match_finite_differences(name):
    make_inputs, build = PRIMITIVES[name]
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        _check(build, make_inputs(rng), rng)


def test_cross_entropy_gradient_with_mask():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        logits = _param(rng, 2, 4, 6)
        targets = rng.integers(6, size=(2, 4))
        mask = np.array([[True, True, True, False], [True, False, False, False]])
        report = grad_check(
            lambda x: ops.cross_entropy(x, targets, mask, reduction="mean"), [logits], tolerance=TOLERANCE
        )
        assert report.passed, report.model_dump()


def test_cross_entropy_ignores_masked_targets():
    logits = Tensor(np.zeros((1, 3, 4)))
    # 마스크된 위치의 정답은 범위를 벗어나도 무시됨
    targets = np.array([[1, 2, 99]])
    mask = np.array([[True, True, False]])
    loss = ops.cross_entropy(logits, targets, mask, reduction="mean")
    assert loss.item() == pytest.approx(np.log(4.0))


def test_cross_entropy_without_valid_positions_raises():
    with pytest.raises(ContractError):
        ops.cross_entropy(Tensor(np.zeros((1, 2, 3))), np.zeros((1, 2)), np.zeros((1, 2), dtype=bool))


def test_backward_requires_scalar_loss():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ContractError):
        backward(ops.scale(x, 2.0))


def test_gradients_accumulate_until_zeroed():
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    for _ in range(2):
        backward(ops.sum(ops.mul(x, x)))
    np.testing.assert_array_equal(x.grad, 2 * 2 * x.data)
    x.zero_grad()
    assert x.grad is None


def test_no_grad_records_nothing():
    reset_graph()
    x = Tensor(np.ones((2, 2)), requires_grad=True)
    with no_grad():
        out = ops.sum(ops.matmul(x, x))
    assert len(current_graph()) == 0
    assert not out.requires_grad


def test_backward_clears_graph():
    reset_graph()
    x = Tensor(np.ones(2), requires_grad=True)
    loss = ops.sum(ops.gelu(x))
    assert len(current_graph()) == 2
    backward(loss)
    assert len(current_graph()) == 0


def test_shared_input_receives_summed_gradient():
    x = Tensor(np.array([3.0]), requires_grad=True)
    y = ops.add(ops.scale(x, 2.0), ops.scale(x, 5.0))
    backward(ops.sum(y))
    np.testing.assert_array_equal(x.grad, [7.0])


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))


def test_add_rejects_incompatible_shapes():
    with pytest.raises(DimensionError):
        ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones(4)))


def test_non_finite_forward_raises():
    with pytest.raises(NonFiniteError):
        ops.add(Tensor(np.array([np.inf])), Tensor(np.array([-np.inf])))


def test_embedding_rejects_out_of_range_ids():
    with pytest.raises(IndexError):
        ops.embedding(Tensor(np.ones((3, 2))), [0, 3])


def test_dropout_without_rng_is_identity():
    x = Tensor(np.ones(4), requires_grad=True)
    assert ops.dropout(x, 0.5, None) is x
    assert ops.dropout(x, 0.0, np.random.default_rng(0)) is x


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(0)
    out = ops.softmax(Tensor(rng.normal(size=(4, 7)) * 30))
    np.testing.assert_allclose(out.data.sum(axis=-1), 1.0, rtol=0, atol=1e-12)


def test_float32_dtype_is_preserved():
    x = Tensor(np.ones((2, 2)), dtype="float32", requires_grad=True)
    assert ops.gelu(ops.matmul(x, x)).dtype == np.float32
    with pytest.raises(ContractError):
        Tensor(np.ones(2), dtype="float16")


def test_softmax_cross_entropy_uniform_logits():
    loss = ops.softmax_cross_entropy(Tensor(np.zeros(4), dtype="float64"), 2)
    assert loss.item() == pytest.approx(np.log(4.0), abs=1e-12)


def test_softmax_cross_entropy_saturated_logit():
    logits = Tensor(np.array([1e4, 0.0, 0.0]), dtype="float64")
    assert ops.softmax_cross_entropy(logits, 0).item() == pytest.approx(0.0, abs=1e-12)
    assert ops.softmax_cross_entropy(logits, 1).item() == pytest.approx(1e4)


def test_softmax_cross_entropy_gradient():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        target = int(rng.integers(7))
        report = grad_check(lambda t: ops.softmax_cross_entropy(t, target), [_param(rng, 7)], tolerance=1e-5)
        assert report.passed, report.model_dump()


def test_matmul_matches_triple_loop():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(4, 5)), rng.normal(size=(5, 3))
        expected = np.zeros((4, 3))
        for i in range(4):
            for j in range(3):
                for k in range(5):
                    expected[i, j] += a[i, k] * b[k, j]
        out = ops.matmul(Tensor(a, dtype="float64"), Tensor(b, dtype="float64")).data
        np.testing.assert_allclose(out, expected, rtol=0, atol=1e-12)
    a = np.random.default_rng(0).normal(size=(3, 3))
    identity = ops.matmul(Tensor(a, dtype="float64"), Tensor(np.eye(3), dtype="float64")).data
    np.testing.assert_array_equal(identity, a)


def test_layer_norm_of_constant_row_is_zero():
    x = Tensor(np.array([[3.7] * 5, [-2.0] * 5]), dtype="float64")
    out = ops.layer_norm(x, Tensor(np.ones(5), dtype="float64"), Tensor(np.zeros(5), dtype="float64"))
    np.testing.assert_allclose(out.data, np.zeros((2, 5)), rtol=0, atol=1e-9)


def test_no_grad_forward_is_bitwise_identical():
    rng = np.random.default_rng(3)
    x, w = _param(rng, 3, 4), _param(rng, 4, 4)
    gain, bias = _param(rng, 4), _param(rng, 4)

    def forward():
        h = ops.layer_norm(ops.gelu(ops.matmul(x, w)), gain, bias)
        return ops.softmax(h).data

    reset_graph()
    recorded = forward()
    reset_graph()
    with no_grad():
        plain = forward()
    np.testing.assert_array_equal(recorded, plain)
