import numpy as np
import pytest

from rdolab.errors import DimensionError, GraphError, NumericalError
from rdolab.gradcheck import finite_diff_check
from rdolab.tensor import (
    Tensor,
    activation,
    backward,
    broadcast_to,
    concat,
    exp,
    gelu,
    log,
    matmul,
    mean,
    no_grad,
    relu,
    softmax,
    sqrt,
    stack,
    tanh,
    tsum,
)


def param(rng, *shape):
    return Tensor(rng.standard_normal(shape), requires_grad=True)


def test_matmul_identity():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(matmul(Tensor(np.eye(2)), a).data, a.data)


def test_matmul_hand_arithmetic():
    out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
    np.testing.assert_array_equal(out.data, [[17.0], [39.0]])


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


def test_activations():
    x = Tensor([-1.0, 0.0, 2.0])
    np.testing.assert_array_equal(activation(x, "identity").data, x.data)
    np.testing.assert_array_equal(relu(x).data, [0.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        activation(x, "swish")


def test_gelu_tanh_formula():
    x = np.linspace(-4, 4, 17)
    ref = 0.5 * x * (1 + np.tanh(np.sqrt(2 / np.pi) * (x + 0.044715 * x**3)))
    np.testing.assert_allclose(gelu(Tensor(x)).data, ref, rtol=0, atol=1e-15)


def test_tanh_gradient_at_zero():
    x = Tensor(np.zeros(()), requires_grad=True)
    backward(tanh(x))
    assert x.grad == pytest.approx(1.0, abs=1e-12)
    h = 1e-5
    fd = (np.tanh(h) - np.tanh(-h)) / (2 * h)
    assert abs(x.grad - fd) < 1e-8


def test_square_gradient():
    t = Tensor(3.0, requires_grad=True)
    backward(t * t)
    assert t.grad == 6.0


def test_sum_of_linear_map_gives_column_sums():
    A = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    x = Tensor(np.ones((3, 1)), requires_grad=True)
    backward(tsum(matmul(Tensor(A), x)))
    np.testing.assert_array_equal(x.grad[:, 0], A.sum(axis=0))


def test_composite_matches_finite_differences(rng):
    a, b = param(rng, 3, 3), param(rng, 3, 3)
    err = finite_diff_check(lambda: tsum(tanh(matmul(a, b)) * tanh(matmul(a, b))), [a, b])
    assert err < 1e-5


@pytest.mark.parametrize("op", [
    lambda x, y: tsum(x * y + x / (y * y + 1.0)),
    lambda x, y: tsum(exp(x) - log(y * y + 1.0)),
    lambda x, y: tsum(sqrt(x * x + 1.0) * gelu(y)),
    lambda x, y: tsum(softmax(x, axis=-1) * y),
    lambda x, y: tsum(softmax(x, axis=0) * y),
    lambda x, y: mean(relu(x) * tanh(y)),
    lambda x, y: tsum(concat([x, y], axis=0) ** 3),
    lambda x, y: tsum(stack([x, y], axis=1) * stack([y, x], axis=1)),
    lambda x, y: tsum(x[1:, ::2] * y[:-1, ::2]),
    lambda x, y: tsum(x.transpose() @ y),
    lambda x, y: tsum(x.reshape(-1) * y.reshape(-1)),
    lambda x, y: tsum(broadcast_to(x[:1], (4, 3)) * y),
    lambda x, y: tsum(x.sum(axis=0, keepdims=True) * y),
    lambda x, y: tsum((x - y) ** 2) / 3.0 - tsum(-x),
])
def test_ops_match_finite_differences(rng, op):
    x, y = param(rng, 4, 3), param(rng, 4, 3)
    assert finite_diff_check(lambda: op(x, y), [x, y]) < 1e-6


def test_batched_matmul_broadcast_gradient(rng):
    a, b = param(rng, 2, 3, 4), param(rng, 4, 5)
    assert finite_diff_check(lambda: tsum(tanh(a @ b)), [a, b]) < 1e-6


def test_fancy_index_gradient_accumulates(rng):
    x = param(rng, 5)
    idx = np.array([0, 2, 2, 4])
    backward(tsum(x[idx]))
    np.testing.assert_array_equal(x.grad, [1, 0, 2, 0, 1])


def test_backward_is_linear_in_the_loss(rng):
    x, w = param(rng, 3, 4), param(rng, 4, 2)

    def grads(fn):
        x.grad = w.grad = None
        backward(fn(), [x, w])
        return x.grad.copy(), w.grad.copy()

    l1 = lambda: tsum(tanh(x @ w))
    l2 = lambda: tsum((x @ w) ** 2)
    alpha, beta = 0.7, -1.3
    g1, g2 = grads(l1), grads(l2)
    gc = grads(lambda: l1() * alpha + l2() * beta)
    for a, b, c in zip(g1, g2, gc):
        np.testing.assert_allclose(c, alpha * a + beta * b, rtol=1e-12, atol=1e-12)


def test_unreached_parameter_gets_zero_grad(rng):
    x, unused = param(rng, 3), param(rng, 2)
    backward(tsum(x * x), [x, unused])
    np.testing.assert_array_equal(unused.grad, np.zeros(2))


def test_non_scalar_loss_rejected(rng):
    with pytest.raises(GraphError, match="scalar"):
        backward(param(rng, 3) * 2.0)


def test_cycle_detected():
    a = Tensor(1.0, requires_grad=True)
    b = a * 2.0
    c = b * 3.0
    b._parents = (c,)
    with pytest.raises(GraphError):
        backward(c)


def test_gradients_accumulate_across_backward_calls():
    t = Tensor(2.0, requires_grad=True)
    backward(t * t)
    backward(t * t)
    assert t.grad == 8.0


def test_no_grad_records_nothing(rng):
    x = param(rng, 3)
    with no_grad():
        y = tanh(x) * 2.0
    assert not y.requires_grad and y.is_leaf


def test_non_finite_loss_rejected():
    t = Tensor(-1.0, requires_grad=True)
    with np.errstate(invalid="ignore"):
        loss = sqrt(t)
    with pytest.raises(NumericalError):
        backward(loss)
