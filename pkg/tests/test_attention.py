import numpy as np
import pytest

from oracles import naive_attention
from rdolab.attention import AioLayer, aio_forward, attention_weights
from rdolab.gradcheck import finite_diff_check
from rdolab.tensor import Tensor, no_grad, tsum


def qkv(layer, phi):
    with no_grad():
        return (layer.q_net(Tensor(phi)).data, layer.k_net(Tensor(phi)).data,
                layer.v_net(Tensor(phi)).data)


def test_single_position_returns_v(rng):
    layer = AioLayer(3, rng)
    phi = rng.standard_normal((1, 3))
    np.testing.assert_array_equal(aio_forward(phi, layer).data, qkv(layer, phi)[2])


def test_equal_logits_average_v(rng):
    layer = AioLayer(3, rng, activation="identity")
    last = layer.q_net.layers[-1]
    last.weight.data[:] = 0
    last.bias.data[:] = 0
    phi = rng.standard_normal((6, 3))
    v = qkv(layer, phi)[2]
    out = aio_forward(phi, layer).data
    np.testing.assert_allclose(out, np.broadcast_to(v.mean(axis=0), out.shape), atol=1e-14)


def test_matches_double_loop(rng):
    layer = AioLayer(2, rng, feature=3)
    phi = rng.standard_normal((4, 2))
    q, k, v = qkv(layer, phi)
    assert np.abs(aio_forward(phi, layer).data - naive_attention(q, k, v)).max() < 1e-12


def test_weights_are_row_stochastic(rng):
    w = attention_weights(Tensor(rng.standard_normal((7, 3)) * 10),
                          Tensor(rng.standard_normal((7, 3)) * 10)).data
    assert np.all(w >= 0)
    assert np.abs(w.sum(axis=-1) - 1).max() < 1e-12


def test_large_logits_stay_finite():
    q = Tensor(np.full((3, 2), 300.0))
    w = attention_weights(q, q).data
    assert np.all(np.isfinite(w))


def test_permutation_equivariance(rng):
    layer = AioLayer(3, rng)
    phi = rng.standard_normal((9, 3))
    perm = rng.permutation(9)
    out = aio_forward(phi, layer).data
    np.testing.assert_allclose(aio_forward(phi[perm], layer).data, out[perm], atol=1e-13)


def test_convex_hull_bound(rng):
    layer = AioLayer(4, rng)
    phi = rng.standard_normal((12, 4))
    v = qkv(layer, phi)[2]
    out = aio_forward(phi, layer).data
    assert np.all(out >= v.min(axis=0) - 1e-12)
    assert np.all(out <= v.max(axis=0) + 1e-12)


def test_width_preserved_and_batched(rng):
    layer = AioLayer(5, rng, feature=2, depth=2)
    phi = rng.standard_normal((3, 7, 5))
    out = aio_forward(phi, layer).data
    assert out.shape == (3, 7, 5)
    np.testing.assert_allclose(out[1], aio_forward(phi[1], layer).data, atol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_gradient(seed):
    rng = np.random.default_rng(seed)
    layer = AioLayer(2, rng)
    phi = Tensor(rng.standard_normal((4, 2)), requires_grad=True)
    target = rng.standard_normal((4, 2))
    err = finite_diff_check(lambda: tsum((aio_forward(phi, layer) - target) ** 2),
                            [phi] + layer.parameters())
    assert err < 1e-4
