"""Attention integral operator: a softmax-normalized kernel integral over grid points.

For input rows ``phi_i`` the layer computes::

    z_i = sum_j softmax_j(q_i . k_j) v_j

with pointwise ``q``, ``k``, ``v`` networks.  The quadrature weight of the
continuous integral cancels between numerator and denominator on a uniform
grid, so no ``h`` factor appears.
"""
from .errors import DimensionError
from .nn import FNN, Module
from .tensor import as_tensor, matmul, softmax, swapaxes


class AioLayer(Module):
    """q/k map ``width -> feature``; v maps ``width -> width`` so the layer preserves width."""

    def __init__(self, width, rng, feature=None, depth=1, activation="gelu"):
        feature = width if feature is None else feature
        self.width = width
        self.feature = feature
        hidden = [width] * (depth - 1)
        self.q_net = FNN([width, *hidden, feature], rng, activation, final_activation=True)
        self.k_net = FNN([width, *hidden, feature], rng, activation, final_activation=True)
        self.v_net = FNN([width, *hidden, width], rng, activation, final_activation=True)

    def __call__(self, phi):
        return aio_forward(phi, self)


def attention_weights(q, k):
    """Row-stochastic ``[.., m, m]`` matrix ``softmax_j(q_i . k_j)``."""
    return softmax(matmul(q, swapaxes(k, -1, -2)), axis=-1)


def aio_forward(phi, layer):
    phi = as_tensor(phi)
    if phi.ndim not in (2, 3) or phi.shape[-1] != layer.width:
        raise DimensionError(f"AIO layer of width {layer.width} got input shape {phi.shape}")
    q = layer.q_net(phi)
    k = layer.k_net(phi)
    v = layer.v_net(phi)
    return matmul(attention_weights(q, k), v)
