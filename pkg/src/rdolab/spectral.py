"""Forward-normalized real FFT with adjoints, spectral convolution and the FIO layer.

Coefficient convention (per channel, along the grid axis of length ``m``)::

    c_j = (1/m) * sum_n f_n * exp(-2*pi*i*n*j/m),   j = 0 .. m//2

Complex values travel through the autodiff engine as real tensors whose
last axis holds ``(re, im)``.  The transforms themselves use numpy's
pocketfft (mixed radix with a Bluestein path for large prime factors).
"""
import numpy as np

from .errors import DimensionError, ModeOverflowError
from .nn import Linear, Module, uniform_param
from .tensor import Tensor, _record, activation, as_tensor, concat, matmul, stack, transpose


def n_freq(m):
    return m // 2 + 1


def _to_complex(c):
    return c[..., 0] + 1j * c[..., 1]


def _to_real(z):
    return np.stack([z.real, z.imag], axis=-1)


def rfft_adjoint(g, m):
    """Adjoint of :func:`rfft` applied to interleaved coefficient gradients.

    ``g`` has shape ``[..., m//2+1, d, 2]``; the result has shape ``[..., m, d]``.
    """
    gz = _to_complex(np.asarray(g, dtype=np.float64))
    full = np.zeros(gz.shape[:-2] + (m,) + gz.shape[-1:], dtype=complex)
    full[..., : gz.shape[-2], :] = gz
    # sum_j g_j exp(+2 pi i n j / m), real part, times 1/m
    return np.fft.ifft(full, axis=-2).real


def irfft_adjoint(g, m):
    """Adjoint of :func:`irfft`; maps ``[..., m, d]`` to ``[..., m//2+1, d, 2]``.

    Imaginary parts of the DC (and, for even ``m``, Nyquist) coefficients do not
    influence the signal, so their gradient is zero.
    """
    s = np.fft.rfft(np.asarray(g, dtype=np.float64), axis=-2)
    w = np.full(n_freq(m), 2.0)
    w[0] = 1.0
    if m % 2 == 0:
        w[-1] = 1.0
    out = _to_real(s * w[:, None])
    out[..., 0, :, 1] = 0.0
    if m % 2 == 0:
        out[..., -1, :, 1] = 0.0
    return out


def rfft(x):
    """Real FFT along axis -2 of ``x`` (``[..., m, d]``) with 1/m normalization.

    Returns a real tensor ``[..., m//2+1, d, 2]`` (last axis re/im).
    """
    x = as_tensor(x)
    if x.ndim < 2:
        raise DimensionError(f"rfft expects [..., m, d], got shape {x.shape}")
    m = x.shape[-2]
    if m < 2:
        raise DimensionError(f"rfft needs at least 2 grid points, got m={m}")
    out = _to_real(np.fft.rfft(x.data, axis=-2) / m)
    return _record(out, (x,), lambda g: (rfft_adjoint(g, m),), "rfft")


def irfft(c, m):
    """Inverse of :func:`rfft`: ``[..., m//2+1, d, 2]`` -> ``[..., m, d]``.

    DC and Nyquist imaginary parts are ignored (Hermitian layout).
    """
    c = as_tensor(c)
    if c.ndim < 3 or c.shape[-1] != 2:
        raise DimensionError(f"irfft expects [..., k, d, 2] coefficients, got shape {c.shape}")
    if c.shape[-3] != n_freq(m):
        raise DimensionError(
            f"irfft to length {m} needs {n_freq(m)} coefficients, got {c.shape[-3]}"
        )
    out = np.fft.irfft(_to_complex(c.data), n=m, axis=-2) * m
    return _record(out, (c,), lambda g: (irfft_adjoint(g, m),), "irfft")


class SpectralWeights(Module):
    """Truncated frequency-domain kernel.

    ``weight`` has shape ``[modes, d_out, d_in, 2]``: ``weight[j, :, :, 0] +
    i*weight[j, :, :, 1]`` is the complex matrix applied to mode ``j``.
    """

    def __init__(self, modes, width, rng, width_out=None):
        if modes < 1:
            raise ValueError(f"modes must be positive, got {modes}")
        width_out = width if width_out is None else width_out
        self.modes = modes
        self.width = width
        self.width_out = width_out
        self.weight = uniform_param(rng, (modes, width_out, width, 2), 1.0 / (width * width_out))

    def check(self, m):
        if self.modes > n_freq(m):
            raise ModeOverflowError(self.modes, m)


def spectral_conv(phi, weights):
    """``irfft(R_j c_j for j < modes, 0 otherwise)`` where ``c = rfft(phi)``.

    ``phi`` is ``[m, d]`` or ``[B, m, d]``.
    """
    phi = as_tensor(phi)
    squeeze = phi.ndim == 2
    if squeeze:
        phi = phi.reshape(1, *phi.shape)
    if phi.ndim != 3:
        raise DimensionError(f"spectral_conv expects [m, d] or [B, m, d], got {phi.shape}")
    b, m, d = phi.shape
    if d != weights.width:
        raise DimensionError(f"spectral_conv: weights take width {weights.width}, input {phi.shape}")
    weights.check(m)
    k = weights.modes
    nf = n_freq(m)
    c = rfft(phi)[:, :k]                       # [B, k, d, 2]
    c = transpose(c, (1, 0, 2, 3))             # [k, B, d, 2]
    c_re, c_im = c[..., 0], c[..., 1]          # [k, B, d]
    w = transpose(weights.weight, (0, 2, 1, 3))  # [k, d_in, d_out, 2]
    w_re, w_im = w[..., 0], w[..., 1]
    z_re = matmul(c_re, w_re) - matmul(c_im, w_im)
    z_im = matmul(c_re, w_im) + matmul(c_im, w_re)
    z = transpose(stack([z_re, z_im], axis=-1), (1, 0, 2, 3))  # [B, k, d_out, 2]
    if k < nf:
        z = concat([z, Tensor(np.zeros((b, nf - k, weights.width_out, 2)))], axis=1)
    out = irfft(z, m)
    return out.reshape(m, weights.width_out) if squeeze else out


class FioLayer(Module):
    """``act(phi @ W + b + spectral_conv(phi))``."""

    def __init__(self, width, modes, rng, activation="gelu"):
        self.width = width
        self.activation = activation
        self.weights = SpectralWeights(modes, width, rng)
        self.pointwise = Linear(width, width, rng)

    @property
    def modes(self):
        return self.weights.modes

    def __call__(self, phi):
        return fio_forward(phi, self)


def fio_forward(phi, layer, activation_kind=None):
    kind = layer.activation if activation_kind is None else activation_kind
    return activation(layer.pointwise(as_tensor(phi)) + spectral_conv(phi, layer.weights), kind)
