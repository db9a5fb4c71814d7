"""Gaussian-process sampling on 1-D point sets via a jittered Cholesky factor."""
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from ..models import FunctionSample

KERNELS = ("exponential", "squared_exponential")


@dataclass(frozen=True)
class GpKernelSpec:
    """``exponential``: s2*exp(-|x-x'|/l); ``squared_exponential``: s2*exp(-(x-x')^2/(2 l^2))."""

    kind: str = "exponential"
    variance: float = 1.0
    length: float = 1.0
    mean: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if not (self.variance > 0 and self.length > 0):
            raise ValueError("kernel variance and length scale must be positive")

    def __call__(self, x, y):
        d = np.subtract.outer(np.asarray(x, float), np.asarray(y, float))
        if self.kind == "exponential":
            return self.variance * np.exp(-np.abs(d) / self.length)
        return self.variance * np.exp(-0.5 * d * d / (self.length * self.length))


def kernel_matrix(spec, x):
    return spec(x, x)


def jittered_cholesky(cov, jitter=1e-10, retries=3):
    """Lower Cholesky factor of ``cov + j*s*I`` with ``s`` the largest diagonal entry.

    ``j`` starts at ``jitter`` and grows by 10x up to ``retries`` times.
    """
    scale = float(np.max(np.diag(cov)))
    eye = np.eye(cov.shape[0])
    j = jitter
    for _ in range(retries + 1):
        try:
            return np.linalg.cholesky(cov + j * scale * eye)
        except np.linalg.LinAlgError:
            j *= 10.0
    raise NumericalError(f"Cholesky failed after jitter escalation to {j / 10:.1e}")


class GpSampler:
    """Factor the kernel matrix once, then draw ``mean + L z`` repeatedly."""

    def __init__(self, spec, x):
        self.spec = spec
        self.x = np.asarray(x, dtype=np.float64)
        self.cov = kernel_matrix(spec, self.x)
        self.chol = jittered_cholesky(self.cov)

    def draw(self, rng, size=None):
        shape = (self.x.size,) if size is None else (size, self.x.size)
        z = rng.standard_normal(shape)
        return self.spec.mean + z @ self.chol.T


def gp_sample_1d(spec, grid, seed):
    """One GP draw on the nodes of ``grid`` as a :class:`FunctionSample`.

    ``seed`` is an int or a numpy Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return FunctionSample(grid, GpSampler(spec, grid.nodes).draw(rng))
