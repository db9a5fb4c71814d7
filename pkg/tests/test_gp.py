import numpy as np
import pytest

from rdolab.errors import NumericalError
from rdolab.models import GridSpec
from rdolab.pdegen.gp import GpKernelSpec, GpSampler, gp_sample_1d, jittered_cholesky, kernel_matrix


def test_exponential_kernel_value():
    k = GpKernelSpec("exponential", 1.0, 1.0)
    assert k(0.2, 0.5) == pytest.approx(np.exp(-0.3), abs=1e-15)
    assert k(0.2, 0.5) == pytest.approx(0.740818, abs=1e-6)


def test_squared_exponential_kernel_value():
    k = GpKernelSpec("squared_exponential", 2.0, 0.2)
    assert k(0.0, 0.2) == pytest.approx(2.0 * np.exp(-0.5), rel=1e-15)


def test_kernel_validation():
    with pytest.raises(ValueError):
        GpKernelSpec("matern")
    with pytest.raises(ValueError):
        GpKernelSpec(variance=0.0)


def test_degenerate_variance_returns_mean():
    spec = GpKernelSpec("exponential", 1e-16, 1.0, mean=0.7)
    s = gp_sample_1d(spec, GridSpec(0, 1, 33), seed=3)
    assert np.abs(s.values - 0.7).max() < 1e-6


def test_seeded_draws_repeat():
    spec = GpKernelSpec()
    g = GridSpec(0, 1, 17)
    np.testing.assert_array_equal(gp_sample_1d(spec, g, 5).values, gp_sample_1d(spec, g, 5).values)


def test_monte_carlo_covariance_and_mean():
    spec = GpKernelSpec("exponential", 1.0, 1.0, mean=0.3)
    x = np.linspace(0, 1, 9)
    n = 5000
    draws = GpSampler(spec, x).draw(np.random.default_rng(11), size=n)
    K = kernel_matrix(spec, x)
    # standard error of the sample covariance of jointly Gaussian variables
    se_cov = np.sqrt((K * K + np.outer(np.diag(K), np.diag(K))) / n)
    assert np.all(np.abs(np.cov(draws, rowvar=False) - K) < 5 * se_cov)
    se_mean = np.sqrt(np.diag(K) / n)
    assert np.all(np.abs(draws.mean(axis=0) - 0.3) < 5 * se_mean)


def test_jitter_escalation_and_failure():
    # rank-one matrix needs jitter; an indefinite one cannot be rescued
    v = np.ones(4)
    L = jittered_cholesky(np.outer(v, v))
    assert np.all(np.isfinite(L))
    with pytest.raises(NumericalError):
        jittered_cholesky(np.diag([1.0, -1.0, 1.0]))
