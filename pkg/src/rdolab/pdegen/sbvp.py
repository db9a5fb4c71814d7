"""1-D reaction-diffusion boundary value problem ``-(a u')' + c u = f`` on a uniform grid."""
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError
from ..models import FunctionSample


@dataclass(frozen=True)
class SbvpSpec:
    c: float = 15.0
    f: float = 10.0
    u_left: float = 1.0
    u_right: float = 0.0
    log_field: bool = True


def thomas_solve(lower, diag, upper, rhs):
    """Tridiagonal solve; ``lower[0]`` and ``upper[-1]`` are ignored.

    Raises :class:`NumericalError` on a zero pivot.
    """
    n = diag.size
    cp = np.empty(n)
    dp = np.empty(n)
    piv = diag[0]
    if piv == 0.0:
        raise NumericalError("singular tridiagonal system (zero pivot at row 0)")
    cp[0] = upper[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * cp[i - 1]
        if piv == 0.0:
            raise NumericalError(f"singular tridiagonal system (zero pivot at row {i})")
        cp[i] = upper[i] / piv if i < n - 1 else 0.0
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_sbvp(a, spec=SbvpSpec()):
    """Conservative second-order finite differences with midpoint-averaged ``a``.

    ``a`` is the (already positive) coefficient sampled on its grid; Dirichlet
    rows are pinned to the boundary values.
    """
    values = a.values[:, 0]
    if np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise NumericalError("SBVP coefficient must be finite and strictly positive")
    grid = a.grid
    m, h = grid.m, grid.h
    ahalf = 0.5 * (values[1:] + values[:-1])     # a_{i+1/2}, i = 0..m-2
    inv = 1.0 / (h * h)
    lower = np.zeros(m)
    diag = np.ones(m)
    upper = np.zeros(m)
    rhs = np.empty(m)
    lower[1:-1] = -ahalf[:-1] * inv
    upper[1:-1] = -ahalf[1:] * inv
    diag[1:-1] = (ahalf[:-1] + ahalf[1:]) * inv + spec.c
    rhs[1:-1] = spec.f
    rhs[0] = spec.u_left
    rhs[-1] = spec.u_right
    u = thomas_solve(lower, diag, upper, rhs)
    if not np.all(np.isfinite(u)):
        raise NumericalError("SBVP solution is not finite")
    return FunctionSample(grid, u)
