"""Viscous Burgers' equation on a periodic interval: backward Euler in time, Newton per step."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..errors import NumericalError


@dataclass(frozen=True)
class BurgersSpec:
    viscosity: float = 0.1
    dt: float = 0.01
    t_final: float = 1.0
    omega_mean: float = 1.2
    omega_std: float = 1.0
    newton_tol: float = 1e-10
    newton_maxiter: int = 50

    def __post_init__(self):
        if not (self.viscosity > 0 and self.dt > 0):
            raise ValueError("viscosity and dt must be positive")

    @property
    def steps(self):
        return int(round(self.t_final / self.dt))


def initial_condition(x, omega):
    return -np.sin(np.pi * x) * omega


def _periodic_ops(n, h):
    """Centered first and second difference matrices with periodic wrap."""
    e = np.ones(n)
    shift = sp.diags([e[:-1], e[:1]], [1, -(n - 1)], shape=(n, n))   # (S u)_i = u_{i+1}
    back = shift.T                                                   # u_{i-1}
    d1 = (shift - back) / (2.0 * h)
    d2 = (shift + back - 2.0 * sp.identity(n)) / (h * h)
    return d1.tocsr(), d2.tocsr()


def solve_burgers(u0, spec=BurgersSpec()):
    """Integrate from ``u0`` (a FunctionSample on [-1, 1], endpoints identified).

    Returns an array ``[steps + 1, m]`` holding the field at every time level,
    including ``t = 0``; the last column repeats the first.
    """
    grid = u0.grid
    vals = u0.values[:, 0]
    n = grid.m - 1
    h = grid.h
    d1, d2 = _periodic_ops(n, h)
    eye = sp.identity(n, format="csr")
    dt, nu = spec.dt, spec.viscosity
    u = vals[:n].copy()
    out = np.empty((spec.steps + 1, grid.m))
    out[0, :n] = u
    for step in range(1, spec.steps + 1):
        prev = u.copy()
        for it in range(spec.newton_maxiter):
            du = d1 @ u
            res = u - prev + dt * (u * du - nu * (d2 @ u))
            rnorm = np.max(np.abs(res))
            if rnorm < spec.newton_tol:
                break
            jac = eye + dt * (sp.diags(du) + sp.diags(u) @ d1 - nu * d2)
            u = u - spsolve(jac.tocsc(), res)
        else:
            du = d1 @ u
            rnorm = np.max(np.abs(u - prev + dt * (u * du - nu * (d2 @ u))))
            if rnorm >= spec.newton_tol:
                raise NumericalError(
                    f"Newton did not converge at step {step} (residual {rnorm:.3e})"
                )
        if not np.all(np.isfinite(u)):
            raise NumericalError(f"Burgers solution not finite at step {step}")
        out[step, :n] = u
    out[:, n] = out[:, 0]
    return out
