"""Central finite-difference verification of backprop gradients."""
import numpy as np

from .tensor import backward


def numerical_grad(f, params, h=1e-5):
    """Central differences of scalar ``f()`` w.r.t. every entry of ``params``."""
    out = []
    for p in params:
        g = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = float(f().data)
            flat[i] = orig - h
            fm = float(f().data)
            flat[i] = orig
            gflat[i] = (fp - fm) / (2.0 * h)
        out.append(g)
    return out


def finite_diff_check(f, params, h=1e-5):
    """Worst relative error between backprop and central-difference gradients.

    ``f`` is a zero-argument callable returning a scalar Tensor that depends on
    ``params``.  Relative error of each parameter is
    ``|g_bp - g_fd|_max / max(|g_bp|_max, |g_fd|_max, floor)``.

    Rounding noise in a central difference is about ``eps * |f| / h``.
    ``floor = 1e5 * eps * max(1, |f|) / h`` keeps that noise under 1e-5 of the
    reported error; gradients smaller than the floor are compared in absolute
    terms against it.
    """
    for p in params:
        p.grad = None
    value = f()
    floor = 1e5 * np.finfo(np.float64).eps * max(1.0, abs(float(value.data))) / h
    backward(value, params)
    analytic = [p.grad.copy() for p in params]
    numeric = numerical_grad(f, params, h)
    worst = 0.0
    for ga, gn in zip(analytic, numeric):
        scale = max(np.abs(ga).max(initial=0.0), np.abs(gn).max(initial=0.0))
        diff = float(np.abs(ga - gn).max())
        if diff == 0.0:
            continue
        worst = max(worst, diff / max(scale, floor))
    return worst
