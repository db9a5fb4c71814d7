"""Adam with bias correction, plus the step-decay schedule used in training."""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError


@dataclass
class AdamState:
    """Per-parameter first/second moments and the shared step counter."""

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 1e-3

    @classmethod
    def for_params(cls, params, **kwargs):
        return cls(
            m=[np.zeros_like(p.data) for p in params],
            v=[np.zeros_like(p.data) for p in params],
            **kwargs,
        )


def adam_step(state, params, grads, lr=None):
    """Apply one in-place Adam update to ``params`` (Tensors) from ``grads`` (arrays).

    ``None`` gradients are treated as zero.
    """
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise DimensionError(
            f"adam_step: {len(params)} params, {len(grads)} grads, {len(state.m)} moment slots"
        )
    lr = state.lr if lr is None else lr
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for i, (p, g) in enumerate(zip(params, grads)):
        if g is None:
            g = np.zeros_like(p.data)
        if g.shape != p.data.shape or state.m[i].shape != p.data.shape:
            raise DimensionError(
                f"adam_step: parameter {p.name or i} has shape {p.data.shape}, "
                f"grad {g.shape}, moment {state.m[i].shape}"
            )
        m = state.m[i]
        v = state.v[i]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)


class Adam:
    """Convenience wrapper holding the parameter list and an :class:`AdamState`."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.params = list(params)
        self.state = AdamState.for_params(
            self.params, beta1=betas[0], beta2=betas[1], eps=eps, lr=lr
        )

    @property
    def lr(self):
        return self.state.lr

    @lr.setter
    def lr(self, value):
        self.state.lr = float(value)

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        adam_step(self.state, self.params, [p.grad for p in self.params])


def step_decay_lr(epoch, base_lr=1e-3, factor=0.5, every=100):
    """Learning rate for 0-based ``epoch``: ``base_lr * factor ** (epoch // every)``."""
    return base_lr * factor ** (epoch // every)
