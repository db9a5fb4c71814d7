"""Parameter containers: a tiny Module base, affine layers and pointwise FNNs."""
import numpy as np

from .errors import DimensionError
from .tensor import Tensor, activation, matmul


class Module:
    """Attribute-walking parameter registry.

    Parameters are found by scanning instance attributes in definition order:
    trainable Tensors, child Modules and lists of Modules.
    """

    def named_parameters(self, prefix=""):
        for key, val in vars(self).items():
            name = f"{prefix}{key}"
            if isinstance(val, Tensor):
                if val.requires_grad:
                    yield name, val
            elif isinstance(val, Module):
                yield from val.named_parameters(name + ".")
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_dict(self):
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        extra = set(state) - set(own)
        if missing or extra:
            raise KeyError(f"state mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, p in own.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(f"{name}: shape {arr.shape} != {p.data.shape}")
            p.data[...] = arr

    def num_parameters(self):
        return sum(p.size for p in self.parameters())


def uniform_param(rng, shape, scale, name=None):
    return Tensor(rng.uniform(-scale, scale, size=shape), requires_grad=True, name=name)


class Linear(Module):
    """``x @ weight + bias`` over the last axis; uniform(-1/sqrt(fan_in), +) init."""

    def __init__(self, fan_in, fan_out, rng, bias=True):
        s = 1.0 / np.sqrt(fan_in)
        self.fan_in = fan_in
        self.fan_out = fan_out
        self.weight = uniform_param(rng, (fan_in, fan_out), s)
        self.bias = uniform_param(rng, (fan_out,), s) if bias else None

    def __call__(self, x):
        if x.shape[-1] != self.fan_in:
            raise DimensionError(
                f"Linear expects last axis {self.fan_in}, got input shape {x.shape}"
            )
        y = matmul(x, self.weight)
        return y + self.bias if self.bias is not None else y


class FNN(Module):
    """Fully connected net applied row-wise over the last axis.

    ``widths = [in, h1, ..., out]``; the activation follows every layer except
    the last unless ``final_activation`` is set.
    """

    def __init__(self, widths, rng, activation="gelu", final_activation=False):
        if len(widths) < 2:
            raise ValueError(f"FNN needs at least input and output widths, got {widths}")
        self.widths = list(widths)
        self.activation = activation
        self.final_activation = final_activation
        self.layers = [Linear(a, b, rng) for a, b in zip(widths[:-1], widths[1:])]

    @property
    def in_width(self):
        return self.widths[0]

    @property
    def out_width(self):
        return self.widths[-1]

    def __call__(self, x):
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < last or self.final_activation:
                x = activation(x, self.activation)
        return x
