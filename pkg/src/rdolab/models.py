"""Operator models: RDO, DeepONet and a 1-D FNO, plus grids and the integral reduction.

All models share one calling convention::

    model(a, grid, queries) -> Tensor [B, n]

where ``a`` holds ``B`` input functions sampled on ``grid`` (``[B, m]``) and
``queries`` is an ``[n, d2]`` array of output locations shared by the batch.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .attention import AioLayer
from .errors import ConfigError, DimensionError, ModeOverflowError, ResolutionMismatchError
from .nn import FNN, Linear, Module
from .seeding import INIT, rng_for
from .spectral import FioLayer, fio_forward, n_freq
from .tensor import ACTIVATIONS, Tensor, as_tensor, concat, matmul, reshape, swapaxes, tsum


@dataclass(frozen=True)
class GridSpec:
    """``m`` uniform nodes on ``[lo, hi]`` including both endpoints."""

    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"a grid needs at least 2 nodes, got m={self.m}")
        if not self.hi > self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def h(self):
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def nodes(self):
        return self.lo + np.arange(self.m) * self.h

    def coarsen(self, m):
        """The nested grid with ``m`` nodes over the same interval."""
        return GridSpec(self.lo, self.hi, m)


@dataclass
class FunctionSample:
    """Nodal values ``[m, d_a]`` of one function on a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.m:
            raise DimensionError(f"{v.shape[0]} values for a grid of {self.grid.m} nodes")
        self.values = v

    @classmethod
    def from_function(cls, f, grid):
        """Discretization operator: evaluate ``f`` at the grid nodes."""
        return cls(grid, np.asarray(f(grid.nodes), dtype=np.float64))


@dataclass
class QuerySet:
    """Output locations ``[n, d2]`` with optional reference values ``[n]``."""

    points: np.ndarray
    values: np.ndarray | None = None
    contains: object = field(default=None, repr=False)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        if p.ndim == 1:
            p = p[:, None]
        self.points = p
        if self.values is not None:
            self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
            if self.values.shape[0] != p.shape[0]:
                raise DimensionError(f"{self.values.shape[0]} values for {p.shape[0]} query points")
        if self.contains is not None and not np.all(self.contains(p)):
            raise ValueError("query points lie outside the output domain")


# -- integral reduction --------------------------------------------------------
QUADRATURES = ("trapezoid", "riemann")


def quadrature_weights(grid, rule="trapezoid"):
    """Composite trapezoid weights (``h/2`` at the ends) or the bare ``h * sum``."""
    w = np.full(grid.m, grid.h)
    if rule == "trapezoid":
        w[0] = w[-1] = 0.5 * grid.h
    elif rule != "riemann":
        raise ValueError(f"unknown quadrature {rule!r}; expected one of {QUADRATURES}")
    return w


def integral_reduce(phi, grid, rule="trapezoid"):
    """Per-channel integral of ``phi`` (``[..., m, p]``) over the grid -> ``[..., p]``."""
    phi = as_tensor(phi)
    if phi.ndim < 2 or phi.shape[-2] != grid.m:
        raise DimensionError(f"integral_reduce: expected [..., {grid.m}, p], got {phi.shape}")
    w = Tensor(quadrature_weights(grid, rule)[:, None])
    return tsum(phi * w, axis=-2)


# -- shared helpers ------------------------------------------------------------
def _batch_input(a, grid):
    """Coerce input functions to ``[B, m, 1]``."""
    a = as_tensor(a)
    if a.ndim == 1:
        a = reshape(a, (1, a.shape[0], 1))
    elif a.ndim == 2:
        a = reshape(a, (a.shape[0], a.shape[1], 1))
    if a.ndim != 3 or a.shape[-1] != 1:
        raise DimensionError(f"input functions must be [B, m] or [B, m, 1], got {a.shape}")
    if a.shape[1] != grid.m:
        raise DimensionError(f"input has {a.shape[1]} nodes but grid has {grid.m}")
    return a


def with_coordinates(a, grid):
    """Concatenate the node coordinate to every input row: ``[B, m, 1] -> [B, m, 2]``."""
    a = _batch_input(a, grid)
    x = np.broadcast_to(grid.nodes[None, :, None], (a.shape[0], grid.m, 1))
    return concat([a, Tensor(np.array(x))], axis=-1)


def pointwise_lift(sample, net):
    """Apply ``net`` to each row ``[a(x_i), x_i]`` of a :class:`FunctionSample`."""
    rows = np.concatenate([sample.values, sample.grid.nodes[:, None]], axis=1)
    in_width = net.fan_in if isinstance(net, Linear) else net.in_width
    if rows.shape[1] != in_width:
        raise DimensionError(f"lift expects {in_width} input channels, sample gives {rows.shape[1]}")
    return net(Tensor(rows))


def trunk_forward(y, trunk):
    y = as_tensor(np.asarray(y, dtype=np.float64) if not isinstance(y, Tensor) else y)
    if y.ndim == 1:
        y = reshape(y, (y.shape[0], 1))
    if y.shape[-1] != trunk.in_width:
        raise DimensionError(f"trunk expects {trunk.in_width} coordinates, got {y.shape}")
    return trunk(y)


def _query_array(queries):
    if isinstance(queries, QuerySet):
        return queries.points
    q = np.asarray(queries, dtype=np.float64)
    return q[:, None] if q.ndim == 1 else q


# -- model descriptor ----------------------------------------------------------
MODEL_KINDS = ("rdo", "deeponet", "fno")


@dataclass
class ModelSpec:
    """Architecture hyperparameters; serialized next to every checkpoint."""

    kind: str = "rdo"
    t1: int = 3
    t2: int = 1
    width: int = 32
    p: int = 100
    modes: int = 16
    trunk: tuple = (1, 100, 100, 100)
    branch: tuple = (33, 100, 100, 100)
    attn_feature: int = 0
    attn_depth: int = 1
    fno_layers: int = 4
    projection: int = 128
    activation: str = "gelu"
    quadrature: str = "trapezoid"

    def __post_init__(self):
        self.trunk = tuple(int(v) for v in self.trunk)
        self.branch = tuple(int(v) for v in self.branch)
        self.validate()

    def validate(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model kind {self.kind!r} not in {MODEL_KINDS}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation {self.activation!r} not in {ACTIVATIONS}")
        if self.quadrature not in QUADRATURES:
            raise ConfigError(f"quadrature {self.quadrature!r} not in {QUADRATURES}")
        if self.kind == "rdo" and self.trunk[-1] != self.p:
            raise ConfigError(f"trunk output width {self.trunk[-1]} must equal p={self.p}")
        if self.kind == "deeponet" and self.branch[-1] != self.trunk[-1]:
            raise ConfigError(
                f"branch output width {self.branch[-1]} must equal trunk output {self.trunk[-1]}"
            )
        for name in ("t1", "t2", "width", "p", "modes", "fno_layers", "projection", "attn_depth"):
            if getattr(self, name) < (0 if name in ("t1", "t2") else 1):
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")

    def to_dict(self):
        d = asdict(self)
        d["trunk"] = list(self.trunk)
        d["branch"] = list(self.branch)
        return d

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


# -- models --------------------------------------------------------------------
class RdoModel(Module):
    """DeepONet whose branch is ``T o P2 o AIO^T2 o P1 o FIO^T1 o P0``.

    The architecture never depends on the input resolution; any grid with
    ``m // 2 + 1 >= modes`` is accepted.
    """

    def __init__(self, spec, rng):
        self.spec = spec
        w, act = spec.width, spec.activation
        self.lift = Linear(2, w, rng)
        self.fio = [FioLayer(w, spec.modes, rng, act) for _ in range(spec.t1)]
        self.transition = FNN([w, w], rng, act, final_activation=True)
        feature = spec.attn_feature or w
        self.aio = [AioLayer(w, rng, feature, spec.attn_depth, act) for _ in range(spec.t2)]
        self.projection = FNN([w, w, spec.p], rng, act)
        self.trunk = FNN(list(spec.trunk), rng, act)

    def check_grid(self, grid):
        if self.spec.t1 and self.spec.modes > n_freq(grid.m):
            raise ModeOverflowError(self.spec.modes, grid.m)

    def features(self, a, grid):
        """Branch feature function ``phi_T`` on the grid, ``[B, m, p]``."""
        self.check_grid(grid)
        phi = self.lift(with_coordinates(a, grid))
        for layer in self.fio:
            phi = layer(phi)
        phi = self.transition(phi)
        for layer in self.aio:
            phi = layer(phi)
        return self.projection(phi)

    def branch(self, a, grid):
        return integral_reduce(self.features(a, grid), grid, self.spec.quadrature)

    def __call__(self, a, grid, queries):
        b = self.branch(a, grid)
        t = trunk_forward(_query_array(queries), self.trunk)
        return matmul(b, swapaxes(t, 0, 1))


class DeepOnetModel(Module):
    """``branch(a(x_1..x_m)) . trunk(y) + b0``; ``m`` is frozen at construction."""

    def __init__(self, spec, rng):
        self.spec = spec
        self.branch_net = FNN(list(spec.branch), rng, spec.activation)
        self.trunk = FNN(list(spec.trunk), rng, spec.activation)
        self.b0 = Tensor(np.zeros(()), requires_grad=True)

    @property
    def input_points(self):
        return self.branch_net.in_width

    def branch(self, a, grid):
        a = as_tensor(a)
        if a.ndim == 3:
            a = reshape(a, a.shape[:2])
        if a.ndim == 1:
            a = reshape(a, (1, a.shape[0]))
        if grid.m != self.input_points or a.shape[-1] != self.input_points:
            raise ResolutionMismatchError(self.input_points, a.shape[-1])
        return self.branch_net(a)

    def __call__(self, a, grid, queries):
        b = self.branch(a, grid)
        t = trunk_forward(_query_array(queries), self.trunk)
        return matmul(b, swapaxes(t, 0, 1)) + self.b0


class FnoModel(Module):
    """Lift -> FIO stack (no activation after the last layer) -> pointwise projection.

    Output lives on the input grid, so queries must be that grid's nodes.
    """

    def __init__(self, spec, rng):
        self.spec = spec
        w = spec.width
        self.lift = Linear(2, w, rng)
        self.fio = [FioLayer(w, spec.modes, rng, spec.activation) for _ in range(spec.fno_layers)]
        self.projection = FNN([w, spec.projection, 1], rng, spec.activation)

    def nodal(self, a, grid):
        if self.spec.modes > n_freq(grid.m):
            raise ModeOverflowError(self.spec.modes, grid.m)
        phi = self.lift(with_coordinates(a, grid))
        last = len(self.fio) - 1
        for i, layer in enumerate(self.fio):
            phi = fio_forward(phi, layer, None if i < last else "identity")
        out = self.projection(phi)
        return reshape(out, out.shape[:2])

    def __call__(self, a, grid, queries=None):
        if queries is not None:
            q = _query_array(queries)
            if q.shape != (grid.m, 1) or not np.allclose(q[:, 0], grid.nodes, atol=1e-12):
                raise DimensionError(
                    "FNO predicts on its input grid only; queries must equal the grid nodes"
                )
        return self.nodal(a, grid)


_MODEL_CLASSES = {"rdo": RdoModel, "deeponet": DeepOnetModel, "fno": FnoModel}


def build_model(spec, seed=0):
    """Instantiate the model for ``spec`` with parameters drawn from ``seed``'s init stream."""
    return _MODEL_CLASSES[spec.kind](spec, rng_for(seed, INIT))


def rdo_forward(model, sample, queries):
    """Single-sample RDO evaluation, ``[n, 1]``."""
    out = model(sample.values[None, :, 0], sample.grid, _query_array(queries))
    return reshape(out, (out.shape[1], 1))


def deeponet_forward(model, sample, queries):
    out = model(sample.values[None, :, 0], sample.grid, _query_array(queries))
    return reshape(out, (out.shape[1], 1))


def fno_forward(model, sample):
    out = model.nodal(sample.values[None, :, 0], sample.grid)
    return reshape(out, (out.shape[1], 1))
