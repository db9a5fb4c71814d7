"""Multi-resolution datasets: generation, the binary container and CSV export.

Binary layout (little-endian)::

    b"RDOD" | u32 version | u32 len, experiment id (UTF-8) | u64 seed
    | u32 len, provenance JSON (UTF-8) | u32 block count
    per block: u32 resolution | u32 samples | u32 queries | u32 query dim
               | f64 inputs [samples, resolution]
               | f64 query coordinates [queries, query dim]
               | f64 targets [samples, queries]
"""
from __future__ import annotations

import json
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError, NumericalError
from ..models import FunctionSample, GridSpec
from ..seeding import DATA, derive_seed
from .burgers import BurgersSpec, initial_condition, solve_burgers
from .fem import PerimeterSampler, PoissonSolver, boundary_values, build_triangle_mesh
from .gp import GpKernelSpec, GpSampler
from .sbvp import SbvpSpec, solve_sbvp

MAGIC = b"RDOD"
VERSION = 1
EXPERIMENTS = ("sbvp", "darcy_tri", "burgers")

DEFAULTS = {
    "sbvp": {
        "lo": 0.0, "hi": 1.0, "kernel": "exponential", "variance": 1.0, "length": 1.0,
        "mean": 0.0, "c": 15.0, "f": 10.0, "u_left": 1.0, "u_right": 0.0,
    },
    "darcy_tri": {
        "lo": 0.0, "hi": 1.0, "kernel": "squared_exponential", "variance": 1.0, "length": 0.2,
        "mean": 0.0, "mesh_level": 16, "K": 0.1, "f": -1.0,
    },
    "burgers": {
        "lo": -1.0, "hi": 1.0, "viscosity": 0.1, "dt": 0.01, "t_final": 1.0,
        "omega_mean": 1.2, "omega_std": 1.0, "t_stride": 10,
    },
}


@dataclass
class ResolutionBlock:
    """All samples at one input resolution; query points are shared by every sample."""

    resolution: int
    inputs: np.ndarray      # [N, resolution]
    queries: np.ndarray     # [n, d2]
    targets: np.ndarray     # [N, n]

    def __len__(self):
        return self.inputs.shape[0]

    def take(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        return ResolutionBlock(self.resolution, self.inputs[idx], self.queries, self.targets[idx])


@dataclass
class Dataset:
    experiment: str
    seed: int
    provenance: dict
    blocks: dict = field(default_factory=dict)

    @property
    def resolutions(self):
        return sorted(self.blocks)

    def __len__(self):
        return len(next(iter(self.blocks.values()))) if self.blocks else 0

    def grid(self, resolution):
        return GridSpec(float(self.provenance["lo"]), float(self.provenance["hi"]), int(resolution))

    def block(self, resolution):
        if resolution not in self.blocks:
            raise KeyError(
                f"dataset has no resolution {resolution}; available {self.resolutions}"
            )
        return self.blocks[resolution]

    def take(self, idx):
        return Dataset(
            self.experiment, self.seed, self.provenance,
            {r: b.take(idx) for r, b in self.blocks.items()},
        )


# -- resolution nesting -------------------------------------------------------
def check_nesting(resolutions):
    """Sorted resolutions, all of the form ``(m_max - 1) / 2**j + 1``."""
    res = sorted({int(r) for r in resolutions})
    if not res or res[0] < 2:
        raise ValueError(f"resolutions must be >= 2, got {resolutions}")
    top = res[-1]
    family = []
    m = top
    while m >= 2:
        family.append(m)
        if (m - 1) % 2:
            break
        m = (m - 1) // 2 + 1
    bad = [r for r in res if r not in family]
    if bad:
        raise ValueError(
            f"resolutions {bad} do not nest in {top}; valid family: {sorted(family)}"
        )
    return res


def stride(fine, coarse):
    return (fine - 1) // (coarse - 1)


# -- per-experiment sample generators -----------------------------------------
class _SbvpGen:
    def __init__(self, p, top):
        self.grid = GridSpec(p["lo"], p["hi"], top)
        kernel = GpKernelSpec(p["kernel"], p["variance"], p["length"], p["mean"])
        self.gp = GpSampler(kernel, self.grid.nodes)
        self.spec = SbvpSpec(p["c"], p["f"], p["u_left"], p["u_right"])

    def __call__(self, rng):
        a = np.exp(self.gp.draw(rng))
        u = solve_sbvp(FunctionSample(self.grid, a), self.spec)
        return a, u.values[:, 0]

    def queries(self, res):
        return self.grid.coarsen(res).nodes[:, None]

    def targets(self, full, res):
        return full[:, :: stride(self.grid.m, res)]


class _DarcyGen:
    def __init__(self, p, top):
        self.mesh = build_triangle_mesh(int(p["mesh_level"]))
        kernel = GpKernelSpec(p["kernel"], p["variance"], p["length"], p["mean"])
        self.perim = PerimeterSampler(kernel, top)
        self.solver = PoissonSolver(self.mesh, p["K"], p["f"])

    def __call__(self, rng):
        bc = self.perim.draw(rng)
        u = self.solver.solve(boundary_values(bc, self.mesh))
        return bc.values[:, 0], u

    def queries(self, res):
        return self.mesh.vertices.copy()

    def targets(self, full, res):
        return full


class _BurgersGen:
    def __init__(self, p, top):
        self.grid = GridSpec(p["lo"], p["hi"], top)
        self.spec = BurgersSpec(p["viscosity"], p["dt"], p["t_final"], p["omega_mean"], p["omega_std"])
        self.t_stride = int(p["t_stride"])
        self.levels = np.arange(self.t_stride, self.spec.steps + 1, self.t_stride)

    def __call__(self, rng):
        omega = rng.normal(self.spec.omega_mean, self.spec.omega_std)
        u0 = initial_condition(self.grid.nodes, omega)
        u0[-1] = u0[0]
        field_ = solve_burgers(FunctionSample(self.grid, u0), self.spec)
        return u0, field_[self.levels]          # [T, m]

    def queries(self, res):
        x = self.grid.coarsen(res).nodes
        t = self.levels * self.spec.dt
        tt, xx = np.meshgrid(t, x, indexing="ij")
        return np.stack([xx.ravel(), tt.ravel()], axis=1)

    def targets(self, full, res):
        s = stride(self.grid.m, res)
        return full[:, :, ::s].reshape(full.shape[0], -1)


_GENERATORS = {"sbvp": _SbvpGen, "darcy_tri": _DarcyGen, "burgers": _BurgersGen}


def _one_sample(gen, seed, i):
    sub = derive_seed(seed, DATA, i)
    try:
        a, u = gen(np.random.default_rng(sub))
    except NumericalError as exc:
        raise NumericalError(f"sample {i} (sub-seed {sub}): {exc}") from None
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(u))):
        raise NumericalError(f"sample {i} (sub-seed {sub}): non-finite values")
    return a, u


def _chunk(args):
    experiment, params, top, seed, indices = args
    gen = _GENERATORS[experiment](params, top)
    return [_one_sample(gen, seed, i) for i in indices]


def make_dataset(experiment, n, resolutions, seed, workers=1, **overrides):
    """Generate ``n`` samples at the finest resolution and stride down to the others.

    Sample ``i`` draws from sub-seed ``derive_seed(seed, DATA, i)`` so the result
    does not depend on ``workers``.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    if n < 1:
        raise ValueError("sample count must be positive")
    res = check_nesting(resolutions)
    top = res[-1]
    params = dict(DEFAULTS[experiment])
    unknown = set(overrides) - set(params)
    if unknown:
        raise ValueError(f"unknown {experiment} parameters: {sorted(unknown)}")
    params.update(overrides)
    gen = _GENERATORS[experiment](params, top)
    if workers > 1:
        parts = np.array_split(np.arange(n), workers)
        jobs = [(experiment, params, top, seed, list(p)) for p in parts if len(p)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            samples = [s for chunk in ex.map(_chunk, jobs) for s in chunk]
    else:
        samples = [_one_sample(gen, seed, i) for i in range(n)]
    inputs = np.stack([s[0] for s in samples])
    full = np.stack([s[1] for s in samples])
    blocks = {}
    for r in res:
        blocks[r] = ResolutionBlock(
            r,
            np.ascontiguousarray(inputs[:, :: stride(top, r)]),
            np.ascontiguousarray(gen.queries(r), dtype=np.float64),
            np.ascontiguousarray(gen.targets(full, r)),
        )
    provenance = dict(params, n=int(n), resolutions=res, generated_at=top)
    return Dataset(experiment, int(seed), provenance, blocks)


# -- binary container ----------------------------------------------------------
def _pack_str(s):
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def save_dataset(ds, path):
    parts = [MAGIC, struct.pack("<I", VERSION), _pack_str(ds.experiment), struct.pack("<Q", ds.seed)]
    parts.append(_pack_str(json.dumps(ds.provenance, sort_keys=True)))
    parts.append(struct.pack("<I", len(ds.blocks)))
    for r in ds.resolutions:
        b = ds.blocks[r]
        parts.append(struct.pack("<4I", r, len(b), b.queries.shape[0], b.queries.shape[1]))
        for arr in (b.inputs, b.queries, b.targets):
            parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, blob, path):
        self.blob, self.pos, self.path = blob, 0, path

    def unpack(self, fmt):
        try:
            vals = struct.unpack_from(fmt, self.blob, self.pos)
        except struct.error:
            raise FormatError(f"{self.path}: truncated dataset file") from None
        self.pos += struct.calcsize(fmt)
        return vals

    def string(self):
        (n,) = self.unpack("<I")
        s = self.blob[self.pos : self.pos + n]
        self.pos += n
        return s.decode("utf-8")

    def array(self, *shape):
        count = int(np.prod(shape))
        if self.pos + 8 * count > len(self.blob):
            raise FormatError(f"{self.path}: truncated dataset payload")
        arr = np.frombuffer(self.blob, "<f8", count, self.pos).reshape(shape).astype(np.float64)
        self.pos += 8 * count
        return arr


def load_dataset(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: not a dataset file (bad magic)")
    rd = _Reader(blob, path)
    rd.pos = 4
    (version,) = rd.unpack("<I")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported dataset version {version}")
    experiment = rd.string()
    (seed,) = rd.unpack("<Q")
    provenance = json.loads(rd.string())
    (nblocks,) = rd.unpack("<I")
    blocks = {}
    for _ in range(nblocks):
        r, count, nq, dq = rd.unpack("<4I")
        inputs = rd.array(count, r)
        queries = rd.array(nq, dq)
        targets = rd.array(count, nq)
        blocks[r] = ResolutionBlock(r, inputs, queries, targets)
    if rd.pos != len(blob):
        raise FormatError(f"{path}: {len(blob) - rd.pos} trailing bytes")
    return Dataset(experiment, seed, provenance, blocks)


def export_csv(ds, out_dir):
    """Write inputs/queries/targets of every block as CSV; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for r in ds.resolutions:
        b = ds.blocks[r]
        for part, arr in (("inputs", b.inputs), ("queries", b.queries), ("targets", b.targets)):
            path = os.path.join(out_dir, f"{ds.experiment}_r{r}_{part}.csv")
            np.savetxt(path, arr, delimiter=",", fmt="%.17g")
            paths.append(path)
    return paths
