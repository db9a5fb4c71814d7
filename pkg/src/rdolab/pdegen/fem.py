"""P1 finite elements for ``-K lap u = f`` on a structured triangle mesh, and perimeter GP data."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import NumericalError
from ..models import FunctionSample, GridSpec
from .gp import GpSampler

# Counterclockwise order starting from (0, 0).
TRIANGLE_VERTICES = np.array([[0.0, 0.0], [0.5, np.sqrt(1.5)], [0.0, 1.0]])


@dataclass
class TriangleMesh:
    vertices: np.ndarray      # [V, 2]
    triangles: np.ndarray     # [F, 3] int, positively oriented
    boundary: np.ndarray      # [Nb] int, counterclockwise from vertex (0, 0)
    arc: np.ndarray           # [Nb] normalized arc length in [0, 1)
    perimeter: float

    @property
    def interior(self):
        mask = np.ones(len(self.vertices), bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    def areas(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def edges(self):
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def contains(self, pts, tol=1e-12):
        """Whether each point lies in the closed triangle."""
        pts = np.atleast_2d(pts)
        v = self.vertices[[0, self.boundary[len(self.boundary) // 3], self.boundary[2 * len(self.boundary) // 3]]]
        inside = np.ones(len(pts), bool)
        for a, b in ((v[0], v[1]), (v[1], v[2]), (v[2], v[0])):
            cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
            inside &= cross >= -tol
        return inside


def build_triangle_mesh(level, corners=TRIANGLE_VERTICES):
    """Split the triangle into ``level**2`` congruent sub-triangles.

    Node ``(i, j)`` sits at ``V0 + i/L (V1 - V0) + j/L (V2 - V0)``.
    """
    if level < 1:
        raise ValueError(f"refinement level must be >= 1, got {level}")
    L = level
    v0, v1, v2 = (np.asarray(c, float) for c in corners)
    index = {}
    verts = []
    for j in range(L + 1):
        for i in range(L + 1 - j):
            index[i, j] = len(verts)
            verts.append(v0 + (i / L) * (v1 - v0) + (j / L) * (v2 - v0))
    tris = []
    for j in range(L):
        for i in range(L - j):
            tris.append((index[i, j], index[i + 1, j], index[i, j + 1]))
            if i + j < L - 1:
                tris.append((index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]))
    boundary = (
        [index[i, 0] for i in range(L + 1)]
        + [index[i, L - i] for i in range(L - 1, -1, -1)]
        + [index[0, j] for j in range(L - 1, 0, -1)]
    )
    verts = np.array(verts)
    boundary = np.array(boundary)
    bpts = verts[boundary]
    seg = np.linalg.norm(np.diff(np.vstack([bpts, bpts[:1]]), axis=0), axis=1)
    perimeter = float(seg.sum())
    arc = np.concatenate([[0.0], np.cumsum(seg[:-1])]) / perimeter
    return TriangleMesh(verts, np.array(tris, dtype=np.int64), boundary, arc, perimeter)


def assemble(mesh, K=1.0, f=0.0):
    """Stiffness matrix (CSR) and load vector for ``-K lap u = f`` with constant data."""
    p = mesh.vertices[mesh.triangles]                    # [F, 3, 2]
    area = mesh.areas()
    # edge opposite each local vertex
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    local = K * np.einsum("fik,fjk->fij", e, e) / (4.0 * area)[:, None, None]
    rows = np.repeat(mesh.triangles, 3, axis=1).reshape(-1)
    cols = np.tile(mesh.triangles, (1, 3)).reshape(-1)
    n = len(mesh.vertices)
    A = sp.coo_matrix((local.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()
    load = np.zeros(n)
    np.add.at(load, mesh.triangles.reshape(-1), np.repeat(f * area / 3.0, 3))
    return A, load


class PoissonSolver:
    """Assemble and factor once; solve for many Dirichlet data."""

    def __init__(self, mesh, K=0.1, f=-1.0):
        self.mesh = mesh
        self.A, self.load = assemble(mesh, K, f)
        self.inner = mesh.interior
        self.bnd = mesh.boundary
        A = self.A.tocsc()
        self.A_ib = A[self.inner][:, self.bnd]
        if len(self.inner):
            try:
                self.lu = splu(A[self.inner][:, self.inner].tocsc())
            except RuntimeError as exc:
                raise NumericalError(f"singular FEM system: {exc}") from None

    def solve(self, bc):
        bc = np.asarray(bc, dtype=np.float64)
        if bc.shape != (len(self.bnd),):
            raise ValueError(f"expected {len(self.bnd)} boundary values, got shape {bc.shape}")
        u = np.empty(len(self.mesh.vertices))
        u[self.bnd] = bc
        if len(self.inner):
            u[self.inner] = self.lu.solve(self.load[self.inner] - self.A_ib @ bc)
        if not np.all(np.isfinite(u)):
            raise NumericalError("FEM solution is not finite")
        return u


def solve_poisson_fem(bc, mesh, K=0.1, f=-1.0):
    """Nodal P1 solution with Dirichlet data ``bc`` on ``mesh.boundary`` (in order)."""
    return PoissonSolver(mesh, K, f).solve(bc)


class PerimeterSampler:
    """GP on ``s`` uniform points of the normalized perimeter, conditioned on ``b(0) = b(1)``."""

    def __init__(self, spec, s):
        if s < 2:
            raise ValueError(f"perimeter resolution must be >= 2, got {s}")
        self.grid = GridSpec(0.0, 1.0, s)
        self.gp = GpSampler(spec, self.grid.nodes)
        c = np.zeros(s)
        c[0], c[-1] = 1.0, -1.0
        kc = self.gp.cov @ c
        denom = c @ kc
        # conditioned draw: b = z - K c (c'K c)^-1 c'z
        self.c = c
        self.gain = kc / denom if denom > 0 else np.zeros(s)

    def draw(self, rng):
        z = self.gp.draw(rng)
        b = z - self.gain * (self.c @ z)
        return FunctionSample(self.grid, b)


def sample_perimeter_bc(spec, mesh, s, seed):
    """Seam-continuous boundary function on ``s`` uniform arc-length nodes."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return PerimeterSampler(spec, s).draw(rng)


def boundary_values(sample, mesh):
    """Linear interpolation of a perimeter function onto the mesh boundary nodes."""
    return np.interp(mesh.arc, sample.grid.nodes, sample.values[:, 0])
