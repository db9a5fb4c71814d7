from types import SimpleNamespace

import numpy as np
import pytest

from rdolab.models import GridSpec
from rdolab.pdegen.fem import (
    TRIANGLE_VERTICES,
    PerimeterSampler,
    assemble,
    boundary_values,
    build_triangle_mesh,
    sample_perimeter_bc,
    solve_poisson_fem,
)
from rdolab.pdegen.gp import GpKernelSpec

SE = GpKernelSpec("squared_exponential", 1.0, 0.2)


def shoelace(p):
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def test_level_one():
    mesh = build_triangle_mesh(1)
    assert len(mesh.vertices) == 3 and len(mesh.triangles) == 1 and len(mesh.boundary) == 3


def test_vertex_set():
    got = {tuple(np.round(v, 12)) for v in build_triangle_mesh(1).vertices}
    assert got == {(0.0, 0.0), (0.0, 1.0), (0.5, round(np.sqrt(1.5), 12))}


@pytest.mark.parametrize("level", [1, 2, 5, 16])
def test_area_orientation_and_euler(level):
    mesh = build_triangle_mesh(level)
    areas = mesh.areas()
    assert np.all(areas > 0)
    assert len(mesh.triangles) == level**2
    assert areas.sum() == pytest.approx(shoelace(TRIANGLE_VERTICES), abs=1e-12)
    V, E, F = len(mesh.vertices), len(mesh.edges()), len(mesh.triangles)
    assert V - E + F == 1


def test_boundary_walk():
    mesh = build_triangle_mesh(4)
    b = mesh.boundary
    assert len(b) == len(set(b)) == 12
    np.testing.assert_array_equal(mesh.vertices[b[0]], [0.0, 0.0])
    assert np.all(np.diff(mesh.arc) > 0) and mesh.arc[0] == 0.0 and mesh.arc[-1] < 1.0
    assert shoelace(mesh.vertices[b]) > 0
    # counterclockwise: signed area of the boundary polygon is positive
    p = mesh.vertices[b]
    signed = 0.5 * (np.dot(p[:, 0], np.roll(p[:, 1], -1)) - np.dot(p[:, 1], np.roll(p[:, 0], -1)))
    assert signed > 0
    assert np.all(mesh.contains(mesh.vertices))


def test_stiffness_symmetric_positive_definite():
    mesh = build_triangle_mesh(6)
    A, _ = assemble(mesh, K=0.1)
    dense = A.toarray()
    assert np.abs(dense - dense.T).max() < 1e-14
    inner = mesh.interior
    assert np.linalg.eigvalsh(dense[np.ix_(inner, inner)]).min() > 0
    np.testing.assert_allclose(dense.sum(axis=1), 0, atol=1e-13)


def test_constant_boundary_reproduced():
    mesh = build_triangle_mesh(8)
    u = solve_poisson_fem(np.full(len(mesh.boundary), 2.5), mesh, K=0.1, f=0.0)
    assert np.abs(u - 2.5).max() < 1e-12


def test_linear_harmonic_reproduced():
    mesh = build_triangle_mesh(10)
    g = lambda p: 2 * p[:, 0] - p[:, 1]
    u = solve_poisson_fem(g(mesh.vertices[mesh.boundary]), mesh, K=0.1, f=0.0)
    assert np.abs(u - g(mesh.vertices)).max() < 1e-10


def test_refinement_at_centroid():
    centroid = TRIANGLE_VERTICES.mean(axis=0)

    def at_centroid(level):
        mesh = build_triangle_mesh(level)
        u = solve_poisson_fem(np.zeros(len(mesh.boundary)), mesh, K=0.1, f=-1.0)
        i = np.argmin(np.linalg.norm(mesh.vertices - centroid, axis=1))
        assert np.linalg.norm(mesh.vertices[i] - centroid) < 1e-12
        return u[i]

    # levels divisible by 3 put a node on the centroid
    u3, u12, u48 = at_centroid(3), at_centroid(12), at_centroid(48)
    assert abs(u12 - u48) / abs(u48) < 0.01
    assert abs(u12 - u48) < abs(u3 - u48)
    assert u48 < 0   # -K lap u = -1 with zero data gives a negative solution


def test_perimeter_seam_continuity():
    s = sample_perimeter_bc(SE, build_triangle_mesh(4), 51, seed=3)
    assert abs(s.values[0, 0] - s.values[-1, 0]) < 1e-10
    assert s.grid == GridSpec(0.0, 1.0, 51)


def test_perimeter_degenerate_variance():
    spec = GpKernelSpec("squared_exponential", 1e-16, 0.2, mean=-0.4)
    s = sample_perimeter_bc(spec, build_triangle_mesh(4), 21, seed=0)
    assert np.abs(s.values + 0.4).max() < 1e-6


def test_boundary_interpolation_hits_sample_nodes():
    sample = PerimeterSampler(SE, 41).draw(np.random.default_rng(1))
    aligned = SimpleNamespace(arc=sample.grid.nodes[::4][:-1])
    np.testing.assert_array_equal(boundary_values(sample, aligned), sample.values[::4, 0][:-1])
    mesh = build_triangle_mesh(16)
    edge = boundary_values(sample, mesh)
    assert edge[0] == sample.values[0, 0]
    j = np.searchsorted(sample.grid.nodes, mesh.arc, side="right") - 1
    lo = np.minimum(sample.values[j, 0], sample.values[j + 1, 0])
    hi = np.maximum(sample.values[j, 0], sample.values[j + 1, 0])
    assert np.all((edge >= lo - 1e-15) & (edge <= hi + 1e-15))
