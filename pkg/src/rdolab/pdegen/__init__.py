"""Ground-truth data: Gaussian-process inputs and solvers for the three benchmarks."""
from .burgers import BurgersSpec, solve_burgers
from .dataset import Dataset, ResolutionBlock, load_dataset, make_dataset, save_dataset
from .fem import TriangleMesh, build_triangle_mesh, sample_perimeter_bc, solve_poisson_fem
from .gp import GpKernelSpec, GpSampler, gp_sample_1d, kernel_matrix
from .sbvp import SbvpSpec, solve_sbvp, thomas_solve

__all__ = [
    "BurgersSpec",
    "Dataset",
    "GpKernelSpec",
    "GpSampler",
    "ResolutionBlock",
    "SbvpSpec",
    "TriangleMesh",
    "build_triangle_mesh",
    "gp_sample_1d",
    "kernel_matrix",
    "load_dataset",
    "make_dataset",
    "sample_perimeter_bc",
    "save_dataset",
    "solve_burgers",
    "solve_poisson_fem",
    "solve_sbvp",
    "thomas_solve",
]
