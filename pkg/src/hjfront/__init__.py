"""Front tracking for conservation laws and Hamilton-Jacobi equations with discontinuous coefficients."""

from hjfront.coeffs import PiecewiseConstantFn, PiecewiseSpec, discretize, slopes_from_potential
from hjfront.errors import (ConfigError, DomainError, ExpressionError, HJFrontError, InputError, NoPreimageError,
                            RangeError, RunError, UnsolvableRiemannError)
from hjfront.flux import HamiltonianModel, offset_eikonal, quadratic_cap, validate
from hjfront.grid import FluxGrid, build as build_grid
from hjfront.hj import HJSolution, reconstruct, riemann_hj, riemann_hj_integral
from hjfront.kernels import BACKEND
from hjfront.riemann import solve_interface, solve_scalar
from hjfront.tracker import SolutionLog, Tracker, track

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "DomainError", "ExpressionError", "FluxGrid", "HJFrontError", "HJSolution",
    "HamiltonianModel", "InputError", "NoPreimageError", "PiecewiseConstantFn", "PiecewiseSpec", "RangeError",
    "RunError", "SolutionLog", "Tracker", "UnsolvableRiemannError", "build_grid", "discretize", "offset_eikonal",
    "quadratic_cap", "reconstruct", "riemann_hj", "riemann_hj_integral", "slopes_from_potential",
    "solve_interface", "solve_scalar", "track", "validate",
]
