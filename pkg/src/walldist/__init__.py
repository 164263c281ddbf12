"""Wall-distance solver kit.

Computes nearest-wall distance fields on structured curvilinear grids by
pseudo-time integration of the Eikonal, Hamilton-Jacobi (standard, LAD and
curvature-corrected) and Poisson equations, and evolves signed-distance
level sets for propellant grain burnback.
"""

from .grid import CurvilinearGrid, build_bump_grid, build_cartesian, compute_metrics
from .operators import FilterConfig
from .formulations import FormulationConfig
from .solver import BoundarySpec, MotionSpec, SolveConfig, SolveReport, solve_steady, solve_unsteady

__all__ = [
    "CurvilinearGrid",
    "build_cartesian",
    "build_bump_grid",
    "compute_metrics",
    "FilterConfig",
    "FormulationConfig",
    "BoundarySpec",
    "MotionSpec",
    "SolveConfig",
    "SolveReport",
    "solve_steady",
    "solve_unsteady",
]

__version__ = "0.1.0"
