"""Normalized ground states of coupled mass-supercritical Schrödinger systems on radial grids."""

from .beta import BetaProblem, beta_bounds, beta_direct, beta_star, rayleigh_minimizer, sobolev_constant
from .errors import ExpansionRegimeError, GridMismatchError, ParameterError, SolverError
from .functionals import (
    Fiber,
    Pair,
    SystemParams,
    coercivity_constants,
    energy_J,
    grad_lower_bound,
    multipliers,
    pde_residual,
    pohozaev_P,
    project_fiber,
)
from .radial import RadialField, RadialGrid, make_grid
from .rearrange import projected_energy, rearrange_and_project, schwartz_rearrange
from .scalar import (
    ScalarParams,
    gn_constant,
    ground_state,
    lambda_scalar,
    mass_threshold_b,
    scalar_energy_m,
    scale_to_mass,
    solve_Up,
)
from .solver import (
    GroundStateResult,
    SolveConfig,
    coupling_gain_expansion,
    mass_saturation_check,
    minimize_ground,
    reduced_energy,
    verify_strict_inequality,
)

__all__ = [
    "BetaProblem",
    "ExpansionRegimeError",
    "Fiber",
    "GridMismatchError",
    "GroundStateResult",
    "Pair",
    "ParameterError",
    "RadialField",
    "RadialGrid",
    "ScalarParams",
    "SolveConfig",
    "SolverError",
    "SystemParams",
    "beta_bounds",
    "beta_direct",
    "beta_star",
    "coercivity_constants",
    "coupling_gain_expansion",
    "energy_J",
    "gn_constant",
    "grad_lower_bound",
    "ground_state",
    "lambda_scalar",
    "make_grid",
    "mass_saturation_check",
    "mass_threshold_b",
    "minimize_ground",
    "multipliers",
    "pde_residual",
    "pohozaev_P",
    "project_fiber",
    "projected_energy",
    "rayleigh_minimizer",
    "rearrange_and_project",
    "reduced_energy",
    "scalar_energy_m",
    "scale_to_mass",
    "schwartz_rearrange",
    "sobolev_constant",
    "solve_Up",
    "verify_strict_inequality",
]
