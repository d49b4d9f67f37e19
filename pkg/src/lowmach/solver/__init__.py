"""Time integrators for the slightly compressible 1D equations."""

from .states import (
    BoundaryKind,
    FluctuationState,
    LagrangianState,
    Scheme,
    SolverConfig,
    Trajectory,
)
from .lagrangian import (
    cfl_bound,
    init_well_prepared,
    lagrangian_fluxes,
    make_profile_boundary,
    step_lagrangian_explicit,
    step_lagrangian_semi_implicit,
)
from .fluctuation import (
    decay_condition_constant,
    gaussian_bump,
    init_ill_prepared,
    limit_velocity,
    step_fluctuation_semi_implicit,
    wave_log_temperature,
)
from .limit import solve_limit_theta
from .runner import rescale, run

__all__ = [
    "Scheme",
    "BoundaryKind",
    "SolverConfig",
    "LagrangianState",
    "FluctuationState",
    "Trajectory",
    "init_well_prepared",
    "init_ill_prepared",
    "step_lagrangian_explicit",
    "step_lagrangian_semi_implicit",
    "step_fluctuation_semi_implicit",
    "solve_limit_theta",
    "limit_velocity",
    "decay_condition_constant",
    "gaussian_bump",
    "wave_log_temperature",
    "cfl_bound",
    "lagrangian_fluxes",
    "make_profile_boundary",
    "run",
    "rescale",
]
