"""Fixed-step driver producing snapshot trajectories."""

import math

from ..errors import ConfigInvalid, SimulationDiverged
from ..grids import Grid
from .fluctuation import step_fluctuation_semi_implicit
from .lagrangian import step_lagrangian_explicit, step_lagrangian_semi_implicit
from .states import FluctuationState, LagrangianState, Scheme, SolverConfig, Trajectory

MAX_STEPS = 20_000_000


def _stepper_for(state, cfg: SolverConfig):
    if isinstance(state, LagrangianState):
        if cfg.scheme is Scheme.EXPLICIT:
            return step_lagrangian_explicit
        return step_lagrangian_semi_implicit
    if isinstance(state, FluctuationState):
        if cfg.scheme is Scheme.EXPLICIT:
            raise ConfigInvalid("fluctuation form has no explicit stepper")
        return step_fluctuation_semi_implicit
    raise ConfigInvalid(f"unsupported state type {type(state).__name__}")


def run(initial, cfg: SolverConfig, boundary=None,
        raise_on_divergence: bool = True) -> Trajectory:
    """March from the initial state to cfg.end_time with fixed dt.

    Snapshots are taken at the first step boundary at or after each
    requested time (the final state when no times are requested).  Step
    errors propagate by default; with raise_on_divergence=False a
    SimulationDiverged is recorded on the trajectory instead of aborting.
    CFL and configuration errors always propagate.
    """
    step = _stepper_for(initial, cfg)
    t0 = initial.time
    duration = cfg.end_time - t0
    if duration < -1e-12:
        raise ConfigInvalid(
            f"end_time {cfg.end_time} lies before the initial time {t0}"
        )
    duration = max(duration, 0.0)
    total = max(0, math.ceil(duration / cfg.dt - 1e-9))
    if total > MAX_STEPS:
        raise ConfigInvalid(f"run would take {total} steps (limit {MAX_STEPS})")

    requested = cfg.snapshot_times if cfg.snapshot_times else (cfg.end_time,)
    due = {}
    for s in requested:
        k = min(total, max(0, math.ceil((s - t0) / cfg.dt - 1e-9)))
        due[k] = due.get(k, 0) + 1

    traj = Trajectory(config=cfg, requested_times=tuple(requested))
    state = initial
    for k in range(total + 1):
        for _ in range(due.get(k, 0)):
            traj.snapshots.append(state.copy())
        if k == total:
            break
        try:
            state = step(state, cfg, boundary=boundary)
        except SimulationDiverged as exc:
            if raise_on_divergence:
                raise
            traj.diverged = True
            traj.diverged_time = exc.time
            break
    return traj


def rescale(state: LagrangianState, epsilon: float,
            direction: str = "to_scaled") -> LagrangianState:
    """Switch between physical and diffusive-scaled Lagrangian variables.

    Scaled variables are y = x/eps, tau = t/eps^2 and velocity eps*u; the
    system becomes eps-free in them.  `direction` is "to_scaled" or
    "to_physical".
    """
    if not isinstance(state, LagrangianState):
        raise ConfigInvalid("rescaling is defined for Lagrangian states")
    if epsilon <= 0.0:
        raise ConfigInvalid(f"epsilon must be positive, got {epsilon}")
    if direction == "to_scaled":
        grid = Grid(state.grid.half_length / epsilon, state.grid.cells)
        return LagrangianState(grid, state.time / epsilon**2,
                               state.v.copy(), epsilon * state.u, state.T.copy())
    if direction == "to_physical":
        grid = Grid(state.grid.half_length * epsilon, state.grid.cells)
        return LagrangianState(grid, state.time * epsilon**2,
                               state.v.copy(), state.u / epsilon, state.T.copy())
    raise ConfigInvalid(f"unknown rescale direction {direction!r}")
