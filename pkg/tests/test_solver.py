"""Time steppers, runner and limit equation."""

import math

import numpy as np
import pytest

from lowmach.errors import (
    CFLViolation,
    ConfigInvalid,
    SimulationDiverged,
)
from lowmach.grids import Grid
from lowmach.profiles import eval_bar, eval_tilde
from lowmach.solver import (
    BoundaryKind,
    FluctuationState,
    LagrangianState,
    Scheme,
    SolverConfig,
    cfl_bound,
    decay_condition_constant,
    gaussian_bump,
    init_ill_prepared,
    init_well_prepared,
    lagrangian_fluxes,
    limit_velocity,
    make_profile_boundary,
    rescale,
    run,
    solve_limit_theta,
    step_fluctuation_semi_implicit,
    step_lagrangian_explicit,
    step_lagrangian_semi_implicit,
    wave_log_temperature,
)
from lowmach.wave import wave_eval


GRID = Grid(20.0, 401)


def _constant_state(grid=GRID):
    n = grid.cells
    return LagrangianState(grid, 0.0, np.ones(n), np.zeros(n), np.ones(n))


def test_init_well_prepared_matches_corrected_profile(ps):
    state = init_well_prepared(ps, GRID)
    til = eval_tilde(ps, GRID.nodes, 0.0)
    assert np.array_equal(state.v, til.v)
    assert np.array_equal(state.u, til.u)
    assert np.array_equal(state.T, til.T)
    assert state.time == 0.0


def test_init_well_prepared_noise_is_seeded_and_local(ps):
    rng1 = np.random.default_rng(42)
    rng2 = np.random.default_rng(42)
    a = init_well_prepared(ps, GRID, noise_amplitude=0.01, rng=rng1)
    b = init_well_prepared(ps, GRID, noise_amplitude=0.01, rng=rng2)
    assert np.array_equal(a.T, b.T)
    clean = init_well_prepared(ps, GRID)
    far = np.abs(GRID.nodes) > 10.0
    assert np.max(np.abs(a.T[far] - clean.T[far])) < 1e-9
    assert np.max(np.abs(a.T - clean.T)) > 1e-4


def test_constant_state_is_a_fixed_point():
    cfg_ex = SolverConfig(epsilon=0.3, dt=1e-4, scheme=Scheme.EXPLICIT)
    cfg_im = SolverConfig(epsilon=0.3, dt=1e-2, scheme=Scheme.SEMI_IMPLICIT)
    for cfg, stepper in ((cfg_ex, step_lagrangian_explicit),
                         (cfg_im, step_lagrangian_semi_implicit)):
        new = stepper(_constant_state(), cfg)
        assert np.max(np.abs(new.v - 1.0)) < 1e-14
        assert np.max(np.abs(new.u)) < 1e-14
        assert np.max(np.abs(new.T - 1.0)) < 1e-14


def test_explicit_rejects_oversized_step():
    state = _constant_state()
    cfg = SolverConfig(epsilon=0.1, dt=1.0, scheme=Scheme.EXPLICIT)
    bound = cfl_bound(state, cfg)
    assert bound < 1.0
    with pytest.raises(CFLViolation) as err:
        step_lagrangian_explicit(state, cfg)
    assert err.value.dt == 1.0
    assert err.value.bound == pytest.approx(bound)


def test_cfl_bound_formula():
    state = _constant_state()
    cfg = SolverConfig(epsilon=0.2, mu_tilde=2.0, kappa=1.0, dt=1e-5,
                       cfl_safety=0.8)
    dx = GRID.spacing
    acoustic = dx / (math.sqrt(2.0) / 0.2)
    diffusive = 0.5 * dx * dx / 2.0
    assert cfl_bound(state, cfg) == pytest.approx(0.8 * min(acoustic, diffusive))


def test_explicit_conserves_volume_and_energy(ps):
    state = init_well_prepared(ps, GRID)
    cfg = SolverConfig(epsilon=0.1, dt=1e-12, scheme=Scheme.EXPLICIT)
    dt = 0.5 * cfl_bound(state, cfg)
    cfg = SolverConfig(epsilon=0.1, dt=dt, scheme=Scheme.EXPLICIT)
    eps2 = cfg.epsilon**2
    for _ in range(20):
        mass_f, _, en_f = lagrangian_fluxes(state, cfg)
        m0 = np.sum(state.v)
        e0 = np.sum(state.T + 0.5 * eps2 * state.u**2)
        state = step_lagrangian_explicit(state, cfg)
        m1 = np.sum(state.v)
        e1 = np.sum(state.T + 0.5 * eps2 * state.u**2)
        dx = GRID.spacing
        assert abs(m1 - m0 + dt * (mass_f[-1] - mass_f[0]) / dx) < 1e-11 * abs(m0)
        assert abs(e1 - e0 + dt * (en_f[-1] - en_f[0]) / dx) < 1e-11 * abs(e0)


def test_semi_implicit_tracks_corrected_profile(ps):
    grid = Grid(25.0, 1001)
    state = init_well_prepared(ps, grid)
    cfg = SolverConfig(epsilon=0.1, dt=0.01, end_time=0.5)
    boundary = make_profile_boundary(ps, grid)
    traj = run(state, cfg, boundary=boundary)
    til = eval_tilde(ps, grid.nodes, traj.final.time)
    assert np.max(np.abs(traj.final.T - til.T)) < 2e-4
    assert np.max(np.abs(traj.final.v - til.v)) < 2e-4


def test_semi_implicit_first_order_in_time(ps):
    grid = Grid(25.0, 2001)
    boundary = make_profile_boundary(ps, grid)
    errs = []
    for dt in (0.04, 0.02, 0.01):
        state = init_well_prepared(ps, grid)
        cfg = SolverConfig(epsilon=0.1, dt=dt, end_time=0.4)
        traj = run(state, cfg, boundary=boundary)
        til = eval_tilde(ps, grid.nodes, traj.final.time)
        errs.append(np.max(np.abs(traj.final.T - til.T)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[2] > 2.0  # roughly first order before the floor


def test_ap_semi_implicit_stable_far_below_acoustic_cfl(ps):
    """dt = 0.1 dx at eps = 1e-3 is thousands of acoustic CFLs."""
    grid = Grid(20.0, 301)
    from lowmach.profiles import ProfileSet
    pse = ProfileSet(wave=ps.wave, mu_tilde=1.0, epsilon=1e-3)
    state = init_well_prepared(pse, grid)
    dt = 0.1 * grid.spacing
    cfg = SolverConfig(epsilon=1e-3, dt=dt, end_time=100 * dt)
    explicit_bound = cfl_bound(state, SolverConfig(epsilon=1e-3, dt=1e-12,
                                                   scheme=Scheme.EXPLICIT))
    assert dt > 50 * explicit_bound
    traj = run(state, cfg, boundary=make_profile_boundary(pse, grid))
    assert np.max(np.abs(traj.final.u)) < 1.0
    with pytest.raises((CFLViolation, SimulationDiverged)):
        step_lagrangian_explicit(state, SolverConfig(
            epsilon=1e-3, dt=dt, scheme=Scheme.EXPLICIT))


def test_neumann_keeps_constant_state():
    cfg = SolverConfig(epsilon=0.5, dt=0.01, bc=BoundaryKind.HOMOGENEOUS_NEUMANN)
    new = step_lagrangian_semi_implicit(_constant_state(), cfg)
    assert np.max(np.abs(new.T - 1.0)) < 1e-13


def test_run_snapshot_alignment():
    cfg = SolverConfig(epsilon=0.5, dt=0.25, end_time=1.0,
                       snapshot_times=(0.0, 0.33, 1.0))
    traj = run(_constant_state(), cfg)
    assert traj.times == (0.0, 0.5, 1.0)
    assert traj.requested_times == (0.0, 0.33, 1.0)


def test_run_end_time_zero_gives_single_snapshot():
    cfg = SolverConfig(epsilon=0.5, dt=0.1, end_time=0.0)
    traj = run(_constant_state(), cfg)
    assert len(traj.snapshots) == 1
    assert traj.times == (0.0,)
    assert not traj.diverged


def test_run_rejects_end_time_before_state():
    state = _constant_state()
    state.time = 2.0
    cfg = SolverConfig(epsilon=0.5, dt=0.1, end_time=1.0)
    with pytest.raises(ConfigInvalid):
        run(state, cfg)


def _doomed_fluctuation_state():
    # eps * p starts beyond the admissible log box, tripping the first step
    grid = Grid(5.0, 64)
    n = grid.cells
    return FluctuationState(grid, 0.0, np.full(n, 60.0), np.zeros(n),
                            np.zeros(n))


def test_run_propagates_divergence_by_default():
    cfg = SolverConfig(epsilon=1.0, dt=0.01, end_time=0.1)
    with pytest.raises(SimulationDiverged):
        run(_doomed_fluctuation_state(), cfg)


def test_run_records_divergence_when_asked():
    cfg = SolverConfig(epsilon=1.0, dt=0.01, end_time=0.1,
                       snapshot_times=(0.0, 0.1))
    traj = run(_doomed_fluctuation_state(), cfg, raise_on_divergence=False)
    assert traj.diverged
    assert traj.diverged_time == pytest.approx(0.01)
    assert traj.times == (0.0,)  # snapshots collected so far are kept


def test_run_rejects_explicit_fluctuation():
    cfg = SolverConfig(epsilon=0.1, dt=0.01, scheme=Scheme.EXPLICIT)
    with pytest.raises(ConfigInvalid):
        run(_doomed_fluctuation_state(), cfg)


def test_rescale_round_trip(ps):
    state = init_well_prepared(ps, GRID)
    state.time = 3.0
    back = rescale(rescale(state, 0.2, "to_scaled"), 0.2, "to_physical")
    assert back.grid == state.grid
    assert back.time == pytest.approx(3.0)
    assert np.max(np.abs(back.u - state.u)) < 1e-14
    assert np.array_equal(back.v, state.v)


def test_rescale_identity_at_unit_epsilon(ps):
    state = init_well_prepared(ps, GRID)
    scaled = rescale(state, 1.0, "to_scaled")
    assert scaled.grid == state.grid
    assert np.array_equal(scaled.u, state.u)


def test_rescale_rejects_unknown_direction(ps):
    state = init_well_prepared(ps, GRID)
    with pytest.raises(ConfigInvalid):
        rescale(state, 0.1, "sideways")


# ---------------------------------------------------------------------------
# fluctuation form


def test_fluctuation_constant_state_fixed_point():
    grid = Grid(10.0, 201)
    n = grid.cells
    state = FluctuationState(grid, 0.0, np.zeros(n), np.zeros(n),
                             np.full(n, 0.3))
    cfg = SolverConfig(epsilon=0.1, dt=0.01)
    new = step_fluctuation_semi_implicit(state, cfg)
    assert np.max(np.abs(new.p)) < 1e-12
    assert np.max(np.abs(new.u)) < 1e-12
    assert np.max(np.abs(new.theta - 0.3)) < 1e-12


def test_fluctuation_pressure_stays_small_on_compatible_data(wave):
    """Starting on the limit manifold, p remains O(eps)."""
    grid = Grid(10.0, 401)
    sup_p = {}
    for eps in (0.2, 0.05):
        theta = wave_log_temperature(wave, grid)
        u = limit_velocity(theta, grid, wave.kappa)
        state = init_ill_prepared(theta, None, u, grid, epsilon=eps)
        cfg = SolverConfig(epsilon=eps, dt=0.005, end_time=0.5)
        worst = 0.0
        for _ in range(100):
            state = step_fluctuation_semi_implicit(state, cfg)
            worst = max(worst, float(np.max(np.abs(state.p))))
        sup_p[eps] = worst
    assert sup_p[0.05] < 0.05
    assert sup_p[0.2] / sup_p[0.05] > 2.0


def test_fluctuation_bump_oscillates_faster_at_smaller_epsilon():
    grid = Grid(5.0, 201)
    crossings = {}
    for eps in (0.2, 0.1):
        state = init_ill_prepared(np.zeros(grid.cells), gaussian_bump(grid),
                                  None, grid, epsilon=eps)
        cfg = SolverConfig(epsilon=eps, dt=0.002, end_time=2.0)
        norms = []
        for _ in range(1000):
            state = step_fluctuation_semi_implicit(state, cfg)
            norms.append(math.sqrt(float(np.trapezoid(state.p**2,
                                                      dx=grid.spacing))))
        norms = np.array(norms)
        centered = norms - norms.mean()
        crossings[eps] = int(np.count_nonzero(np.diff(np.sign(centered)) != 0))
    assert crossings[0.1] >= 2
    assert crossings[0.1] > crossings[0.2]


def test_init_ill_prepared_defaults(wave):
    grid = Grid(10.0, 101)
    state = init_ill_prepared(None, None, None, grid, epsilon=0.1, wave=wave)
    assert np.array_equal(state.theta, wave_log_temperature(wave, grid))
    assert np.all(state.p == 0.0)
    assert np.all(state.u == 0.0)


def test_init_ill_prepared_requires_background():
    grid = Grid(10.0, 101)
    with pytest.raises(ConfigInvalid):
        init_ill_prepared(None, None, None, grid)


def test_init_ill_prepared_rejects_box_violation():
    grid = Grid(10.0, 101)
    big = np.full(grid.cells, 30.0)
    with pytest.raises(ConfigInvalid, match="box"):
        init_ill_prepared(np.zeros(grid.cells), big, None, grid, epsilon=0.1)


def test_init_ill_prepared_rejects_shape_mismatch():
    grid = Grid(10.0, 101)
    with pytest.raises(ConfigInvalid, match="p_bump"):
        init_ill_prepared(np.zeros(grid.cells), np.zeros(7), None, grid)


def test_decay_condition_constant_power_tail():
    grid = Grid(50.0, 2001)
    x = grid.nodes
    ax = np.maximum(np.abs(x), 1.0)
    theta = np.where(np.abs(x) >= 1.0, ax**-2.0, 1.0)
    c = decay_condition_constant(theta, grid, 0.0, sigma=1.0)
    assert c == pytest.approx(1.0, rel=1e-9)


# ---------------------------------------------------------------------------
# limit equation


def test_limit_constant_is_stationary():
    grid = Grid(10.0, 201)
    theta, u = solve_limit_theta(np.full(grid.cells, 0.7), 1.0, grid, 1.0)
    assert np.max(np.abs(theta - 0.7)) < 1e-13
    assert np.max(np.abs(u)) < 1e-12


def test_limit_max_principle():
    grid = Grid(10.0, 301)
    x = grid.nodes
    theta0 = 0.3 * np.sin(x) * np.exp(-0.1 * x**2)
    theta, _ = solve_limit_theta(theta0, 2.0, grid, 2.0, dt=0.01)
    assert np.max(theta) <= np.max(theta0) + 1e-12
    assert np.min(theta) >= np.min(theta0) - 1e-12


def test_limit_tracks_the_wave(wave):
    """theta = -ln Xi solves the limit equation exactly."""
    grid = Grid(15.0, 501)
    dt = grid.spacing
    theta0 = -np.log(wave_eval(wave, grid.nodes, 0.0).value)
    theta, u = solve_limit_theta(theta0, wave.kappa, grid, 1.0, dt=dt)
    target = -np.log(wave_eval(wave, grid.nodes, 1.0).value)
    scale = (grid.spacing**2 + dt) * np.max(np.abs(theta0))
    assert np.max(np.abs(theta - target)) <= 5.0 * scale
    # recovered velocity matches the Lagrangian background drift shape
    assert np.max(np.abs(u)) > 0.0


def test_limit_validates_inputs():
    grid = Grid(10.0, 101)
    with pytest.raises(ConfigInvalid):
        solve_limit_theta(np.zeros(grid.cells), -1.0, grid, 1.0)
    with pytest.raises(ConfigInvalid):
        solve_limit_theta(np.zeros(5), 1.0, grid, 1.0)
    with pytest.raises(ConfigInvalid):
        solve_limit_theta(np.zeros(grid.cells), 1.0, grid, 1.0, dt=-0.1)
