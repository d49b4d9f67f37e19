"""Norms, fits, creep and defect diagnostics."""

import csv
import math

import numpy as np
import pytest

from lowmach.diagnostics import (
    antiderivatives,
    creep_check,
    diff_norms,
    field_metrics,
    fit_powerlaw,
    fit_rate,
    incompressibility_defect,
    reconstruct_physical,
    write_norm_series,
    write_rate_fits,
)
from lowmach.errors import ConfigInvalid
from lowmach.grids import Grid
from lowmach.profiles import eval_bar
from lowmach.records import Metrics, NormSeries, RateFit
from lowmach.solver import (
    FluctuationState,
    LagrangianState,
    init_well_prepared,
    limit_velocity,
)


def test_field_metrics_on_gaussian():
    grid = Grid(20.0, 4001)
    x = grid.nodes
    amp = 0.7
    f = amp * np.exp(-(x**2))
    m = field_metrics(0.0, ("f",), (f,), grid.spacing)
    expected_l2 = amp * (math.pi / 2.0) ** 0.25
    assert m.get("linf", "f") == pytest.approx(amp)
    assert m.get("l2", "f") == pytest.approx(expected_l2, rel=1e-5)
    # integral of f'^2 is amp^2 sqrt(pi/2) for this Gaussian
    assert m.get("h1_semi", "f") == pytest.approx(expected_l2, rel=1e-3)


def test_diff_norms_zero_iff_exact(ps):
    grid = Grid(20.0, 301)
    state = init_well_prepared(ps, grid)
    m = diff_norms(state, ps, "tilde")
    for comp in ("v", "u", "T"):
        assert m.get("l2", comp) < 1e-14
    state.T = state.T + 1e-3
    m = diff_norms(state, ps, "tilde")
    assert m.get("l2", "T") > 1e-4


def test_diff_norms_velocity_carries_eps_weight(ps):
    grid = Grid(20.0, 301)
    state = init_well_prepared(ps, grid)
    state.u = state.u + 1.0
    m = diff_norms(state, ps, "tilde")
    # a unit velocity offset shows up as eps * sqrt(2 L)
    expected = ps.epsilon * math.sqrt(2.0 * grid.half_length)
    assert m.get("l2", "u") == pytest.approx(expected, rel=1e-6)


def test_diff_norms_rejects_unknown_reference(ps):
    grid = Grid(20.0, 301)
    state = init_well_prepared(ps, grid)
    with pytest.raises(ConfigInvalid):
        diff_norms(state, ps, "hat")


def test_fit_powerlaw_recovers_planted_exponent():
    x = np.geomspace(1.0, 50.0, 12)
    fit = fit_powerlaw(x, 3.0 * x**-1.5)
    assert abs(fit.exponent + 1.5) < 1e-9
    assert abs(fit.log_prefactor - math.log(3.0)) < 1e-9
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_powerlaw_rejects_bad_data():
    with pytest.raises(ConfigInvalid):
        fit_powerlaw([1.0, 2.0], [1.0])
    with pytest.raises(ConfigInvalid):
        fit_powerlaw([1.0, -2.0, 3.0], [1.0, 1.0, 1.0])


def _series_from(pairs, key_name="t"):
    s = NormSeries(label="test", key_name=key_name)
    for key, val in pairs:
        s.append(Metrics(time=key, components=("f",), l2=(val,),
                         linf=(val,), h1_semi=(val,)))
    return s


def test_fit_rate_needs_three_records():
    s = _series_from([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(ConfigInvalid):
        fit_rate(s, "l2_f")


def test_fit_rate_epsilon_axis():
    eps = (0.05, 0.1, 0.2)
    s = _series_from([(e, 7.0 * e**2) for e in eps], key_name="epsilon")
    fit = fit_rate(s, "l2_f", x_axis="epsilon")
    assert abs(fit.exponent - 2.0) < 1e-9


def test_fit_rate_validates_component():
    s = _series_from([(1.0, 1.0), (2.0, 0.5), (3.0, 0.3)])
    with pytest.raises(ConfigInvalid):
        fit_rate(s, "sup_f")


def _state_on_background(ps, grid, t=1.0):
    bar = eval_bar(ps, grid.nodes, t)
    return LagrangianState(grid, t, bar.v.copy(), bar.u.copy(), bar.T.copy())


def test_creep_passes_on_exact_background(ps):
    grid = Grid(20.0, 801)
    state = _state_on_background(ps, grid)
    report = creep_check(state, ps, eta0=1.0, c1=10.0)
    assert report.pass_fraction == 1.0
    assert report.region_points > 0


def test_creep_handles_decreasing_wave():
    from lowmach.profiles import ProfileSet
    from lowmach.wave import solve_wave
    wave = solve_wave(1.2, 1.0, 1.0)
    pse = ProfileSet(wave=wave, mu_tilde=1.0, epsilon=0.1)
    grid = Grid(20.0, 801)
    state = _state_on_background(pse, grid)
    assert creep_check(state, pse, c1=10.0).pass_fraction == 1.0


def test_creep_auto_constant(ps):
    grid = Grid(20.0, 801)
    state = _state_on_background(ps, grid)
    report = creep_check(state, ps, eta0=1.0, c1=None)
    assert report.pass_fraction == 1.0
    assert report.c1_used > 0.0


def test_creep_flat_temperature_rule(ps):
    grid = Grid(20.0, 301)
    n = grid.cells
    resting = LagrangianState(grid, 0.0, np.ones(n), np.zeros(n), np.ones(n))
    assert creep_check(resting, ps, c1=10.0).pass_fraction == 1.0
    drifting = LagrangianState(grid, 0.0, np.ones(n),
                               np.full(n, 1e-3), np.ones(n))
    assert creep_check(drifting, ps, c1=10.0).pass_fraction < 0.5


def test_defect_vanishes_on_limit_manifold(wave):
    grid = Grid(20.0, 801)
    n = grid.cells
    theta = -np.log(np.linspace(1.0, 1.1, n))  # any smooth profile works
    u = limit_velocity(theta, grid, kappa=1.0)
    state = FluctuationState(grid, 0.0, np.zeros(n), u, theta)
    assert incompressibility_defect(state, 1.0, eps=0.1) < 1e-12


def test_defect_sees_constraint_violation():
    grid = Grid(20.0, 801)
    n = grid.cells
    u = np.exp(-grid.nodes**2)
    state = FluctuationState(grid, 0.0, np.zeros(n), u, np.zeros(n))
    assert incompressibility_defect(state, 1.0, eps=0.1) > 1.0


def test_defect_requires_eps_for_fluctuation_states():
    grid = Grid(20.0, 101)
    n = grid.cells
    state = FluctuationState(grid, 0.0, np.zeros(n), np.zeros(n), np.zeros(n))
    with pytest.raises(ConfigInvalid):
        incompressibility_defect(state, 1.0)


def test_defect_small_on_lagrangian_background(ps):
    grid = Grid(20.0, 1601)
    state = _state_on_background(ps, grid, t=0.0)
    # background satisfies 2u = kappa T_x / T up to differencing error
    assert incompressibility_defect(state, ps.kappa) < 1e-3


def test_defect_validates_window(ps):
    grid = Grid(20.0, 101)
    state = _state_on_background(ps, grid)
    with pytest.raises(ConfigInvalid):
        incompressibility_defect(state, 1.0, window=(5.0, -5.0))


def test_reconstruct_fluctuation_identities():
    grid = Grid(10.0, 101)
    rng = np.random.default_rng(3)
    p = rng.uniform(-1.0, 1.0, grid.cells)
    theta = rng.uniform(-0.5, 0.5, grid.cells)
    state = FluctuationState(grid, 0.0, p, np.zeros(grid.cells), theta)
    eps = 0.1
    rho, u, T = reconstruct_physical(state, eps)
    assert np.max(np.abs(rho * T - np.exp(eps * p))) < 1e-14
    assert np.array_equal(T, np.exp(theta))


def test_reconstruct_lagrangian_inverts_volume(ps):
    grid = Grid(10.0, 101)
    state = init_well_prepared(ps, grid)
    rho, u, T = reconstruct_physical(state, 0.1)
    assert np.max(np.abs(rho * state.v - 1.0)) < 1e-15
    assert np.array_equal(T, state.T)


def test_antiderivatives_vanish_on_exact_data(ps):
    grid = Grid(20.0, 801)
    state = init_well_prepared(ps, grid)
    for arr in antiderivatives(state, ps):
        assert np.max(np.abs(arr)) < 1e-12


def test_antiderivative_endpoint_tracks_net_mass(ps):
    grid = Grid(20.0, 1601)
    x = grid.nodes
    state = init_well_prepared(ps, grid)
    # derivative of a Gaussian integrates to zero
    state.v = state.v + np.gradient(np.exp(-(x**2)), grid.spacing)
    Phi, _, _, _ = antiderivatives(state, ps)
    assert abs(Phi[-1]) < 1e-6
    state2 = init_well_prepared(ps, grid)
    state2.v = state2.v + np.exp(-(x**2))
    Phi2, _, _, _ = antiderivatives(state2, ps)
    assert Phi2[-1] == pytest.approx(math.sqrt(math.pi), rel=1e-6)


def test_write_norm_series_round_trip(tmp_path):
    s = _series_from([(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)])
    path = tmp_path / "norms.csv"
    write_norm_series(s, path)
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["t", "l2_f", "linf_f", "h1_f"]
    assert [float(v) for v in rows[1]] == [0.0, 1.0, 1.0, 1.0]
    assert len(rows) == 4


def test_write_norm_series_rejects_empty(tmp_path):
    with pytest.raises(ConfigInvalid):
        write_norm_series(NormSeries(label="empty"), tmp_path / "x.csv")


def test_write_rate_fits_format(tmp_path):
    path = tmp_path / "rates.csv"
    write_rate_fits({"decay": RateFit(-1.5, 0.3, 0.999)}, path)
    with open(path) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["label", "exponent", "log_prefactor", "r_squared"]
    assert rows[1][0] == "decay"
    assert float(rows[1][1]) == -1.5
