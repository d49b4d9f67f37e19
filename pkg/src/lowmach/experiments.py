"""Experiment drivers: wire configs to the solvers, persist results, judge checks.

Each named check produces one CheckResult with the measured value, the
threshold it was judged against and the config key that requested it.
Numerical failures are folded into the report as failed checks rather
than raised, so a report is always produced.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig, ExperimentKind, config_echo
from .diagnostics import (
    creep_check,
    diff_norms,
    fit_powerlaw,
    fit_rate,
    incompressibility_defect,
    write_norm_series,
    write_rate_fits,
)
from .errors import CFLViolation, LowmachError, SimulationDiverged
from .grids import Grid
from .io import write_snapshot
from .profiles import (Frame, ProfileSet, eval_residuals,
                       residual_decay_report)
from .records import Metrics, NormSeries
from .solver import (
    SolverConfig,
    cfl_bound,
    gaussian_bump,
    init_ill_prepared,
    init_well_prepared,
    lagrangian_fluxes,
    limit_velocity,
    make_profile_boundary,
    run,
    solve_limit_theta,
    step_fluctuation_semi_implicit,
    step_lagrangian_explicit,
    step_lagrangian_semi_implicit,
    wave_log_temperature,
)
from .solver.states import Scheme
from .wave import WaveSolveOptions, dump_profile, relaxation_oracle, solve_wave

__all__ = ["CheckResult", "Report", "run_experiment"]


@dataclass
class CheckResult:
    name: str
    config_key: str
    passed: bool
    measured: object
    threshold: object
    relation: str = "<="
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = (f"{status} {self.name}: measured={_fmt(self.measured)} "
               f"required {self.relation} {_fmt(self.threshold)} "
               f"[{self.config_key}]")
        if self.detail:
            out += f" ({self.detail})"
        return out


@dataclass
class Report:
    config: dict
    files: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        return [c.line() for c in self.checks]

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("# config\n")
            f.write(json.dumps(self.config, indent=2, sort_keys=True) + "\n")
            f.write("# files\n")
            for name in self.files:
                f.write(f"{name}\n")
            f.write("# checks\n")
            for line in self.lines():
                f.write(line + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v)
                             for v in row) + "\n")


def _wave_options(cfg: ExperimentConfig) -> WaveSolveOptions:
    w = cfg.wave
    return WaveSolveOptions(half_width=w.half_width, nodes=w.nodes,
                            newton_tol=w.newton_tol, max_iters=w.max_iters,
                            tail_tol=w.tail_tol)


def _build_wave(cfg: ExperimentConfig):
    return solve_wave(cfg.physical.left, cfg.physical.right,
                      cfg.physical.kappa, _wave_options(cfg))


def _profile_set(cfg: ExperimentConfig, eps: float,
                 frame: Frame = Frame.LAGRANGIAN, wave=None) -> ProfileSet:
    if wave is None:
        wave = _build_wave(cfg)
    return ProfileSet(wave=wave, mu_tilde=cfg.physical.mu_tilde,
                      epsilon=eps, frame=frame)


def _grid(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg.numerical.resolved_half_length(), cfg.numerical.cells)


def _solver_config(cfg: ExperimentConfig, eps: float, **overrides) -> SolverConfig:
    num = cfg.numerical
    kwargs = dict(epsilon=eps, mu_tilde=cfg.physical.mu_tilde,
                  kappa=cfg.physical.kappa, dt=num.dt, scheme=num.scheme,
                  bc=num.bc, end_time=num.end_time,
                  snapshot_times=num.snapshot_times, cfl_safety=num.cfl_safety)
    kwargs.update(overrides)
    return SolverConfig(**kwargs)


def _window_l2(f, grid: Grid, window) -> float:
    lo, hi = window
    mask = (grid.nodes >= lo) & (grid.nodes <= hi)
    return math.sqrt(float(np.trapezoid(f[mask] ** 2, dx=grid.spacing)))


def _sweep_workers() -> int:
    raw = os.environ.get("LOWMACH_THREADS", "")
    if raw.strip():
        try:
            cap = int(raw)
        except ValueError:
            cap = 1
        return max(1, cap)
    return max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# simulation drivers


def well_prepared_series(cfg: ExperimentConfig, eps: float, outdir=None, wave=None):
    """One well-prepared run; returns (tilde_series, bar_series, ps, traj, files).

    tilde_series holds norms of (v - v~, eps(u - u~), T - T~); bar_series
    the same against the uncorrected background.  Snapshot files are
    written when outdir is given.
    """
    ps = _profile_set(cfg, eps, Frame.LAGRANGIAN, wave)
    grid = _grid(cfg)
    rng = np.random.default_rng(cfg.seed)
    state = init_well_prepared(ps, grid, noise_amplitude=cfg.noise_amplitude,
                               rng=rng)
    boundary = make_profile_boundary(ps, grid)
    scfg = _solver_config(cfg, eps)
    traj = run(state, scfg, boundary=boundary, raise_on_divergence=False)

    tag = f"eps{eps:g}"
    tilde = NormSeries(label=f"well_prepared_{tag}")
    bar = NormSeries(label=f"background_gap_{tag}")
    files = []
    for snap in traj.snapshots:
        if tilde.records and snap.time <= tilde.records[-1].time:
            continue
        tilde.append(diff_norms(snap, ps, "tilde"))
        bar.append(diff_norms(snap, ps, "bar"))
        if outdir is not None:
            name = f"snapshot_{tag}_t{snap.time:g}.txt"
            write_snapshot(snap, os.path.join(outdir, name), epsilon=eps)
            files.append(name)
    if outdir is not None and tilde.records:
        name = f"norms_{tag}.csv"
        write_norm_series(tilde, os.path.join(outdir, name))
        files.append(name)
    return tilde, bar, ps, traj, files


def ill_prepared_run(cfg: ExperimentConfig, eps: float, outdir=None, wave=None):
    """One ill-prepared run with per-step windowed diagnostics.

    Accumulates ||p||_{L2(window)} and the incompressibility defect at
    every step boundary, integrates both in time by the trapezoid rule,
    and measures the gap to the limit temperature at the final time.
    """
    if wave is None:
        wave = _build_wave(cfg)
    grid = _grid(cfg)
    theta_bg = wave_log_temperature(wave, grid)
    p0 = gaussian_bump(grid, cfg.ill.bump_amplitude, cfg.ill.bump_width,
                       cfg.ill.bump_center)
    u0 = limit_velocity(theta_bg, grid, cfg.physical.kappa) \
        if cfg.ill.velocity == "limit" else None
    state = init_ill_prepared(theta_bg, p0, u0, grid, epsilon=eps)
    scfg = _solver_config(cfg, eps, scheme=Scheme.SEMI_IMPLICIT)
    window = cfg.ill.window
    kappa = cfg.physical.kappa

    total = max(0, math.ceil(scfg.end_time / scfg.dt - 1e-9))
    snap_due = {}
    for s in scfg.snapshot_times:
        k = min(total, max(0, math.ceil(s / scfg.dt - 1e-9)))
        snap_due[k] = True

    times, p_norms, defects = [], [], []
    a_lo = b_lo = math.inf
    a_hi = b_hi = -math.inf
    tag = f"eps{eps:g}"
    files = []
    diverged = False
    for k in range(total + 1):
        times.append(state.time)
        p_norms.append(_window_l2(state.p, grid, window))
        defects.append(incompressibility_defect(state, kappa, eps=eps,
                                                window=window))
        a = np.exp(-eps * state.p)
        b = np.exp(state.theta)
        a_lo, a_hi = min(a_lo, float(np.min(a))), max(a_hi, float(np.max(a)))
        b_lo, b_hi = min(b_lo, float(np.min(b))), max(b_hi, float(np.max(b)))
        if outdir is not None and snap_due.get(k):
            name = f"fluct_snapshot_{tag}_t{state.time:g}.txt"
            write_snapshot(state, os.path.join(outdir, name), epsilon=eps)
            files.append(name)
        if k == total:
            break
        try:
            state = step_fluctuation_semi_implicit(state, scfg)
        except SimulationDiverged:
            diverged = True
            break

    times = np.asarray(times)
    p_norms = np.asarray(p_norms)
    defects = np.asarray(defects)
    int_p2 = float(np.trapezoid(p_norms**2, times)) if len(times) > 1 else 0.0
    int_defect = float(np.trapezoid(defects, times)) if len(times) > 1 else 0.0

    theta_bar, _ = solve_limit_theta(theta_bg, kappa, grid, scfg.end_time,
                                     dt=scfg.dt)
    theta_gap = _window_l2(state.theta - theta_bar, grid, window)

    if outdir is not None:
        name = f"fluct_series_{tag}.csv"
        _write_csv(os.path.join(outdir, name), ("t", "p_l2_window", "defect"),
                   zip(times.tolist(), p_norms.tolist(), defects.tolist()))
        files.append(name)

    return {
        "eps": eps,
        "int_p2": int_p2,
        "int_defect": int_defect,
        "theta_gap": theta_gap,
        "a_range": (a_lo, a_hi),
        "b_range": (b_lo, b_hi),
        "times": times,
        "p_norms": p_norms,
        "defects": defects,
        "diverged": diverged,
        "final": state,
    }, files


def _sweep_well_worker(args):
    cfg, eps = args
    outdir = cfg.output_dir
    tilde, bar, ps, traj, files = well_prepared_series(cfg, eps, outdir)
    sup = -math.inf
    for m in bar.records:
        if m.time >= 1.0 - 1e-9:
            sup = max(sup, math.sqrt(1.0 + m.time) * m.get("linf", "T"))
    if not math.isfinite(sup) and bar.records:
        m = bar.records[-1]
        sup = math.sqrt(1.0 + m.time) * m.get("linf", "T")
    return eps, {"sup_weighted_T": sup, "diverged": traj.diverged}, files


def _sweep_ill_worker(args):
    cfg, eps = args
    scalars, files = ill_prepared_run(cfg, eps, cfg.output_dir)
    keep = {k: scalars[k] for k in ("int_p2", "int_defect", "theta_gap",
                                    "diverged")}
    return eps, keep, files


def sweep_runs(cfg: ExperimentConfig, target: ExperimentKind):
    """Run one simulation per sweep epsilon, concurrently when allowed.

    Results are merged by descending epsilon regardless of completion
    order, so the output is independent of scheduling.
    """
    eps_values = cfg.sweep if cfg.sweep else (0.2, 0.1, 0.05)
    worker = _sweep_well_worker if target is ExperimentKind.WELL_PREPARED \
        else _sweep_ill_worker
    jobs = [(cfg, eps) for eps in eps_values]
    workers = min(_sweep_workers(), len(jobs))
    results = {}
    files = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for eps, payload, extra in pool.map(worker, jobs):
                results[eps] = payload
                files.extend(extra)
    else:
        for job in jobs:
            eps, payload, extra = worker(job)
            results[eps] = payload
            files.extend(extra)
    ordered = sorted(results.items(), key=lambda kv: -kv[0])
    return ordered, files


# ---------------------------------------------------------------------------
# named checks


def _check_wave_oracle(cfg, outdir, art):
    """Constructed profile against the brute-force relaxed field."""
    prof = art.get("wave") or _build_wave(cfg)
    eta, vals = relaxation_oracle(cfg.physical.left, cfg.physical.right,
                                  cfg.physical.kappa, t_relax=100.0,
                                  n=8001, L=200.0)
    solved, _ = prof.eval_eta(eta)
    measured = float(np.max(np.abs(solved - vals)))
    files = []
    if outdir is not None:
        name = "wave_oracle.csv"
        _write_csv(os.path.join(outdir, name), ("eta", "solved", "relaxed"),
                   zip(eta.tolist(), solved.tolist(), vals.tolist()))
        files.append(name)
    thr = cfg.threshold("wave_oracle")
    return CheckResult("wave_oracle", "", measured <= thr, measured, thr), files


def _check_tail_fit(cfg, outdir, art):
    """Gaussian tails: slope of ln|Xi'| vs eta^2 matches -state/(2 kappa)."""
    prof = art.get("wave") or _build_wave(cfg)
    if prof.delta == 0.0:
        return CheckResult("tail_fit", "", False, "zero wave strength",
                           cfg.threshold("tail_fit"),
                           detail="tails undefined for a constant profile"), []
    eta = prof.eta_grid
    rows = []
    worst = 0.0
    r2_min = 1.0
    for label, sign, state in (("left", -1.0, prof.left_state),
                               ("right", 1.0, prof.right_state)):
        mask = (sign * eta >= 3.0) & (sign * eta <= 6.0) & (np.abs(prof.derivs) > 0)
        y = np.log(np.abs(prof.derivs[mask]))
        slope, icept = np.polyfit(eta[mask] ** 2, y, 1)
        resid = y - (slope * eta[mask] ** 2 + icept)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot else 1.0
        expected = -state / (2.0 * prof.kappa)
        rows.append((label, float(slope), float(expected), float(r2)))
        worst = max(worst, abs(slope / expected - 1.0))
        r2_min = min(r2_min, r2)
    files = []
    if outdir is not None:
        name = "tail_fit.csv"
        _write_csv(os.path.join(outdir, name),
                   ("side", "slope", "expected", "r_squared"), rows)
        files.append(name)
    thr = cfg.threshold("tail_fit")
    passed = worst <= thr and r2_min >= 0.99
    detail = "; ".join(f"{lab}: slope={s:.4f} expected={e:.4f} r2={r:.4f}"
                       for lab, s, e, r in rows)
    return CheckResult("tail_fit", "", passed, worst, thr, detail=detail), files


def _check_residual_rates(cfg, outdir, art):
    """Decay exponents of the correction residuals in time and in epsilon.

    sup|r1| ~ (1+t)^-1 and sup|r2| ~ (1+t)^-3/2 at fixed eps; both scale
    like eps^2 at fixed t.  measured is the worst exponent deviation, with
    the epsilon deviations weighted 1.5x so a single threshold covers the
    tighter epsilon tolerance.
    """
    wave = art.get("wave") or _build_wave(cfg)
    times = np.geomspace(1.0, 100.0, 13)
    ps = _profile_set(cfg, cfg.epsilon, Frame.LAGRANGIAN, wave)
    series = residual_decay_report(ps, times)
    fit_r1 = fit_rate(series, "linf_r1")
    fit_r2 = fit_rate(series, "linf_r2")

    eps_values = sorted(cfg.sweep if cfg.sweep else (0.2, 0.1, 0.05))
    eps_series = NormSeries(label="residual_eps", key_name="epsilon")
    x = np.linspace(-8.0, 8.0, 801) * math.sqrt(2.0)
    for eps in eps_values:
        pse = _profile_set(cfg, eps, Frame.LAGRANGIAN, wave)
        pair = eval_residuals(pse, x, 1.0)
        eps_series.append(Metrics(
            time=eps, components=("r1", "r2"),
            l2=(0.0, 0.0),
            linf=tuple(float(np.max(np.abs(f))) for f in (pair.r1, pair.r2)),
            h1_semi=(0.0, 0.0)))
    fit_e1 = fit_rate(eps_series, "linf_r1", x_axis="epsilon")
    fit_e2 = fit_rate(eps_series, "linf_r2", x_axis="epsilon")

    fits = {"t_r1": fit_r1, "t_r2": fit_r2,
            "eps_r1": fit_e1, "eps_r2": fit_e2}
    files = []
    if outdir is not None:
        write_norm_series(series, os.path.join(outdir, "residual_decay.csv"))
        write_rate_fits(fits, os.path.join(outdir, "residual_rates.csv"))
        files += ["residual_decay.csv", "residual_rates.csv"]
    measured = max(abs(fit_r1.exponent + 1.0), abs(fit_r2.exponent + 1.5),
                   1.5 * abs(fit_e1.exponent - 2.0),
                   1.5 * abs(fit_e2.exponent - 2.0))
    thr = cfg.threshold("residual_rates")
    detail = (f"t: r1={fit_r1.exponent:.3f} r2={fit_r2.exponent:.3f}; "
              f"eps: r1={fit_e1.exponent:.3f} r2={fit_e2.exponent:.3f}")
    return CheckResult("residual_rates", "", measured <= thr, measured, thr,
                       detail=detail), files


def _check_conservation(cfg, outdir, art):
    """Per-step drift of total volume and energy beyond boundary fluxes."""
    wave = art.get("wave") or _build_wave(cfg)
    eps = cfg.epsilon
    ps = _profile_set(cfg, eps, Frame.LAGRANGIAN, wave)
    grid = _grid(cfg)
    state = init_well_prepared(ps, grid)
    probe = _solver_config(cfg, eps, scheme=Scheme.EXPLICIT, dt=1e-12)
    dt = 0.5 * cfl_bound(state, probe)
    scfg = _solver_config(cfg, eps, scheme=Scheme.EXPLICIT, dt=dt,
                          end_time=cfg.numerical.end_time)
    dx = grid.spacing
    steps = 1000
    worst = 0.0
    for _ in range(steps):
        mass_f, _, en_f = lagrangian_fluxes(state, scfg)
        mass0 = float(np.sum(state.v)) * dx
        en0 = float(np.sum(state.T + 0.5 * eps**2 * state.u**2)) * dx
        state = step_lagrangian_explicit(state, scfg)
        mass1 = float(np.sum(state.v)) * dx
        en1 = float(np.sum(state.T + 0.5 * eps**2 * state.u**2)) * dx
        drift_m = abs(mass1 - mass0 + dt * (mass_f[-1] - mass_f[0])) / abs(mass0)
        drift_e = abs(en1 - en0 + dt * (en_f[-1] - en_f[0])) / abs(en0)
        worst = max(worst, drift_m, drift_e)
    thr = cfg.threshold("conservation")
    detail = f"{steps} explicit steps, dt={dt:.3g}"
    return CheckResult("conservation", "", worst <= thr, worst, thr,
                       detail=detail), []


def _check_ap_stability(cfg, outdir, art):
    """Stiff regime: semi-implicit marches 1e4 steps at dt >> acoustic CFL."""
    wave = art.get("wave") or _build_wave(cfg)
    eps = 1e-3
    ps = _profile_set(cfg, eps, Frame.LAGRANGIAN, wave)
    grid = _grid(cfg)
    state = init_well_prepared(ps, grid)
    boundary = make_profile_boundary(ps, grid)
    dt = 0.1 * grid.spacing
    steps = 10_000
    scfg = _solver_config(cfg, eps, dt=dt, scheme=Scheme.SEMI_IMPLICIT,
                          end_time=steps * dt)
    sup_u = 0.0
    diverged = False
    for _ in range(steps):
        try:
            state = step_lagrangian_semi_implicit(state, scfg, boundary=boundary)
        except SimulationDiverged:
            diverged = True
            break
        sup_u = max(sup_u, float(np.max(np.abs(state.u))))

    explicit_cfg = _solver_config(cfg, eps, dt=dt, scheme=Scheme.EXPLICIT,
                                  end_time=steps * dt)
    explicit_state = init_well_prepared(ps, grid)
    explicit_raised = False
    try:
        for _ in range(steps):
            explicit_state = step_lagrangian_explicit(explicit_state,
                                                      explicit_cfg)
    except (CFLViolation, SimulationDiverged) as exc:
        explicit_raised = True
        explicit_kind = type(exc).__name__

    thr = cfg.threshold("ap_stability")
    passed = (not diverged) and sup_u <= thr and explicit_raised
    detail = (f"semi-implicit sup|u|={sup_u:.3g} over {steps} steps at "
              f"eps={eps:g}, dt={dt:.3g}; explicit "
              + (f"raised {explicit_kind}" if explicit_raised else "survived"))
    return CheckResult("ap_stability", "", passed, sup_u, thr,
                       detail=detail), []


def _check_limit_tracking(cfg, outdir, art):
    """Limit heat solve from the wave's log temperature tracks the wave."""
    wave = art.get("wave") or _build_wave(cfg)
    grid = _grid(cfg)
    kappa = cfg.physical.kappa
    dt = cfg.numerical.dt
    t_end = cfg.numerical.end_time if cfg.numerical.end_time > 0 else 1.0
    theta_in = wave_log_temperature(wave, grid, 0.0)
    theta, u_bar = solve_limit_theta(theta_in, kappa, grid, t_end, dt=dt)
    theta_exact = wave_log_temperature(wave, grid, t_end)
    scale = float(np.max(np.abs(theta_in)))
    if scale == 0.0:
        scale = 1.0
    err = float(np.max(np.abs(theta - theta_exact)))
    measured = err / ((grid.spacing**2 + dt) * scale)
    files = []
    if outdir is not None:
        name = "limit_theta.csv"
        _write_csv(os.path.join(outdir, name),
                   ("x", "theta", "u_bar", "theta_wave"),
                   zip(grid.nodes.tolist(), theta.tolist(), u_bar.tolist(),
                       theta_exact.tolist()))
        files.append(name)
    thr = cfg.threshold("limit_tracking")
    detail = f"max error {err:.3g} at t={t_end:g}, dx={grid.spacing:.3g}, dt={dt:g}"
    return CheckResult("limit_tracking", "", measured <= thr, measured, thr,
                       detail=detail), files


def _decay_shape_result(cfg, tilde: NormSeries, diverged: bool) -> CheckResult:
    thr = cfg.threshold("decay_shape")
    if diverged:
        return CheckResult("decay_shape", "", False, "diverged", thr)
    late = [(m.time, sum(x * x for x in m.l2)) for m in tilde.records
            if m.time >= 1.0 - 1e-9]
    if len(late) < 2:
        return CheckResult("decay_shape", "", False,
                           "needs two snapshots at t >= 1", thr)
    measured = 0.0
    running = math.inf
    for t, sq in late:
        q = sq * (1.0 + t) ** 0.8
        running = min(running, q)
        measured = max(measured, q / running)
    detail = f"{len(late)} snapshots in t >= 1"
    return CheckResult("decay_shape", "", measured <= thr, measured, thr,
                       detail=detail)


def _check_decay_shape(cfg, outdir, art):
    """Weighted perturbation energy decays like (1+t)^-1 up to a sawtooth.

    The squared L2 norm of (v - v~, eps(u - u~), T - T~) times
    (1+t)^(1-0.2) must be non-increasing after t = 1 within the threshold
    factor.
    """
    tilde = art.get("tilde_series")
    traj = art.get("traj")
    files = []
    if tilde is None:
        tilde, _, _, traj, files = well_prepared_series(cfg, cfg.epsilon, outdir)
    return _decay_shape_result(cfg, tilde, traj.diverged), files


def _check_creep(cfg, outdir, art):
    """Velocity comparable to the temperature slope in the wave core."""
    ps = art.get("ps")
    traj = art.get("traj")
    files = []
    if traj is None:
        _, _, ps, traj, files = well_prepared_series(cfg, cfg.epsilon, outdir)
    thr = cfg.threshold("creep")
    if traj.diverged:
        return CheckResult("creep", "", False, "diverged", thr,
                           relation=">="), files
    seen = set()
    fractions = []
    details = []
    for snap in traj.snapshots:
        if snap.time in seen:
            continue
        seen.add(snap.time)
        rep = creep_check(snap, ps, eta0=1.0, c1=10.0)
        fractions.append(rep.pass_fraction)
        details.append(f"t={snap.time:g}: {rep.pass_fraction:.4f}")
    measured = min(fractions)
    return CheckResult("creep", "", measured >= thr, measured, thr,
                       relation=">=", detail="; ".join(details)), files


def _check_eps_rate(cfg, outdir, art):
    """Fitted epsilon-exponent of sup_t (1+t)^(1/2) ||T - T_bar||_inf."""
    ordered = art.get("sweep_well")
    files = []
    if ordered is None:
        ordered, files = sweep_runs(cfg, ExperimentKind.WELL_PREPARED)
    thr = cfg.threshold("eps_rate")
    bad = [f"eps={eps:g}" for eps, payload in ordered if payload["diverged"]]
    if bad:
        return CheckResult("eps_rate", "", False,
                           "diverged: " + ", ".join(bad), thr,
                           relation=">="), files
    series = NormSeries(label="sweep_sup", key_name="epsilon")
    rows = []
    for eps, payload in sorted(ordered, key=lambda kv: kv[0]):
        val = payload["sup_weighted_T"]
        series.append(Metrics(time=eps, components=("T",), l2=(val,),
                              linf=(val,), h1_semi=(float("nan"),)))
        rows.append((eps, val))
    fit = fit_rate(series, "linf_T", x_axis="epsilon")
    if outdir is not None:
        _write_csv(os.path.join(outdir, "sweep_sup.csv"),
                   ("epsilon", "sup_weighted_linf_T"), rows)
        write_rate_fits({"eps_T": fit}, os.path.join(outdir, "rates.csv"))
        files += ["sweep_sup.csv", "rates.csv"]
    passed = fit.exponent >= thr and fit.r_squared >= 0.95
    detail = f"r2={fit.r_squared:.4f}; values=" + ", ".join(
        f"{eps:g}:{val:.3g}" for eps, val in rows)
    return CheckResult("eps_rate", "", passed, fit.exponent, thr,
                       relation=">=", detail=detail), files


def _check_ill_trends(cfg, outdir, art):
    """Acoustic energy, constraint defect and limit gap all shrink with eps."""
    ordered = art.get("sweep_ill")
    files = []
    if ordered is None:
        ordered, files = sweep_runs(cfg, ExperimentKind.ILL_PREPARED)
    thr = cfg.threshold("ill_trends")
    bad = [f"eps={eps:g}" for eps, payload in ordered if payload["diverged"]]
    if bad:
        return CheckResult("ill_trends", "", False,
                           "diverged: " + ", ".join(bad), thr), files
    rows = [(eps, payload["int_p2"], payload["int_defect"],
             payload["theta_gap"]) for eps, payload in ordered]
    if outdir is not None:
        _write_csv(os.path.join(outdir, "ill_sweep.csv"),
                   ("epsilon", "int_p2_window", "int_defect", "theta_gap"),
                   rows)
        files.append("ill_sweep.csv")
    measured = 0.0
    for prev, cur in zip(rows, rows[1:]):
        for j in (1, 2, 3):
            measured = max(measured, cur[j] / prev[j])
    detail = "; ".join(f"eps={r[0]:g}: p2={r[1]:.3g} defect={r[2]:.3g} "
                       f"gap={r[3]:.3g}" for r in rows)
    return CheckResult("ill_trends", "", measured < thr, measured, thr,
                       relation="<", detail=detail), files


def _check_p_oscillation(cfg, outdir, art):
    """Acoustic ringing frequency grows like 1/eps on a closed box.

    Runs a unit bump twice on a short reflecting domain and counts
    mean-crossings of the ||p|| time series; halving eps must raise the
    count by at least the threshold factor while the amplitude stays
    bounded by its initial value.
    """
    if len(cfg.sweep) >= 2:
        eps_big, eps_small = cfg.sweep[0], cfg.sweep[-1]
    else:
        eps_big, eps_small = 2.0 * cfg.epsilon, cfg.epsilon
    grid = Grid(5.0, 501)
    dt, t_end = 0.002, 3.0
    counts = {}
    amps = {}
    for eps in (eps_big, eps_small):
        p0 = gaussian_bump(grid, cfg.ill.bump_amplitude, cfg.ill.bump_width,
                           cfg.ill.bump_center)
        state = init_ill_prepared(np.zeros(grid.cells), p0, None, grid,
                                  epsilon=eps)
        scfg = SolverConfig(epsilon=eps, mu_tilde=cfg.physical.mu_tilde,
                            kappa=cfg.physical.kappa, dt=dt,
                            scheme=Scheme.SEMI_IMPLICIT, end_time=t_end)
        norms = [_window_l2(state.p, grid, (-5.0, 5.0))]
        for _ in range(int(round(t_end / dt))):
            state = step_fluctuation_semi_implicit(state, scfg)
            norms.append(_window_l2(state.p, grid, (-5.0, 5.0)))
        norms = np.asarray(norms)
        centered = norms - norms.mean()
        signs = np.sign(centered[np.abs(centered) > 1e-12])
        counts[eps] = int(np.count_nonzero(signs[1:] != signs[:-1]))
        amps[eps] = float(norms.max() / norms[0])
    thr = cfg.threshold("p_oscillation")
    measured = counts[eps_small] / max(counts[eps_big], 1)
    amp_ok = max(amps.values()) <= 2.0
    passed = measured >= thr and counts[eps_big] >= 2 and amp_ok
    detail = (f"crossings: eps={eps_big:g}:{counts[eps_big]}, "
              f"eps={eps_small:g}:{counts[eps_small]}; "
              f"amplitude ratios {amps[eps_big]:.2f}, {amps[eps_small]:.2f}")
    return CheckResult("p_oscillation", "", passed, measured, thr,
                       relation=">=", detail=detail), []


def _check_box(cfg, outdir, art):
    """a = e^(-eps p) and b = e^theta stay inside the admissible box."""
    scalars = art.get("ill")
    files = []
    if scalars is None:
        scalars, files = ill_prepared_run(cfg, cfg.epsilon, outdir)
    thr = cfg.threshold("box")
    a_lo, a_hi = scalars["a_range"]
    b_lo, b_hi = scalars["b_range"]
    box_lo, box_hi = 0.2, 5.0
    measured = max(a_hi / box_hi, box_lo / a_lo, b_hi / box_hi, box_lo / b_lo)
    passed = measured <= thr and not scalars["diverged"]
    detail = (f"a in [{a_lo:.3g}, {a_hi:.3g}], b in [{b_lo:.3g}, {b_hi:.3g}], "
              f"box [{box_lo:g}, {box_hi:g}]")
    return CheckResult("box", "", passed, measured, thr, detail=detail), files


_CHECKS = {
    "wave_oracle": _check_wave_oracle,
    "tail_fit": _check_tail_fit,
    "residual_rates": _check_residual_rates,
    "conservation": _check_conservation,
    "ap_stability": _check_ap_stability,
    "limit_tracking": _check_limit_tracking,
    "decay_shape": _check_decay_shape,
    "creep": _check_creep,
    "eps_rate": _check_eps_rate,
    "ill_trends": _check_ill_trends,
    "p_oscillation": _check_p_oscillation,
    "box": _check_box,
}


# ---------------------------------------------------------------------------
# experiment dispatch


def _prepare_artifacts(cfg: ExperimentConfig, outdir) -> tuple:
    """Kind-specific simulation pass; returns (artifacts, files)."""
    art = {}
    files = []
    if cfg.kind is ExperimentKind.WAVE:
        art["wave"] = _build_wave(cfg)
        dump_profile(art["wave"], os.path.join(outdir, "wave_profile.txt"))
        files.append("wave_profile.txt")
    elif cfg.kind is ExperimentKind.WELL_PREPARED:
        art["wave"] = _build_wave(cfg)
        tilde, bar, ps, traj, extra = well_prepared_series(
            cfg, cfg.epsilon, outdir, art["wave"])
        art.update(tilde_series=tilde, bar_series=bar, ps=ps, traj=traj)
        files.extend(extra)
    elif cfg.kind is ExperimentKind.ILL_PREPARED:
        art["wave"] = _build_wave(cfg)
        scalars, extra = ill_prepared_run(cfg, cfg.epsilon, outdir,
                                          art["wave"])
        art["ill"] = scalars
        files.extend(extra)
    elif cfg.kind is ExperimentKind.SWEEP:
        ordered, extra = sweep_runs(cfg, cfg.target)
        key = "sweep_well" if cfg.target is ExperimentKind.WELL_PREPARED \
            else "sweep_ill"
        art[key] = ordered
        files.extend(extra)
    elif cfg.kind is ExperimentKind.LIMIT_HEAT:
        art["wave"] = _build_wave(cfg)
    return art, files


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Dispatch a config: simulate, write artifacts, judge every check once."""
    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    report = Report(config=config_echo(cfg))

    art = {}
    prep_error = None
    try:
        art, files = _prepare_artifacts(cfg, outdir)
        report.files.extend(files)
    except (LowmachError, FloatingPointError) as exc:
        prep_error = f"{type(exc).__name__}: {exc}"

    for i, name in enumerate(cfg.checks):
        key = f"checks[{i}]"
        if prep_error is not None:
            result = CheckResult(name, key, False, f"error: {prep_error}",
                                 cfg.threshold(name))
        else:
            try:
                result, extra = _CHECKS[name](cfg, outdir, art)
                result.config_key = key
                report.files.extend(extra)
            except (LowmachError, FloatingPointError) as exc:
                result = CheckResult(name, key, False,
                                     f"error: {type(exc).__name__}: {exc}",
                                     cfg.threshold(name))
        report.checks.append(result)

    report.write(os.path.join(outdir, "report.txt"))
    report.files.append("report.txt")
    return report
