"""Steppers for the Lagrangian form of the slightly compressible system.

    v_t - u_x = 0
    u_t + P_x / eps^2 = mu_tilde (u_x / v)_x,          P = T / v
    (T + |eps u|^2 / 2)_t + (P u)_x
        = kappa (T_x / v)_x + eps^2 mu_tilde (u u_x / v)_x

on a collocated uniform grid with central face fluxes.  The explicit
stepper is written in conservative flux form, so sums of v and of total
energy change only through the two boundary faces (up to rounding).  The
semi-implicit stepper treats the acoustic pressure coupling and both
diffusions implicitly with coefficients frozen at the old state, which
keeps the step stable for dt independent of eps (asymptotic-preserving);
the O(eps^2) viscous work stays explicit.
"""

import numpy as np

from ..errors import CFLViolation, ConfigInvalid, SimulationDiverged
from ..grids import Grid
from ..profiles import Frame, ProfileSet, eval_tilde
from ..tridiag import solve_block_tridiag
from .states import BoundaryKind, LagrangianState, SolverConfig

VELOCITY_CEILING = 1e6


def init_well_prepared(ps: ProfileSet, grid: Grid, t0: float = 0.0,
                       noise_amplitude: float = 0.0, rng=None) -> LagrangianState:
    """Sample the corrected profile as initial data, optionally perturbed.

    The perturbation is a sum of four random Gaussian bumps applied to the
    temperature, smooth and compactly concentrated so the far field stays
    exact.  Pass a seeded numpy Generator for reproducibility.
    """
    if ps.frame is not Frame.LAGRANGIAN:
        raise ConfigInvalid("well-prepared data lives in the Lagrangian frame")
    x = grid.nodes
    til = eval_tilde(ps, x, t0)
    v, u, T = til.v.copy(), til.u.copy(), til.T.copy()
    if noise_amplitude < 0.0:
        raise ConfigInvalid("noise_amplitude must be non-negative")
    if noise_amplitude > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        for _ in range(4):
            c = rng.uniform(-1.0, 1.0) * noise_amplitude
            x0 = rng.uniform(-3.0, 3.0)
            T = T + c * np.exp(-((x - x0) ** 2))
    return LagrangianState(grid=grid, time=t0, v=v, u=u, T=T)


def make_profile_boundary(ps: ProfileSet, grid: Grid):
    """Dirichlet boundary values following the corrected profile in time."""
    if ps.frame is not Frame.LAGRANGIAN:
        raise ConfigInvalid("profile boundary requires the Lagrangian frame")
    ends = np.array([-grid.half_length, grid.half_length])

    def boundary(t):
        f = eval_tilde(ps, ends, t)
        return (f.v[0], f.u[0], f.T[0]), (f.v[1], f.u[1], f.T[1])

    return boundary


def cfl_bound(state: LagrangianState, cfg: SolverConfig) -> float:
    """Stable explicit step: min of the acoustic and diffusive limits.

    The acoustic speed in mass coordinates is sqrt(2 T) / v, amplified by
    1/eps through the pressure gradient; the diffusive limit comes from
    the larger of mu_tilde/v and kappa/v.
    """
    dx = state.grid.spacing
    speed = np.sqrt(2.0 * state.T) / (state.v * cfg.epsilon)
    acoustic = dx / np.max(speed)
    diffusive = 0.5 * dx * dx * np.min(state.v) / max(cfg.mu_tilde, cfg.kappa)
    return cfg.cfl_safety * min(acoustic, diffusive)


def _face_mean(f):
    return 0.5 * (f[:-1] + f[1:])


def lagrangian_fluxes(state: LagrangianState, cfg: SolverConfig):
    """Face fluxes of the conservative explicit update.

    Returns (mass_flux, momentum_flux, energy_flux) on the n-1 faces; the
    mass flux is -u averaged to faces (v_t - u_x = 0), so the update is
    v_i += dt * (mass convention: -(F_{i+1/2} - F_{i-1/2}) / dx).
    """
    dx = state.grid.spacing
    v, u, T = state.v, state.u, state.T
    P = T / v
    vf = _face_mean(v)
    uf = _face_mean(u)
    Pf = _face_mean(P)
    du = (u[1:] - u[:-1]) / dx
    dT = (T[1:] - T[:-1]) / dx
    mass = -uf
    mom = Pf / cfg.epsilon**2 - cfg.mu_tilde * du / vf
    en = Pf * uf - cfg.kappa * dT / vf \
        - cfg.epsilon**2 * cfg.mu_tilde * uf * du / vf
    return mass, mom, en


def _apply_dirichlet(arrs, values):
    (vl, ul, Tl), (vr, ur, Tr) = values
    v, u, T = arrs
    v[0], u[0], T[0] = vl, ul, Tl
    v[-1], u[-1], T[-1] = vr, ur, Tr


def _postcheck(v, u, T, t):
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(u)) and np.all(np.isfinite(T))):
        raise SimulationDiverged("non-finite state", time=t)
    if np.min(v) <= 0.0 or np.min(T) <= 0.0:
        raise SimulationDiverged("specific volume or temperature lost positivity", time=t)
    if np.max(np.abs(u)) > VELOCITY_CEILING:
        raise SimulationDiverged("velocity magnitude exceeded ceiling", time=t)


def step_lagrangian_explicit(state: LagrangianState, cfg: SolverConfig,
                             boundary=None) -> LagrangianState:
    """One forward Euler step in conservative flux form.

    Raises CFLViolation when cfg.dt exceeds the stability bound, and
    SimulationDiverged when the update leaves the admissible set.
    """
    bound = cfl_bound(state, cfg)
    if cfg.dt > bound:
        raise CFLViolation(
            f"dt {cfg.dt:g} exceeds stable bound {bound:g}", dt=cfg.dt, bound=bound
        )
    dx = state.grid.spacing
    dt = cfg.dt
    eps2 = cfg.epsilon**2
    t_new = state.time + dt

    if cfg.bc is BoundaryKind.HOMOGENEOUS_NEUMANN:
        vv = np.pad(state.v, 1, mode="edge")
        uu = np.pad(state.u, 1, mode="edge")
        TT = np.pad(state.T, 1, mode="edge")
        padded = LagrangianState(Grid(state.grid.half_length + dx, state.grid.cells + 2),
                                 state.time, vv, uu, TT)
        mass, mom, en = lagrangian_fluxes(padded, cfg)
        E = state.T + 0.5 * eps2 * state.u**2
        v = state.v - dt * (mass[1:] - mass[:-1]) / dx
        u = state.u - dt * (mom[1:] - mom[:-1]) / dx
        E = E - dt * (en[1:] - en[:-1]) / dx
        T = E - 0.5 * eps2 * u**2
    else:
        mass, mom, en = lagrangian_fluxes(state, cfg)
        v = state.v.copy()
        u = state.u.copy()
        E = state.T + 0.5 * eps2 * state.u**2
        v[1:-1] -= dt * (mass[1:] - mass[:-1]) / dx
        u[1:-1] -= dt * (mom[1:] - mom[:-1]) / dx
        E[1:-1] -= dt * (en[1:] - en[:-1]) / dx
        T = E - 0.5 * eps2 * u**2
        if boundary is not None:
            _apply_dirichlet((v, u, T), boundary(t_new))
        else:
            T[0] = state.T[0]
            T[-1] = state.T[-1]
    _postcheck(v, u, T, t_new)
    return LagrangianState(state.grid, t_new, v, u, T)


def step_lagrangian_semi_implicit(state: LagrangianState, cfg: SolverConfig,
                                  boundary=None) -> LagrangianState:
    """One backward Euler step with frozen coefficients.

    Pressure coupling, viscosity and heat conduction act on the new state;
    the nonlinear coefficients 1/v, P/v and the face volumes come from the
    old state, and the pressure and kinetic energy are linearized about
    it.  Unconditionally stable in the acoustic CFL sense, so dt may be
    chosen from accuracy alone even for very small eps.
    """
    n = state.grid.cells
    dx = state.grid.spacing
    dt = cfg.dt
    eps2 = cfg.epsilon**2
    mu, kap = cfg.mu_tilde, cfg.kappa
    t_new = state.time + dt
    v, u, T = state.v, state.u, state.T
    P = T / v
    vf = _face_mean(v)
    Pf = _face_mean(P)
    uf = _face_mean(u)

    diag = np.zeros((n, 3, 3))
    lower = np.zeros((n - 1, 3, 3))
    upper = np.zeros((n - 1, 3, 3))
    rhs = np.zeros((n, 3))

    inv_vf = 1.0 / vf
    # coefficients per interior row i = 1..n-2
    cfr = inv_vf[1:]      # 1/v at face i+1/2
    cfl = inv_vf[:-1]     # 1/v at face i-1/2
    r_mu = dt * mu / dx**2
    r_kap = dt * kap / dx**2
    g = dt / (2.0 * eps2 * dx)

    i = slice(1, n - 1)
    ip = slice(2, n)
    im = slice(0, n - 2)

    # volume rows
    diag[i, 0, 0] = 1.0
    upper[1:, 0, 1] = -dt / (2.0 * dx)
    lower[:-1, 0, 1] = dt / (2.0 * dx)
    rhs[i, 0] = v[i]

    # velocity rows
    diag[i, 1, 1] = 1.0 + r_mu * (cfr + cfl)
    upper[1:, 1, 1] = -r_mu * cfr
    lower[:-1, 1, 1] = -r_mu * cfl
    upper[1:, 1, 2] = g / v[ip]
    lower[:-1, 1, 2] = -g / v[im]
    upper[1:, 1, 0] = -g * P[ip] / v[ip]
    lower[:-1, 1, 0] = g * P[im] / v[im]
    rhs[i, 1] = u[i] - g * (P[ip] - P[im])

    # energy rows (total energy linearized about the old velocity)
    diag[i, 2, 2] = 1.0 + r_kap * (cfr + cfl)
    upper[1:, 2, 2] = -r_kap * cfr
    lower[:-1, 2, 2] = -r_kap * cfl
    Pfr = Pf[1:]
    Pfl = Pf[:-1]
    diag[i, 2, 1] = eps2 * u[i] + dt * (Pfr - Pfl) / (2.0 * dx)
    upper[1:, 2, 1] = dt * Pfr / (2.0 * dx)
    lower[:-1, 2, 1] = -dt * Pfl / (2.0 * dx)
    du_face = (u[1:] - u[:-1]) / dx
    wvisc = (uf[1:] * du_face[1:] * inv_vf[1:]
             - uf[:-1] * du_face[:-1] * inv_vf[:-1]) / dx
    rhs[i, 2] = T[i] + eps2 * u[i] ** 2 + dt * eps2 * mu * wvisc

    if cfg.bc is BoundaryKind.HOMOGENEOUS_NEUMANN:
        diag[0] = np.eye(3)
        upper[0] = -np.eye(3)
        rhs[0] = 0.0
        diag[-1] = np.eye(3)
        lower[-1] = -np.eye(3)
        rhs[-1] = 0.0
    else:
        diag[0] = np.eye(3)
        upper[0] = 0.0
        diag[-1] = np.eye(3)
        lower[-1] = 0.0
        if boundary is not None:
            (vl, ul, Tl), (vr, ur, Tr) = boundary(t_new)
        else:
            vl, ul, Tl = v[0], u[0], T[0]
            vr, ur, Tr = v[-1], u[-1], T[-1]
        rhs[0] = (vl, ul, Tl)
        rhs[-1] = (vr, ur, Tr)

    z = solve_block_tridiag(lower, diag, upper, rhs)
    v_new, u_new, T_new = z[:, 0], z[:, 1], z[:, 2]
    _postcheck(v_new, u_new, T_new, t_new)
    return LagrangianState(state.grid, t_new, v_new, u_new, T_new)
