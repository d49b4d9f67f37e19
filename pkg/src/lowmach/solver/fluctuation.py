"""Semi-implicit stepper for the pressure/temperature fluctuation form.

With P = exp(eps p), T = exp(theta), rho = exp(eps p - theta) and the
shorthand a = exp(-eps p), b = exp(theta), the system reads

    p_t + u p_x + (1/eps) (2u - kappa a b theta_x)_x
        = mu_tilde eps a |u_x|^2 + kappa a b p_x theta_x
    u_t + u u_x + (b/eps) p_x = mu_tilde a b u_xx
    theta_t + u theta_x + u_x = kappa a (b theta_x)_x
        + mu_tilde eps^2 a |u_x|^2

The stiff 1/eps couplings (velocity divergence and heat flux in the p
equation, pressure gradient in the u equation) and both diffusions are
implicit with a, b frozen at the old state; convection is explicit
first-order upwind and the small sources are explicit.  The step is
stable for dt independent of eps.
"""

import numpy as np

from ..errors import ConfigInvalid, SimulationDiverged
from ..grids import Grid
from ..tridiag import solve_block_tridiag
from ..wave import WaveProfile, wave_eval
from .states import BoundaryKind, FluctuationState, SolverConfig

VELOCITY_CEILING = 1e6
LOG_CEILING = 50.0


def limit_velocity(theta, grid: Grid, kappa: float):
    """Constraint velocity u = kappa e^theta theta_x / 2 (central differences)."""
    return 0.5 * kappa * np.exp(theta) * np.gradient(theta, grid.spacing)


def decay_condition_constant(theta, grid: Grid, theta_plus: float,
                             sigma: float = 1.0) -> float:
    """Smallest C with |theta(x) - theta_plus| <= C x^(-1-sigma) on x >= 1.

    Finite for data settling to theta_plus fast enough on the right; used
    to sanity-check that initial temperature fluctuations are admissible
    for the limit identification.
    """
    x = grid.nodes
    mask = x >= 1.0
    if not np.any(mask):
        raise ConfigInvalid("grid does not reach x = 1")
    return float(np.max(np.abs(theta[mask] - theta_plus) * x[mask] ** (1.0 + sigma)))


def wave_log_temperature(wave: WaveProfile, grid: Grid, t: float = 0.0):
    """Background log temperature -ln Xi(x, t) of the Eulerian density wave."""
    return -np.log(wave_eval(wave, grid.nodes, t).value)


def gaussian_bump(grid: Grid, amplitude: float = 1.0, width: float = 1.0,
                  center: float = 0.0):
    """Compact Gaussian grid function used as an O(1) pressure disturbance."""
    if width <= 0.0:
        raise ConfigInvalid("bump width must be positive")
    return amplitude * np.exp(-(((grid.nodes - center) / width) ** 2))


def init_ill_prepared(theta_bg, p_bump, u0, grid: Grid, epsilon: float = 0.1,
                      wave: WaveProfile = None,
                      a_bounds=(0.2, 5.0), b_bounds=(0.2, 5.0)) -> FluctuationState:
    """Fluctuation state (p_bump, u0, theta_bg) at t = 0.

    p_bump and u0 default to zero grid functions; theta_bg defaults to
    -ln Xi(x, 0) when an Eulerian density wave is supplied.  An O(1)
    pressure bump makes the data ill prepared: the constraint
    (2u - kappa a b theta_x)_x = 0 is violated at order one, launching
    acoustic waves of frequency ~1/eps.  The resulting a = e^{-eps p} and
    b = e^theta must lie inside the configured box.
    """
    x = grid.nodes
    if theta_bg is None:
        if wave is None:
            raise ConfigInvalid("theta_bg missing and no background wave given")
        theta_bg = wave_log_temperature(wave, grid)
    theta_bg = np.asarray(theta_bg, dtype=np.float64)
    p = np.zeros_like(x) if p_bump is None else np.asarray(p_bump, dtype=np.float64)
    u = np.zeros_like(x) if u0 is None else np.asarray(u0, dtype=np.float64)
    for name, f in (("theta_bg", theta_bg), ("p_bump", p), ("u0", u)):
        if f.shape != x.shape:
            raise ConfigInvalid(f"{name} has shape {f.shape}, grid has {x.shape}")
    a = np.exp(-epsilon * p)
    b = np.exp(theta_bg)
    if np.min(a) < a_bounds[0] or np.max(a) > a_bounds[1]:
        raise ConfigInvalid(
            f"e^(-eps p) range [{np.min(a):.3g}, {np.max(a):.3g}] "
            f"leaves the box {a_bounds}")
    if np.min(b) < b_bounds[0] or np.max(b) > b_bounds[1]:
        raise ConfigInvalid(
            f"e^theta range [{np.min(b):.3g}, {np.max(b):.3g}] "
            f"leaves the box {b_bounds}")
    return FluctuationState(grid=grid, time=0.0, p=p, u=u, theta=theta_bg)


def _upwind(u, f, dx):
    """First-order upwind u f_x on interior nodes; zeros at the ends."""
    out = np.zeros_like(f)
    back = (f[1:-1] - f[:-2]) / dx
    fwd = (f[2:] - f[1:-1]) / dx
    ui = u[1:-1]
    out[1:-1] = ui * np.where(ui > 0.0, back, fwd)
    return out


def step_fluctuation_semi_implicit(state: FluctuationState, cfg: SolverConfig,
                                   boundary=None) -> FluctuationState:
    """One semi-implicit step; see the module docstring for the splitting."""
    n = state.grid.cells
    dx = state.grid.spacing
    dt = cfg.dt
    eps = cfg.epsilon
    mu, kap = cfg.mu_tilde, cfg.kappa
    t_new = state.time + dt
    p, u, th = state.p, state.u, state.theta

    a = np.exp(-eps * p)
    b = np.exp(th)
    ab = a * b
    abf = 0.5 * (ab[:-1] + ab[1:])
    bf = 0.5 * (b[:-1] + b[1:])

    u_x = np.gradient(u, dx)
    p_x = np.gradient(p, dx)
    th_x = np.gradient(th, dx)
    src_p = mu * eps * a * u_x**2 + kap * ab * p_x * th_x
    src_th = mu * eps**2 * a * u_x**2

    diag = np.zeros((n, 3, 3))
    lower = np.zeros((n - 1, 3, 3))
    upper = np.zeros((n - 1, 3, 3))
    rhs = np.zeros((n, 3))

    i = slice(1, n - 1)
    r_th = dt * kap / (eps * dx**2)
    r_u = dt / (eps * dx)

    # p rows: implicit (2u - kappa a b theta_x)_x / eps
    diag[i, 0, 0] = 1.0
    upper[1:, 0, 1] = r_u
    lower[:-1, 0, 1] = -r_u
    upper[1:, 0, 2] = -r_th * abf[1:]
    lower[:-1, 0, 2] = -r_th * abf[:-1]
    diag[i, 0, 2] = r_th * (abf[1:] + abf[:-1])
    rhs[i, 0] = p[i] - dt * _upwind(u, p, dx)[i] + dt * src_p[i]

    # u rows: implicit (b/eps) p_x and mu a b u_xx
    r_visc = dt * mu * ab[i] / dx**2
    diag[i, 1, 1] = 1.0 + 2.0 * r_visc
    upper[1:, 1, 1] = -r_visc
    lower[:-1, 1, 1] = -r_visc
    gb = dt * b[i] / (2.0 * eps * dx)
    upper[1:, 1, 0] = gb
    lower[:-1, 1, 0] = -gb
    rhs[i, 1] = u[i] - dt * _upwind(u, u, dx)[i]

    # theta rows: implicit divergence and heat conduction
    diag[i, 2, 2] = 1.0 + dt * kap * a[i] * (bf[1:] + bf[:-1]) / dx**2
    upper[1:, 2, 2] = -dt * kap * a[i] * bf[1:] / dx**2
    lower[:-1, 2, 2] = -dt * kap * a[i] * bf[:-1] / dx**2
    upper[1:, 2, 1] = dt / (2.0 * dx)
    lower[:-1, 2, 1] = -dt / (2.0 * dx)
    rhs[i, 2] = th[i] - dt * _upwind(u, th, dx)[i] + dt * src_th[i]

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
            rhs[0], rhs[-1] = boundary(t_new)
        else:
            rhs[0] = (p[0], u[0], th[0])
            rhs[-1] = (p[-1], u[-1], th[-1])

    z = solve_block_tridiag(lower, diag, upper, rhs)
    p_new, u_new, th_new = z[:, 0], z[:, 1], z[:, 2]
    if not np.all(np.isfinite(z)):
        raise SimulationDiverged("non-finite fluctuation state", time=t_new)
    if np.max(np.abs(u_new)) > VELOCITY_CEILING:
        raise SimulationDiverged("velocity magnitude exceeded ceiling", time=t_new)
    if np.max(np.abs(eps * p_new)) > LOG_CEILING or np.max(np.abs(th_new)) > LOG_CEILING:
        raise SimulationDiverged("fluctuations left the admissible box", time=t_new)
    return FluctuationState(state.grid, t_new, p_new, u_new, th_new)
