"""Self-similar profile of the nonlinear diffusion equation.

The equation rho_t = (kappa * rho_x / (2 rho))_x admits wave solutions
connecting two positive far-field states.  In the similarity variable
eta = x / sqrt(1 + t) the profile Xi(eta) satisfies the two-point problem

    (kappa * Xi' / (2 Xi))' + (eta / 2) Xi' = 0,
    Xi(-inf) = left,  Xi(+inf) = right,

and has Gaussian tails, so a finite window [-H, H] with moderate H is
enough.  `solve_wave` discretizes the problem in flux form and runs a
damped Newton iteration; `relaxation_oracle` produces the same profile by
a completely different route (time integration of the parabolic equation
plus renormalization in eta) and exists to cross-check the solver.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigInvalid, SimulationDiverged, SolveFailed
from .tridiag import solve_tridiag

__all__ = [
    "WaveSolveOptions",
    "WaveProfile",
    "WaveSample",
    "solve_wave",
    "wave_eval",
    "wave_curvature",
    "relaxation_oracle",
    "dump_profile",
    "load_profile",
]


@dataclass(frozen=True)
class WaveSolveOptions:
    half_width: float = 12.0
    nodes: int = 4001
    newton_tol: float = 1e-12
    max_iters: int = 50
    tail_tol: float = 1e-8

    def __post_init__(self):
        if self.half_width <= 0.0:
            raise ConfigInvalid(f"half_width must be positive, got {self.half_width}")
        if self.nodes < 64:
            raise ConfigInvalid(f"need at least 64 nodes, got {self.nodes}")
        if self.newton_tol <= 0.0 or self.tail_tol <= 0.0:
            raise ConfigInvalid("tolerances must be positive")
        if self.max_iters < 1:
            raise ConfigInvalid("max_iters must be at least 1")


@dataclass(frozen=True)
class WaveSample:
    """Profile value and space/time derivatives at requested points."""

    value: np.ndarray
    dx: np.ndarray
    dt: np.ndarray


@dataclass(frozen=True)
class WaveProfile:
    """Converged similarity profile on a uniform eta grid.

    Immutable; monotone cubic interpolants for off-node evaluation are
    built once at construction.
    """

    eta_grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    left_state: float
    right_state: float
    kappa: float
    half_width: float

    def __post_init__(self):
        object.__setattr__(self, "_value_interp", PchipInterpolator(self.eta_grid, self.values))
        object.__setattr__(self, "_deriv_interp", PchipInterpolator(self.eta_grid, self.derivs))

    @property
    def delta(self) -> float:
        return abs(self.right_state - self.left_state)

    def eval_eta(self, eta):
        """Values and eta-derivative at arbitrary eta, clamped outside [-H, H]."""
        eta = np.asarray(eta, dtype=np.float64)
        clipped = np.clip(eta, -self.half_width, self.half_width)
        val = self._value_interp(clipped)
        der = self._deriv_interp(clipped)
        outside = np.abs(eta) > self.half_width
        if np.any(outside):
            val = np.where(eta < -self.half_width, self.left_state, val)
            val = np.where(eta > self.half_width, self.right_state, val)
            der = np.where(outside, 0.0, der)
        return val, der


def _ode_residual(xi, eta, h, kappa):
    """Cell flux-balance residual of the similarity equation, interior nodes.

    This is h^2 times the raw finite-difference operator; posing Newton on
    the flux balance keeps the rounding floor of the residual near machine
    epsilon instead of epsilon/h^2, so tight tolerances stay meaningful.
    """
    flux = kappa * (xi[1:] - xi[:-1]) / (xi[:-1] + xi[1:])
    conv = eta[1:-1] * h * (xi[2:] - xi[:-2]) / 4.0
    return (flux[1:] - flux[:-1]) + conv


def _ode_jacobian_bands(xi, eta, h, kappa):
    """Tridiagonal Jacobian of `_ode_residual` w.r.t. interior unknowns."""
    den = (xi[:-1] + xi[1:]) ** 2
    dflux_dl = -2.0 * kappa * xi[1:] / den   # d flux_{i+1/2} / d xi_i
    dflux_dr = 2.0 * kappa * xi[:-1] / den   # d flux_{i+1/2} / d xi_{i+1}
    eta_in = eta[1:-1]
    diag = dflux_dl[1:] - dflux_dr[:-1]
    lower = -dflux_dl[1:-1] - eta_in[1:] * h / 4.0
    upper = dflux_dr[1:-1] + eta_in[:-1] * h / 4.0
    return lower, diag, upper


def solve_wave(left: float, right: float, kappa: float,
               opts: WaveSolveOptions = WaveSolveOptions()) -> WaveProfile:
    """Solve the similarity two-point problem by damped Newton iteration.

    newton_tol bounds the max-norm of the cell flux-balance residual.
    Raises ConfigInvalid for non-positive states or kappa, SolveFailed
    when the iteration stalls or the tails have not settled within
    opts.tail_tol (increase half_width in that case).
    """
    for name, val in (("left", left), ("right", right), ("kappa", kappa)):
        if not np.isfinite(val) or val <= 0.0:
            raise ConfigInvalid(f"{name} must be a positive finite number, got {val}")

    eta = np.linspace(-opts.half_width, opts.half_width, opts.nodes)
    h = eta[1] - eta[0]

    if left == right:
        values = np.full(opts.nodes, float(left))
        derivs = np.zeros(opts.nodes)
        return WaveProfile(eta, values, derivs, float(left), float(right),
                           float(kappa), float(opts.half_width))

    xi = left + (right - left) * 0.5 * (1.0 + np.tanh(eta))
    xi[0] = left
    xi[-1] = right

    res = _ode_residual(xi, eta, h, kappa)
    res_norm = float(np.max(np.abs(res)))
    converged = res_norm <= opts.newton_tol
    for _ in range(opts.max_iters):
        if converged:
            break
        lower, diag, upper = _ode_jacobian_bands(xi, eta, h, kappa)
        delta = solve_tridiag(lower, diag, upper, -res)
        lam = 1.0
        accepted = False
        for _ in range(30):
            cand = xi.copy()
            cand[1:-1] += lam * delta
            if np.min(cand) > 0.0:
                cand_res = _ode_residual(cand, eta, h, kappa)
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_norm <= (1.0 - 1e-4 * lam) * res_norm or cand_norm <= opts.newton_tol:
                    xi, res, res_norm = cand, cand_res, cand_norm
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise SolveFailed(
                f"line search stalled at residual {res_norm:.3e} (tol {opts.newton_tol:g})"
            )
        converged = res_norm <= opts.newton_tol
    if not converged:
        raise SolveFailed(
            f"Newton did not reach tol {opts.newton_tol:g} in {opts.max_iters} "
            f"iterations (residual {res_norm:.3e})"
        )

    derivs = PchipInterpolator(eta, xi).derivative()(eta)
    scale = max(1.0, abs(right - left))
    tail_err = max(abs(xi[0] - left), abs(xi[-1] - right),
                   abs(derivs[0]), abs(derivs[-1]))
    if tail_err > opts.tail_tol * scale:
        raise SolveFailed(
            f"tails not settled: deviation {tail_err:.3e} exceeds "
            f"{opts.tail_tol:g}; increase half_width"
        )
    return WaveProfile(eta, xi, derivs, float(left), float(right),
                       float(kappa), float(opts.half_width))


def wave_eval(profile: WaveProfile, x, t: float) -> WaveSample:
    """Evaluate rho(x, t) = Xi(x / sqrt(1+t)) and its x/t derivatives.

    Accepts scalar or array x.  Outside the stored window the profile is
    clamped to the far-field states with zero derivatives.
    """
    if t < 0.0:
        raise ConfigInvalid(f"time must be non-negative, got {t}")
    scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    s = math.sqrt(1.0 + t)
    eta = np.asarray(x, dtype=np.float64) / s
    val, der = profile.eval_eta(eta)
    dx = der / s
    dt = -eta * der / (2.0 * (1.0 + t))
    if scalar:
        return WaveSample(float(val), float(dx), float(dt))
    return WaveSample(val, dx, dt)


def wave_curvature(profile: WaveProfile, x, t: float):
    """Second x-derivative of the wave, via the similarity equation.

    The equation gives Xi'' = Xi'^2 / Xi - eta Xi Xi' / kappa exactly, so
    no numerical second differencing is needed; rho_xx = Xi'' / (1 + t).
    """
    if t < 0.0:
        raise ConfigInvalid(f"time must be non-negative, got {t}")
    s = math.sqrt(1.0 + t)
    eta = np.asarray(x, dtype=np.float64) / s
    val, der = profile.eval_eta(eta)
    xi_pp = der**2 / val - eta * val * der / profile.kappa
    out = xi_pp / (1.0 + t)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out)
    return out


def _parabolic_rhs(rho, dx, kappa):
    """(kappa rho_x / (2 rho))_x in conservative face form, zero at endpoints."""
    flux = kappa * (rho[1:] - rho[:-1]) / (dx * (rho[:-1] + rho[1:]))
    out = np.zeros_like(rho)
    out[1:-1] = (flux[1:] - flux[:-1]) / dx
    return out


def _cn_step(rho, dx, dt, kappa, scale):
    """One Crank-Nicolson step with an inner Newton iteration."""
    rhs_old = _parabolic_rhs(rho, dx, kappa)
    y = rho.copy()
    for _ in range(20):
        h_res = y - rho - 0.5 * dt * (_parabolic_rhs(y, dx, kappa) + rhs_old)
        h_res[0] = 0.0
        h_res[-1] = 0.0
        if np.max(np.abs(h_res)) <= 1e-13 * scale:
            return y
        den = (y[:-1] + y[1:]) ** 2
        dflux_dl = -2.0 * kappa * y[1:] / (dx * den)
        dflux_dr = 2.0 * kappa * y[:-1] / (dx * den)
        n = y.shape[0]
        diag = np.ones(n)
        lower = np.zeros(n - 1)
        upper = np.zeros(n - 1)
        diag[1:-1] = 1.0 - 0.5 * dt * (dflux_dl[1:] - dflux_dr[:-1]) / dx
        lower[:-1] = 0.5 * dt * dflux_dl[:-1] / dx
        upper[1:] = -0.5 * dt * dflux_dr[1:] / dx
        y = y + solve_tridiag(lower, diag, upper, -h_res)
        if not np.all(np.isfinite(y)) or np.min(y) <= 0.0:
            raise SimulationDiverged("relaxation step lost positivity")
    raise SolveFailed("inner Newton of the relaxation step did not converge")


def relaxation_oracle(left: float, right: float, kappa: float,
                      t_relax: float = 100.0, n: int = 8001, L: float = 200.0,
                      cycles: int = 4, step_ratio: float = 0.005):
    """Wave profile by relaxation, independent of the Newton solver.

    Integrates the parabolic equation from a smoothed step with
    Crank-Nicolson and a geometrically growing step dt = step_ratio*(1+t),
    then resamples the result in eta = x / sqrt(1 + t_relax) back onto the
    original grid and repeats.  Each cycle contracts the slow shift and
    time-offset modes of the self-similar family by ~1/sqrt(1+t_relax),
    so a handful of cycles lands on the similarity profile itself rather
    than on a shifted/retarded member of the family.

    Returns (eta_grid, values) as plain arrays.
    """
    for name, val in (("left", left), ("right", right), ("kappa", kappa)):
        if not np.isfinite(val) or val <= 0.0:
            raise ConfigInvalid(f"{name} must be a positive finite number, got {val}")
    if t_relax <= 0.0 or L <= 0.0 or n < 64 or cycles < 1 or step_ratio <= 0.0:
        raise ConfigInvalid("relaxation parameters out of range")

    x = np.linspace(-L, L, n)
    dx = x[1] - x[0]
    rho = left + (right - left) * 0.5 * (1.0 + np.tanh(x))
    rho[0] = left
    rho[-1] = right
    if left == right:
        return x, rho

    scale = max(abs(left), abs(right))
    stretch = math.sqrt(1.0 + t_relax)
    for _ in range(cycles):
        t = 0.0
        while t < t_relax - 1e-12 * t_relax:
            dt = min(step_ratio * (1.0 + t), t_relax - t)
            rho = _cn_step(rho, dx, dt, kappa, scale)
            t += dt
        interp = PchipInterpolator(x, rho)
        stretched = x * stretch
        rho = np.asarray(interp(np.clip(stretched, -L, L)))
        rho[stretched < -L] = left
        rho[stretched > L] = right
        rho[0] = left
        rho[-1] = right
    return x, rho


def dump_profile(profile: WaveProfile, path):
    """Write a profile as commented header plus `eta value deriv` rows."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# diffusive wave profile\n")
        f.write(f"# left = {profile.left_state:.17g}\n")
        f.write(f"# right = {profile.right_state:.17g}\n")
        f.write(f"# kappa = {profile.kappa:.17g}\n")
        f.write(f"# half_width = {profile.half_width:.17g}\n")
        f.write(f"# nodes = {len(profile.eta_grid)}\n")
        for e, v, d in zip(profile.eta_grid, profile.values, profile.derivs):
            f.write(f"{e:.17g} {v:.17g} {d:.17g}\n")


def load_profile(path) -> WaveProfile:
    """Read back a profile written by `dump_profile`."""
    header = {}
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, val = line[1:].partition("=")
                    header[key.strip()] = val.strip()
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigInvalid(f"malformed profile row: {line!r}")
            rows.append([float(p) for p in parts])
    required = ("left", "right", "kappa", "half_width", "nodes")
    for key in required:
        if key not in header:
            raise ConfigInvalid(f"profile file missing header field {key!r}")
    data = np.array(rows)
    if data.shape[0] != int(header["nodes"]):
        raise ConfigInvalid(
            f"profile file announces {header['nodes']} nodes but has {data.shape[0]} rows"
        )
    return WaveProfile(
        eta_grid=data[:, 0],
        values=data[:, 1],
        derivs=data[:, 2],
        left_state=float(header["left"]),
        right_state=float(header["right"]),
        kappa=float(header["kappa"]),
        half_width=float(header["half_width"]),
    )
