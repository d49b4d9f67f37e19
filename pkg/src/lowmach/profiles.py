"""Background flow profiles built on the diffusive wave, and their residuals.

A converged wave profile induces approximate solutions of the slightly
compressible equations in two frames:

- Lagrangian (mass coordinate): v_bar = T_bar = That, u_bar = kappa *
  That_x / (2 That), with That(x,t) the wave evaluated at (x,t).
- Eulerian: rho_bar = Xi, u_bar = -kappa Xi_x / (2 Xi^2), T_bar = 1/Xi.

The corrected ("tilde") profile subtracts the kinetic energy from the
temperature, T_tilde = T_bar - |eps u_bar|^2 / 2, which makes the defect
of the momentum and energy equations exactly the derivatives of the two
residual fields r1, r2 returned by `eval_residuals`.  Both residuals are
O(delta eps^2) with Gaussian tails; r1 decays like (1+t)^-1 and r2 like
(1+t)^-3/2.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigInvalid, NonPositiveState
from .records import Metrics, NormSeries
from .wave import WaveProfile, wave_curvature, wave_eval

__all__ = [
    "Frame",
    "FlowTriple",
    "ResidualPair",
    "ProfileSet",
    "eval_bar",
    "eval_tilde",
    "eval_residuals",
    "eval_pi",
    "residual_decay_report",
    "dump_fields",
]


class Frame(str, Enum):
    LAGRANGIAN = "lagrangian"
    EULERIAN = "eulerian"


@dataclass(frozen=True)
class FlowTriple:
    """(v, u, T) fields; v holds specific volume in the Lagrangian frame
    and density in the Eulerian frame."""

    v: np.ndarray
    u: np.ndarray
    T: np.ndarray


@dataclass(frozen=True)
class ResidualPair:
    r1: np.ndarray
    r2: np.ndarray


@dataclass(frozen=True)
class ProfileSet:
    wave: WaveProfile
    mu_tilde: float
    epsilon: float
    frame: Frame = Frame.LAGRANGIAN
    kappa: float = None

    def __post_init__(self):
        if self.kappa is None:
            object.__setattr__(self, "kappa", self.wave.kappa)
        elif self.kappa != self.wave.kappa:
            raise ConfigInvalid(
                f"kappa {self.kappa} disagrees with the wave profile's {self.wave.kappa}"
            )
        if self.mu_tilde <= 0.0:
            raise ConfigInvalid(f"mu_tilde must be positive, got {self.mu_tilde}")
        if self.epsilon <= 0.0:
            raise ConfigInvalid(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "frame", Frame(self.frame))


def eval_bar(ps: ProfileSet, x, t: float) -> FlowTriple:
    """Background profile at (x, t); accepts scalar or array x."""
    s = wave_eval(ps.wave, x, t)
    if ps.frame is Frame.LAGRANGIAN:
        u = ps.kappa * s.dx / (2.0 * s.value)
        return FlowTriple(v=s.value, u=u, T=s.value)
    u = -ps.kappa * s.dx / (2.0 * s.value**2)
    return FlowTriple(v=s.value, u=u, T=1.0 / s.value)


def eval_tilde(ps: ProfileSet, x, t: float) -> FlowTriple:
    """Corrected profile: temperature lowered by the kinetic energy."""
    bar = eval_bar(ps, x, t)
    T = bar.T - 0.5 * (ps.epsilon * bar.u) ** 2
    if np.any(np.asarray(T) <= 0.0):
        raise NonPositiveState("corrected temperature is non-positive; epsilon too large")
    return FlowTriple(v=bar.v, u=bar.u, T=T)


def eval_residuals(ps: ProfileSet, x, t: float) -> ResidualPair:
    """Defect fields of the corrected profile (Lagrangian frame only).

    r1 enters the momentum equation through r1_x and r2 the energy
    equation through r2_x.  All derivatives are evaluated analytically:
    the second derivative of the wave comes from its own equation, so the
    residuals carry no differencing noise.
    """
    if ps.frame is not Frame.LAGRANGIAN:
        raise ConfigInvalid("residual fields are defined in the Lagrangian frame")
    s = wave_eval(ps.wave, x, t)
    That = s.value
    That_x = s.dx
    That_t = s.dt
    That_xx = wave_curvature(ps.wave, x, t)
    kap, mu, eps = ps.kappa, ps.mu_tilde, ps.epsilon
    u = kap * That_x / (2.0 * That)
    u_x = kap * (That_xx * That - That_x**2) / (2.0 * That**2)
    e2 = eps * eps
    r1 = e2 * (kap * That_t / (2.0 * That) - u**2 / (2.0 * That) - mu * u_x / That)
    r2 = e2 * ((kap / That) * u * u_x - u**3 / (2.0 * That) - mu * u * u_x / That)
    return ResidualPair(r1=r1, r2=r2)


def eval_pi(ps: ProfileSet, x, t: float):
    """Second-order pressure correction of the limit system.

    Lagrangian: pi = mu_tilde u_bar_x / That - (kappa/2) That_t / That.
    Eulerian:   pi = mu_tilde u_bar_x - rho_bar u_bar^2
                     + (kappa/2) rho_bar_t / rho_bar.
    Normalized to vanish at infinity.
    """
    s = wave_eval(ps.wave, x, t)
    xx = wave_curvature(ps.wave, x, t)
    kap, mu = ps.kappa, ps.mu_tilde
    if ps.frame is Frame.LAGRANGIAN:
        u_x = kap * (xx * s.value - s.dx**2) / (2.0 * s.value**2)
        return mu * u_x / s.value - 0.5 * kap * s.dt / s.value
    rho = s.value
    u = -kap * s.dx / (2.0 * rho**2)
    u_x = -kap * (xx * rho - 2.0 * s.dx**2) / (2.0 * rho**3)
    return mu * u_x - rho * u**2 + 0.5 * kap * s.dt / rho


def residual_decay_report(ps: ProfileSet, times, eta_window: float = 8.0,
                          samples: int = 801) -> NormSeries:
    """Residual norms on a fixed eta window followed along the wave.

    For each time the window |eta| <= eta_window is mapped to x =
    eta*sqrt(1+t), so the same part of the wave is sampled throughout;
    sup norms then decay like (1+t)^-1 for r1 and (1+t)^-3/2 for r2.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or len(times) < 2:
        raise ConfigInvalid("need at least two report times")
    if np.any(np.diff(times) <= 0.0) or times[0] < 0.0:
        raise ConfigInvalid("report times must be non-negative and strictly increasing")
    if eta_window <= 0.0 or samples < 16:
        raise ConfigInvalid("bad residual report window")
    eta = np.linspace(-eta_window, eta_window, samples)
    series = NormSeries(label="residual_decay", key_name="t")
    for t in times:
        x = eta * math.sqrt(1.0 + t)
        dx = x[1] - x[0]
        pair = eval_residuals(ps, x, t)
        l2 = tuple(math.sqrt(np.trapezoid(f**2, dx=dx)) for f in (pair.r1, pair.r2))
        linf = tuple(float(np.max(np.abs(f))) for f in (pair.r1, pair.r2))
        h1 = tuple(
            math.sqrt(np.sum(np.diff(f) ** 2 / dx)) for f in (pair.r1, pair.r2)
        )
        series.append(Metrics(time=float(t), components=("r1", "r2"),
                              l2=l2, linf=linf, h1_semi=h1))
    return series


def dump_fields(ps: ProfileSet, x, t: float, path):
    """CSV of background and corrected profiles plus residuals at one time."""
    x = np.asarray(x, dtype=np.float64)
    bar = eval_bar(ps, x, t)
    til = eval_tilde(ps, x, t)
    res = eval_residuals(ps, x, t)
    cols = [x, bar.v, bar.u, bar.T, til.v, til.u, til.T, res.r1, res.r2]
    names = ["x", "v_bar", "u_bar", "T_bar", "v_tilde", "u_tilde", "T_tilde", "r1", "r2"]
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# time={t:.17g}\n")
        f.write(f"# epsilon={ps.epsilon:.17g}\n")
        f.write(f"# kappa={ps.kappa:.17g}\n")
        f.write(f"# mu_tilde={ps.mu_tilde:.17g}\n")
        f.write(f"# frame={ps.frame.value}\n")
        f.write(",".join(names) + "\n")
        for row in zip(*cols):
            f.write(",".join(f"{val:.17g}" for val in row) + "\n")
