"""Norms, decay fits and structural checks for simulation output."""

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigInvalid
from .profiles import Frame, ProfileSet, eval_bar, eval_tilde
from .records import CreepReport, Metrics, NormSeries, RateFit
from .solver.states import FluctuationState, LagrangianState

__all__ = [
    "field_metrics",
    "diff_norms",
    "antiderivatives",
    "fit_powerlaw",
    "fit_rate",
    "creep_check",
    "incompressibility_defect",
    "reconstruct_physical",
    "write_norm_series",
    "write_rate_fits",
]


def field_metrics(time: float, components, fields, spacing: float) -> Metrics:
    """Discrete L2, sup and H1 seminorm of each field.

    L2 by the trapezoid rule; the H1 seminorm uses forward differences
    with the boundary pair excluded.
    """
    l2, linf, h1 = [], [], []
    for f in fields:
        f = np.asarray(f, dtype=np.float64)
        l2.append(math.sqrt(float(np.trapezoid(f * f, dx=spacing))))
        linf.append(float(np.max(np.abs(f))) if f.size else 0.0)
        d = np.diff(f[1:-1]) / spacing
        h1.append(math.sqrt(spacing * float(np.sum(d * d))))
    return Metrics(time=time, components=tuple(components),
                   l2=tuple(l2), linf=tuple(linf), h1_semi=tuple(h1))


def diff_norms(state: LagrangianState, ps: ProfileSet, which: str = "tilde") -> Metrics:
    """Norms of (v - v*, eps(u - u*), T - T*) against the bar or tilde profile.

    The velocity difference carries the eps weight used throughout the
    energy estimates.  Components are labeled ("v", "u", "T").
    """
    if not isinstance(state, LagrangianState):
        raise ConfigInvalid("diff_norms compares Lagrangian states")
    if ps.frame is not Frame.LAGRANGIAN:
        raise ConfigInvalid("profile set must be Lagrangian")
    if which == "bar":
        ref = eval_bar(ps, state.grid.nodes, state.time)
    elif which == "tilde":
        ref = eval_tilde(ps, state.grid.nodes, state.time)
    else:
        raise ConfigInvalid(f"unknown reference {which!r}; use 'bar' or 'tilde'")
    fields = (state.v - ref.v,
              ps.epsilon * (state.u - ref.u),
              state.T - ref.T)
    return field_metrics(state.time, ("v", "u", "T"), fields, state.grid.spacing)


def antiderivatives(state: LagrangianState, ps: ProfileSet, eps: float = None):
    """Antiderivatives (Phi, Psi, Wtilde, W) of the perturbation fields.

    phi = v - v~, psi = eps(u - u~), and the energy perturbation
    omega = (T + |eps u|^2/2) - (T~ + |eps u~|^2/2) are integrated from
    the left end; W = Wtilde - eps u~ Psi removes the transport part.
    """
    if eps is None:
        eps = ps.epsilon
    x = state.grid.nodes
    ref = eval_tilde(ps, x, state.time)
    phi = state.v - ref.v
    psi = eps * (state.u - ref.u)
    omega = (state.T + 0.5 * (eps * state.u) ** 2
             - ref.T - 0.5 * (eps * ref.u) ** 2)
    Phi = cumulative_trapezoid(phi, x, initial=0.0)
    Psi = cumulative_trapezoid(psi, x, initial=0.0)
    Wtilde = cumulative_trapezoid(omega, x, initial=0.0)
    W = Wtilde - eps * ref.u * Psi
    return Phi, Psi, Wtilde, W


def fit_powerlaw(x, y) -> RateFit:
    """Least squares fit of y ~ exp(c) * x^m in log-log variables."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ConfigInvalid("power-law fit needs two same-length 1D samples")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ConfigInvalid("power-law fit requires positive data")
    lx, ly = np.log(x), np.log(y)
    m, c = np.polyfit(lx, ly, 1)
    resid = ly - (m * lx + c)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(exponent=float(m), log_prefactor=float(c), r_squared=r2)


def fit_rate(series: NormSeries, component: str, x_axis: str = "one_plus_t") -> RateFit:
    """Power-law fit of one series column.

    `component` joins the norm kind and the field label as in the CSV
    columns, e.g. "l2_v" or "linf_r1".  x_axis "one_plus_t" fits against
    1 + key (decay in time); "epsilon" fits against the key itself (the
    series key then holds epsilon values).
    """
    if len(series.records) < 3:
        raise ConfigInvalid("rate fit needs at least 3 records")
    kind, _, comp = component.partition("_")
    if kind not in ("l2", "linf", "h1") or not comp:
        raise ConfigInvalid(f"bad component {component!r}; use e.g. 'l2_v'")
    kind = {"h1": "h1_semi"}.get(kind, kind)
    y = series.column(kind, comp)
    keys = series.keys
    if x_axis == "one_plus_t":
        x = 1.0 + keys
    elif x_axis == "epsilon":
        x = keys
    else:
        raise ConfigInvalid(f"unknown x_axis {x_axis!r}")
    return fit_powerlaw(x, y)


def creep_check(state: LagrangianState, ps: ProfileSet, eta0: float = 1.0,
                c1: float = 10.0) -> CreepReport:
    """Check comparability of velocity and temperature slope in the core.

    On |x| <= eta0 sqrt(1+t) the wave region has u and T_x of one sign
    with (2/(3 c1)) T_x <= u <= 2 c1 T_x (inequalities flipped for a
    decreasing wave).  Nodes with T_x = 0 pass iff |u| <= 1e-12.  With
    c1=None a constant is derived from the exact background profile:
    c1 = 2 max(max u/T_x, max (2/3) T_x/u) over the region.
    """
    if ps.frame is not Frame.LAGRANGIAN:
        raise ConfigInvalid("creep check compares Lagrangian states")
    x = state.grid.nodes
    region = np.abs(x) <= eta0 * math.sqrt(1.0 + state.time)
    npts = int(np.count_nonzero(region))
    sign = 1.0 if ps.wave.right_state >= ps.wave.left_state else -1.0

    if c1 is None:
        if ps.wave.delta == 0.0:
            raise ConfigInvalid("auto c1 undefined for zero wave strength")
        bar = eval_bar(ps, x[region], state.time)
        tx = sign * np.gradient(bar.T, state.grid.spacing)
        uu = sign * bar.u
        if np.min(tx) <= 0.0 or np.min(uu) <= 0.0:
            raise ConfigInvalid("background slope changes sign inside the region")
        c1 = 2.0 * max(float(np.max(uu / tx)), float(np.max((2.0 / 3.0) * tx / uu)))

    if c1 <= 0.0 or eta0 <= 0.0:
        raise ConfigInvalid("eta0 and c1 must be positive")

    Tx = np.gradient(state.T, state.grid.spacing)
    a = sign * Tx[region]
    b = sign * state.u[region]
    zero_slope = a == 0.0
    comparable = (b >= (2.0 / (3.0 * c1)) * a) & (b <= 2.0 * c1 * a) & (a > 0.0)
    trivial = zero_slope & (np.abs(b) <= 1e-12)
    passed = int(np.count_nonzero(comparable | trivial))
    return CreepReport(time=state.time, region_points=npts, pass_points=passed,
                       c1_used=float(c1), eta0=float(eta0))


def incompressibility_defect(state, kappa: float, eps: float = None,
                             window=(-5.0, 5.0)) -> float:
    """L2 norm over the window of d/dx(2u - kappa e^{theta - eps p} theta_x).

    The flux 2u - kappa e^{theta - eps p} theta_x is constant in x in the
    limit system, so its discrete x-derivative measures how far a state is
    from the limit constraint.  For Lagrangian states the analogous flux
    is 2u - kappa T_x / T.
    """
    lo, hi = window
    if hi <= lo:
        raise ConfigInvalid("window must be an increasing interval")
    x = state.grid.nodes
    mask = (x >= lo) & (x <= hi)
    if not np.any(mask):
        raise ConfigInvalid("window does not intersect the grid")
    dx = state.grid.spacing
    if isinstance(state, FluctuationState):
        if eps is None:
            raise ConfigInvalid("eps is required for fluctuation states")
        coef = kappa * np.exp(state.theta - eps * state.p)
        flux = 2.0 * state.u - coef * np.gradient(state.theta, dx)
    elif isinstance(state, LagrangianState):
        flux = 2.0 * state.u - kappa * np.gradient(state.T, dx) / state.T
    else:
        raise ConfigInvalid(f"unsupported state type {type(state).__name__}")
    defect = np.gradient(flux, dx)
    return math.sqrt(float(np.trapezoid(defect[mask] ** 2, dx=dx)))


def reconstruct_physical(state, eps: float):
    """Primitive fields (rho, u, T) from either state representation.

    Fluctuation variables map back by rho = e^{eps p - theta} and
    T = e^{theta}, so the pressure P = rho T = e^{eps p} to round-off.
    """
    if eps <= 0.0:
        raise ConfigInvalid(f"eps must be positive, got {eps}")
    if isinstance(state, FluctuationState):
        rho = np.exp(eps * state.p - state.theta)
        T = np.exp(state.theta)
        return rho, state.u.copy(), T
    if isinstance(state, LagrangianState):
        return 1.0 / state.v, state.u.copy(), state.T.copy()
    raise ConfigInvalid(f"unsupported state type {type(state).__name__}")


def write_norm_series(series: NormSeries, path):
    """CSV with the key column followed by l2/linf/h1 blocks per component."""
    if not series.records:
        raise ConfigInvalid("cannot write an empty series")
    comps = series.records[0].components
    names = [series.key_name]
    for kind in ("l2", "linf", "h1"):
        names += [f"{kind}_{c}" for c in comps]
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(names) + "\n")
        for m in series.records:
            row = [m.time]
            row += list(m.l2) + list(m.linf) + list(m.h1_semi)
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_rate_fits(fits: dict, path):
    """CSV of RateFit records keyed by label."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("label,exponent,log_prefactor,r_squared\n")
        for label, fit in fits.items():
            f.write(f"{label},{fit.exponent:.17g},{fit.log_prefactor:.17g},"
                    f"{fit.r_squared:.17g}\n")
