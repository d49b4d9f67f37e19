"""Figure renderers.

Each renderer reads its input tables, draws one matplotlib figure on the
Agg backend and writes `spec.output`.  render() returns a RenderInfo
carrying the exact data series and annotation strings that went into the
figure, so tests can audit a plot without decoding the image.
"""

import math
from dataclasses import dataclass, field

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .readers import Table, read_table
from .spec import FigureError, FigureKind, FigureSpec

# parabolic similarity region |x| <= eta0 sqrt(1+t)
REGION_ETA0 = 1.0


@dataclass
class RenderInfo:
    kind: FigureKind
    output: str
    series: dict = field(default_factory=dict)  # label -> (x, y)
    annotations: list = field(default_factory=list)


def creep_overlay_data(table: Table, eta0: float = REGION_ETA0):
    """Velocity and centered-difference temperature slope in the region.

    Returns (x, u, Tx, time) restricted to |x| <= eta0 sqrt(1+time).
    """
    x = table.column("x")
    u = table.column("u")
    T = table.column("T")
    t = table.float_header("time")
    if x.size < 3:
        raise FigureError(f"{table.path}: too few rows to difference")
    mask = np.abs(x) <= eta0 * math.sqrt(1.0 + t)
    if not np.any(mask):
        raise FigureError(f"{table.path}: no points inside the "
                          f"parabolic region")
    Tx = np.gradient(T, x)
    return x[mask], u[mask], Tx[mask], t


def _require_single_input(spec: FigureSpec) -> str:
    if len(spec.inputs) != 1:
        raise FigureError(f"{spec.kind.value} takes exactly one input, "
                          f"got {len(spec.inputs)}")
    return spec.inputs[0]


def _render_creep(spec: FigureSpec) -> RenderInfo:
    table = read_table(_require_single_input(spec))
    x, u, Tx, t = creep_overlay_data(table)
    eps = table.float_header("epsilon", default=float("nan"))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, u, label="u", color="tab:blue")
    ax.plot(x, Tx, label="T_x", color="tab:red", linestyle="--")
    ax.axhline(0.0, color="0.7", linewidth=0.8)
    ax.set_xlabel("x")
    title = f"creep overlay, t={t:g}"
    if math.isfinite(eps):
        title += f", eps={eps:g}"
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)

    info = RenderInfo(kind=spec.kind, output=spec.output)
    info.series["u"] = (x, u)
    info.series["T_x"] = (x, Tx)
    info.annotations.append(title)
    return info


def _log_axis(key_name: str, values: np.ndarray, path: str):
    if key_name in ("t", "time"):
        return np.log(1.0 + values), "log(1+t)"
    if np.any(values <= 0.0):
        raise FigureError(f"{path}: column {key_name!r} must be positive "
                          f"for a log fit")
    return np.log(values), f"log {key_name}"


def _render_rate(spec: FigureSpec) -> RenderInfo:
    info = RenderInfo(kind=spec.kind, output=spec.output)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xlabel = ""
    for path in spec.inputs:
        table = read_table(path)
        names = table.names
        if len(names) < 2:
            raise FigureError(f"{path}: need a key column plus at least "
                              f"one value column")
        key = table.column(names[0])
        if key.size == 0:
            raise FigureError(f"{path}: no data rows")
        xlog, xlabel = _log_axis(names[0], key, path)
        for name in names[1:]:
            y = table.column(name)
            good = np.isfinite(y) & (y > 0.0)
            if np.count_nonzero(good) < 2:
                raise FigureError(f"{path}: column {name!r} has fewer "
                                  f"than two positive values")
            slope, intercept = np.polyfit(xlog[good], np.log(y[good]), 1)
            label = f"{name}: slope {slope:.3f}"
            pts = ax.plot(xlog[good], np.log(y[good]), "o")[0]
            ax.plot(xlog[good], slope * xlog[good] + intercept,
                    color=pts.get_color(), label=label)
            info.series[name] = (xlog[good], np.log(y[good]))
            info.annotations.append(label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("log norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
    return info


def _render_profiles(spec: FigureSpec) -> RenderInfo:
    table = read_table(_require_single_input(spec))
    names = table.names
    if len(names) < 2:
        raise FigureError(f"{table.path}: need an x column plus at least "
                          f"one field column")
    x = table.column(names[0])

    info = RenderInfo(kind=spec.kind, output=spec.output)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name in names[1:]:
        y = table.column(name)
        ax.plot(x, y, label=name)
        info.series[name] = (x, y)
    ax.set_xlabel(names[0])
    t = table.float_header("time", default=float("nan"))
    if math.isfinite(t):
        title = f"profiles, t={t:g}"
        ax.set_title(title)
        info.annotations.append(title)
    ax.legend(fontsize="small", ncols=2)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
    return info


_RENDERERS = {
    FigureKind.CREEP_OVERLAY: _render_creep,
    FigureKind.RATE_FIT: _render_rate,
    FigureKind.PROFILES: _render_profiles,
}


def render(spec: FigureSpec) -> RenderInfo:
    """Draw the requested figure and report what was plotted."""
    return _RENDERERS[spec.kind](spec)
