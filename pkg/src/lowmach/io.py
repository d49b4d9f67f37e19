"""Plain-text snapshot files.

A snapshot is `# key=value` header lines carrying the time, epsilon and
grid parameters, then one row per node, space-separated with 17
significant digits: `x v u T` for Lagrangian states, `x p u theta` for
fluctuation states.  The `fields` header names the row layout so files
are self-describing.
"""

import numpy as np

from .errors import ConfigInvalid
from .grids import Grid
from .solver.states import FluctuationState, LagrangianState

__all__ = ["write_snapshot", "read_snapshot"]

_LAGRANGIAN_FIELDS = "x v u T"
_FLUCTUATION_FIELDS = "x p u theta"


def write_snapshot(state, path, epsilon: float = None):
    if isinstance(state, LagrangianState):
        fields, cols = _LAGRANGIAN_FIELDS, (state.v, state.u, state.T)
    elif isinstance(state, FluctuationState):
        fields, cols = _FLUCTUATION_FIELDS, (state.p, state.u, state.theta)
    else:
        raise ConfigInvalid(f"unsupported state type {type(state).__name__}")
    g = state.grid
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# time={state.time:.17g}\n")
        if epsilon is not None:
            f.write(f"# epsilon={epsilon:.17g}\n")
        f.write(f"# half_length={g.half_length:.17g}\n")
        f.write(f"# cells={g.cells}\n")
        f.write(f"# fields={fields}\n")
        for row in zip(g.nodes, *cols):
            f.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def read_snapshot(path):
    """Parse a snapshot file back into a state.

    Returns (state, epsilon); epsilon is None when the file carries no
    epsilon header (e.g. limit fields).
    """
    headers = {}
    rows = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    headers[key.strip()] = value.strip()
                continue
            rows.append([float(tok) for tok in line.split()])
    for key in ("time", "half_length", "cells", "fields"):
        if key not in headers:
            raise ConfigInvalid(f"snapshot {path} is missing header {key!r}")
    grid = Grid(float(headers["half_length"]), int(headers["cells"]))
    if len(rows) != grid.cells:
        raise ConfigInvalid(
            f"snapshot {path} has {len(rows)} rows, grid expects {grid.cells}")
    data = np.asarray(rows, dtype=np.float64)
    if data.shape[1] != 4:
        raise ConfigInvalid(f"snapshot {path} rows must have 4 columns")
    if not np.allclose(data[:, 0], grid.nodes, atol=1e-9 * grid.half_length):
        raise ConfigInvalid(f"snapshot {path} x column disagrees with the grid")
    time = float(headers["time"])
    eps = float(headers["epsilon"]) if "epsilon" in headers else None
    fields = headers["fields"]
    if fields == _LAGRANGIAN_FIELDS:
        state = LagrangianState(grid, time, data[:, 1], data[:, 2], data[:, 3])
    elif fields == _FLUCTUATION_FIELDS:
        state = FluctuationState(grid, time, data[:, 1], data[:, 2], data[:, 3])
    else:
        raise ConfigInvalid(f"snapshot {path} has unknown field layout {fields!r}")
    return state, eps
