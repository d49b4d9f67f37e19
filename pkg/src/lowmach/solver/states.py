"""State containers and solver configuration."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ConfigInvalid, NonPositiveState
from ..grids import Grid


class Scheme(str, Enum):
    EXPLICIT = "explicit"
    SEMI_IMPLICIT = "semi_implicit"


class BoundaryKind(str, Enum):
    DIRICHLET_FAR_FIELD = "dirichlet_far_field"
    HOMOGENEOUS_NEUMANN = "homogeneous_neumann"


def _check_field(name, arr, cells):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape != (cells,):
        raise ConfigInvalid(f"{name} must have shape ({cells},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonPositiveState(f"{name} contains non-finite entries")
    return arr


@dataclass
class LagrangianState:
    """(v, u, T) on a uniform grid at one time; v and T must stay positive."""

    grid: Grid
    time: float
    v: np.ndarray
    u: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        n = self.grid.cells
        self.v = _check_field("v", self.v, n)
        self.u = _check_field("u", self.u, n)
        self.T = _check_field("T", self.T, n)
        if np.min(self.v) <= 0.0:
            raise NonPositiveState("specific volume must be positive")
        if np.min(self.T) <= 0.0:
            raise NonPositiveState("temperature must be positive")

    def copy(self) -> "LagrangianState":
        return LagrangianState(self.grid, self.time,
                               self.v.copy(), self.u.copy(), self.T.copy())


@dataclass
class FluctuationState:
    """(p, u, theta) fluctuation variables on a uniform grid.

    Pressure and temperature are P = exp(eps*p), T = exp(theta), so any
    finite values are admissible; the steppers additionally watch for the
    coefficient boxes exp(-eps*p), exp(theta) drifting to absurd scales.
    """

    grid: Grid
    time: float
    p: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        n = self.grid.cells
        self.p = _check_field("p", self.p, n)
        self.u = _check_field("u", self.u, n)
        self.theta = _check_field("theta", self.theta, n)

    def copy(self) -> "FluctuationState":
        return FluctuationState(self.grid, self.time,
                                self.p.copy(), self.u.copy(), self.theta.copy())


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    mu_tilde: float = 1.0
    kappa: float = 1.0
    dt: float = 1e-3
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    bc: BoundaryKind = BoundaryKind.DIRICHLET_FAR_FIELD
    end_time: float = 1.0
    snapshot_times: tuple = ()
    cfl_safety: float = 0.9

    def __post_init__(self):
        for name in ("epsilon", "mu_tilde", "kappa", "dt"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ConfigInvalid(f"{name} must be positive, got {val}")
        if self.end_time < 0.0:
            raise ConfigInvalid(f"end_time must be non-negative, got {self.end_time}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigInvalid(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "bc", BoundaryKind(self.bc))
        snaps = tuple(float(s) for s in self.snapshot_times)
        for s in snaps:
            if s < 0.0 or s > self.end_time:
                raise ConfigInvalid(
                    f"snapshot time {s} outside [0, {self.end_time}]"
                )
        if any(b <= a for a, b in zip(snaps, snaps[1:])):
            raise ConfigInvalid("snapshot_times must be strictly increasing")
        object.__setattr__(self, "snapshot_times", snaps)


@dataclass
class Trajectory:
    """Snapshots collected by `run`, one per requested time.

    Snapshots land on the first step boundary at or after the requested
    time; `times` records where they actually landed.  When a run blows
    up with raise_on_divergence=False, `diverged` is set and snapshots
    collected so far are kept.
    """

    config: SolverConfig
    requested_times: tuple
    snapshots: list = field(default_factory=list)
    diverged: bool = False
    diverged_time: float = None

    @property
    def times(self):
        return tuple(s.time for s in self.snapshots)

    @property
    def final(self):
        if not self.snapshots:
            raise ConfigInvalid("trajectory holds no snapshots")
        return self.snapshots[-1]
