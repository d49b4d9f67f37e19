"""Plain record types shared by the diagnostics and profile modules."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid


@dataclass(frozen=True)
class Metrics:
    """Norms of a set of difference fields at one time.

    l2, linf and h1_semi hold one value per component, in the order given
    by `components`.  h1_semi may contain NaN for series where a seminorm
    is not meaningful (e.g. residual sup-norm series).
    """

    time: float
    components: tuple
    l2: tuple
    linf: tuple
    h1_semi: tuple

    def __post_init__(self):
        k = len(self.components)
        if len(self.l2) != k or len(self.linf) != k or len(self.h1_semi) != k:
            raise ConfigInvalid("metrics tuples must all match the component list")

    def get(self, kind: str, component: str) -> float:
        idx = self.components.index(component)
        return getattr(self, kind)[idx]


@dataclass
class NormSeries:
    """Metrics indexed by a strictly increasing key column.

    The key is simulation time for decay series and epsilon for sweep
    series; `key_name` records which.
    """

    label: str
    records: list = field(default_factory=list)
    key_name: str = "t"

    def append(self, metrics: Metrics):
        if self.records and metrics.time <= self.records[-1].time:
            raise ConfigInvalid(
                f"series key must be strictly increasing, got {metrics.time} "
                f"after {self.records[-1].time}"
            )
        self.records.append(metrics)

    @property
    def keys(self) -> np.ndarray:
        return np.array([m.time for m in self.records])

    def column(self, kind: str, component: str) -> np.ndarray:
        return np.array([m.get(kind, component) for m in self.records])


@dataclass(frozen=True)
class RateFit:
    """Least-squares power-law fit y ~ exp(log_prefactor) * x**exponent."""

    exponent: float
    log_prefactor: float
    r_squared: float


@dataclass(frozen=True)
class CreepReport:
    """Outcome of the velocity / temperature-slope comparability check."""

    time: float
    region_points: int
    pass_points: int
    c1_used: float
    eta0: float

    @property
    def pass_fraction(self) -> float:
        if self.region_points == 0:
            return 1.0
        return self.pass_points / self.region_points
