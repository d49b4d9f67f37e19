"""Error types shared across the package."""


class LowmachError(Exception):
    """Base class for all failures raised by this package."""


class ConfigInvalid(LowmachError):
    """A configuration value or combination is out of range or unknown.

    The message carries the dotted path of the offending key when the
    error originates from config parsing, e.g. ``physical.kappa``.
    """


class SolveFailed(LowmachError):
    """An iterative solve (Newton, tridiagonal elimination) did not converge."""


class SimulationDiverged(LowmachError):
    """A time integration produced non-finite or non-physical values.

    Attributes
    ----------
    time : float or None
        Simulation time at which divergence was detected.
    """

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class CFLViolation(LowmachError):
    """Requested explicit time step exceeds the stability bound.

    Attributes
    ----------
    dt : float
        Requested step.
    bound : float
        Estimated stable step.
    """

    def __init__(self, message, dt=None, bound=None):
        super().__init__(message)
        self.dt = dt
        self.bound = bound


class NonPositiveState(LowmachError):
    """A field that must stay positive (specific volume, temperature) is not."""
