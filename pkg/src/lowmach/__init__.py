"""Numerical laboratory for diffusive waves and 1D low-Mach-number flow.

Subpackages and modules:

- wave: self-similar profile construction and evaluation
- profiles: background/corrected flow profiles and their residuals
- solver: Lagrangian and fluctuation-form time steppers, limit equation
- diagnostics: norms, decay-rate fits, creep and defect checks
- io: snapshot file read/write
- experiments / cli: config-driven experiment runner and command line
"""

from .errors import (
    CFLViolation,
    ConfigInvalid,
    LowmachError,
    NonPositiveState,
    SimulationDiverged,
    SolveFailed,
)

__version__ = "0.1.0"

__all__ = [
    "LowmachError",
    "ConfigInvalid",
    "SolveFailed",
    "SimulationDiverged",
    "CFLViolation",
    "NonPositiveState",
    "__version__",
]
