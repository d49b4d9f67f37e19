"""Limit heat equation reached as eps -> 0 in the fluctuation variables.

The constraint 2u = kappa e^theta theta_x reduces the system to a single
nonlinear heat equation theta_t = (kappa/2) e^theta theta_xx; the limit
velocity is recovered from the constraint afterwards.
"""

import numpy as np

from ..errors import ConfigInvalid, SolveFailed
from ..grids import Grid
from ..tridiag import solve_tridiag
from .fluctuation import limit_velocity


def solve_limit_theta(theta_in, kappa: float, grid: Grid, t_end: float,
                      dt: float = None):
    """Integrate theta_t = (kappa/2) e^theta theta_xx by backward Euler.

    The coefficient e^theta is frozen at the previous step, making each
    step one scalar tridiagonal solve; the scheme is first order in time
    and second order in space.  Dirichlet values are held at the initial
    far field.  Returns (theta, u) at t_end with u the constraint velocity.
    """
    if kappa <= 0.0:
        raise ConfigInvalid(f"kappa must be positive, got {kappa}")
    if t_end < 0.0:
        raise ConfigInvalid(f"t_end must be non-negative, got {t_end}")
    theta = np.asarray(theta_in, dtype=np.float64).copy()
    if theta.shape != (grid.cells,):
        raise ConfigInvalid("theta_in does not match the grid")
    if dt is None:
        dt = grid.spacing
    if dt <= 0.0:
        raise ConfigInvalid(f"dt must be positive, got {dt}")

    dx = grid.spacing
    n = grid.cells
    t = 0.0
    while t < t_end - 1e-12 * max(t_end, 1.0):
        step = min(dt, t_end - t)
        coef = 0.5 * kappa * np.exp(theta) * step / dx**2
        diag = np.ones(n)
        lower = np.zeros(n - 1)
        upper = np.zeros(n - 1)
        diag[1:-1] = 1.0 + 2.0 * coef[1:-1]
        lower[:-1] = -coef[1:-1]
        upper[1:] = -coef[1:-1]
        theta = solve_tridiag(lower, diag, upper, theta)
        if not np.all(np.isfinite(theta)):
            raise SolveFailed("limit integration produced non-finite values")
        t += step
    return theta, limit_velocity(theta, grid, kappa)
