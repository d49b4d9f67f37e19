"""Tridiagonal direct solvers (scalar and 3x3-block Thomas algorithm).

The block variant eliminates blockwise with partial pivoting inside each
3x3 pivot block; a pivot magnitude below PIVOT_FLOOR aborts the solve.
Kernels are numba-compiled and return a status code; the Python wrappers
translate failures into SolveFailed.
"""

import numpy as np
from numba import njit

from .errors import SolveFailed

PIVOT_FLOOR = 1e-14


@njit(cache=True)
def _thomas_kernel(lower, diag, upper, rhs, out):
    # lower[i] multiplies x[i], diag[i+?]: system row i is
    #   lower[i-1]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i]
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    if abs(diag[0]) < PIVOT_FLOOR:
        return 1
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(denom) < PIVOT_FLOOR:
            return i + 1
        if i < n - 1:
            cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return 0


@njit(cache=True)
def _lu3(a, piv):
    # In-place LU with partial pivoting of a 3x3 block.  Returns 0 on
    # success, 1 when a pivot falls below PIVOT_FLOOR.
    for k in range(3):
        p = k
        mx = abs(a[k, k])
        for r in range(k + 1, 3):
            if abs(a[r, k]) > mx:
                mx = abs(a[r, k])
                p = r
        if mx < PIVOT_FLOOR:
            return 1
        piv[k] = p
        if p != k:
            for c in range(3):
                tmp = a[k, c]
                a[k, c] = a[p, c]
                a[p, c] = tmp
        for r in range(k + 1, 3):
            a[r, k] /= a[k, k]
            for c in range(k + 1, 3):
                a[r, c] -= a[r, k] * a[k, c]
    return 0


@njit(cache=True)
def _lu3_solve(a, piv, b):
    # Solve with factors produced by _lu3; b is overwritten with x.
    for k in range(3):
        p = piv[k]
        if p != k:
            tmp = b[k]
            b[k] = b[p]
            b[p] = tmp
        for r in range(k + 1, 3):
            b[r] -= a[r, k] * b[k]
    for k in range(2, -1, -1):
        for c in range(k + 1, 3):
            b[k] -= a[k, c] * b[c]
        b[k] /= a[k, k]


@njit(cache=True)
def _block_thomas_kernel(lower, diag, upper, rhs, out):
    # Row i: lower[i-1] x_{i-1} + diag[i] x_i + upper[i] x_{i+1} = rhs[i]
    # with 3-vectors x_i and 3x3 blocks.
    n = diag.shape[0]
    fac = np.empty((n, 3, 3))
    piv = np.empty((n, 3), dtype=np.int64)
    xmat = np.empty((n - 1, 3, 3))
    y = np.empty((n, 3))
    col = np.empty(3)

    for i in range(n):
        for r in range(3):
            for c in range(3):
                fac[i, r, c] = diag[i, r, c]
            y[i, r] = rhs[i, r]
        if i > 0:
            # fac_i -= L_{i-1} @ X_{i-1};  y_i -= L_{i-1} @ y_{i-1}
            for r in range(3):
                for c in range(3):
                    acc = 0.0
                    for k in range(3):
                        acc += lower[i - 1, r, k] * xmat[i - 1, k, c]
                    fac[i, r, c] -= acc
                acc = 0.0
                for k in range(3):
                    acc += lower[i - 1, r, k] * y[i - 1, k]
                y[i, r] -= acc
        if _lu3(fac[i], piv[i]) != 0:
            return i + 1
        if i < n - 1:
            for c in range(3):
                for r in range(3):
                    col[r] = upper[i, r, c]
                _lu3_solve(fac[i], piv[i], col)
                for r in range(3):
                    xmat[i, r, c] = col[r]
        _lu3_solve(fac[i], piv[i], y[i])

    for r in range(3):
        out[n - 1, r] = y[n - 1, r]
    for i in range(n - 2, -1, -1):
        for r in range(3):
            acc = 0.0
            for k in range(3):
                acc += xmat[i, r, k] * out[i + 1, k]
            out[i, r] = y[i, r] - acc
    return 0


def solve_tridiag(lower, diag, upper, rhs):
    """Solve a scalar tridiagonal system.

    lower has length n-1 (subdiagonal), diag length n, upper length n-1.
    Raises SolveFailed when a forward-elimination pivot drops below
    PIVOT_FLOOR.
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    n = diag.shape[0]
    if lower.shape[0] != n - 1 or upper.shape[0] != n - 1 or rhs.shape[0] != n:
        raise SolveFailed("tridiagonal bands have inconsistent lengths")
    out = np.empty(n)
    status = _thomas_kernel(lower, diag, upper, rhs, out)
    if status != 0:
        raise SolveFailed(f"tridiagonal pivot below {PIVOT_FLOOR:g} at row {status - 1}")
    return out


def solve_block_tridiag(lower, diag, upper, rhs):
    """Solve a block tridiagonal system with 3x3 blocks.

    Shapes: lower (n-1,3,3), diag (n,3,3), upper (n-1,3,3), rhs (n,3).
    Returns the solution as an (n,3) array.  Raises SolveFailed when any
    pivot inside a block elimination falls below PIVOT_FLOOR.
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    lower = np.ascontiguousarray(lower, dtype=np.float64)
    upper = np.ascontiguousarray(upper, dtype=np.float64)
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    n = diag.shape[0]
    if lower.shape != (n - 1, 3, 3) or upper.shape != (n - 1, 3, 3) or rhs.shape != (n, 3):
        raise SolveFailed("block tridiagonal bands have inconsistent shapes")
    out = np.empty((n, 3))
    status = _block_thomas_kernel(lower, diag, upper, rhs, out)
    if status != 0:
        raise SolveFailed(
            f"block elimination pivot below {PIVOT_FLOOR:g} at block row {status - 1}"
        )
    return out
