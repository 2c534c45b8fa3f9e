"""Hot numeric kernels: numba-jitted when available, pure numpy otherwise.

Set ``NATCOPULA_DISABLE_NUMBA=1`` to force the numpy fallback. The two
paths are written to produce bit-identical results: pivot selection uses
the same tie rules and the row updates perform the same elementwise
operations in the same order, so outputs do not depend on which path ran.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("NATCOPULA_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in {"1", "true", "yes", "on"}

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled by NATCOPULA_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    njit = None
    HAS_NUMBA = False

# Statuses shared by both simplex implementations.
STATUS_OPTIMAL = 0
STATUS_UNBOUNDED = 1
STATUS_STALLED = 2


def simplex_core_numpy(tableau, basis, tol, max_pivots):
    """Run Bland-rule pivoting on a dense simplex tableau, in place.

    The last tableau row holds reduced costs (rhs cell = minus the
    objective), the last column holds the rhs. ``basis`` maps each
    constraint row to its basic column. Returns (status, pivot_count).
    """
    m = basis.shape[0]
    ncols = tableau.shape[1]
    n = ncols - 1
    pivots = 0
    while True:
        negative = tableau[m, :n] < -tol
        if not negative.any():
            return STATUS_OPTIMAL, pivots
        if pivots >= max_pivots:
            return STATUS_STALLED, pivots
        col = int(np.argmax(negative))
        colvals = tableau[:m, col]
        eligible = colvals > tol
        if not eligible.any():
            return STATUS_UNBOUNDED, pivots
        ratios = np.full(m, np.inf)
        ratios[eligible] = tableau[:m, n][eligible] / colvals[eligible]
        best = ratios.min()
        ties = np.flatnonzero(ratios == best)
        row = int(ties[np.argmin(basis[ties])])
        pivot = tableau[row, col]
        tableau[row] /= pivot
        factors = tableau[:, col].copy()
        factors[row] = 0.0
        tableau -= np.outer(factors, tableau[row])
        tableau[:, col] = 0.0
        tableau[row, col] = 1.0
        basis[row] = col
        pivots += 1


def _simplex_core_loops(tableau, basis, tol, max_pivots):
    m = basis.shape[0]
    ncols = tableau.shape[1]
    n = ncols - 1
    pivots = 0
    while True:
        col = -1
        for j in range(n):
            if tableau[m, j] < -tol:
                col = j
                break
        if col < 0:
            return 0, pivots
        if pivots >= max_pivots:
            return 2, pivots
        row = -1
        best = np.inf
        best_basis = -1
        for i in range(m):
            v = tableau[i, col]
            if v > tol:
                r = tableau[i, n] / v
                if r < best or (r == best and basis[i] < best_basis):
                    best = r
                    best_basis = basis[i]
                    row = i
        if row < 0:
            return 1, pivots
        pivot = tableau[row, col]
        for q in range(ncols):
            tableau[row, q] /= pivot
        for i in range(m + 1):
            if i == row:
                continue
            f = tableau[i, col]
            if f != 0.0:
                for q in range(ncols):
                    tableau[i, q] -= f * tableau[row, q]
        for i in range(m + 1):
            tableau[i, col] = 0.0
        tableau[row, col] = 1.0
        basis[row] = col
        pivots += 1


def _monotone_sweep_impl(xs, mu, ys, nu):
    """Greedy sorted-mass matching. Optimal for convex costs in 1-D.

    Returns (rows, cols, vals, count, cost); the first ``count`` entries
    of the triplet arrays form the transport plan.
    """
    n = mu.shape[0]
    m = nu.shape[0]
    cap = n + m
    rows = np.empty(cap, np.int64)
    cols = np.empty(cap, np.int64)
    vals = np.empty(cap, np.float64)
    k = 0
    cost = 0.0
    if n == 0 or m == 0:
        return rows, cols, vals, k, cost
    i = 0
    j = 0
    a = mu[0]
    b = nu[0]
    while i < n and j < m:
        take = a if a < b else b
        if take > 0.0:
            rows[k] = i
            cols[k] = j
            vals[k] = take
            d = xs[i] - ys[j]
            cost += take * d * d
            k += 1
        a -= take
        b -= take
        if a == 0.0:
            i += 1
            if i < n:
                a = mu[i]
        if b == 0.0:
            j += 1
            if j < m:
                b = nu[j]
    return rows, cols, vals, k, cost


monotone_sweep_numpy = _monotone_sweep_impl

if HAS_NUMBA:
    _jit = njit(cache=True, fastmath=False, nogil=True)
    simplex_core_numba = _jit(_simplex_core_loops)
    monotone_sweep_numba = _jit(_monotone_sweep_impl)
    simplex_core = simplex_core_numba
    monotone_sweep = monotone_sweep_numba
    USING_NUMBA = True
else:
    simplex_core_numba = None
    monotone_sweep_numba = None
    simplex_core = simplex_core_numpy
    monotone_sweep = monotone_sweep_numpy
    USING_NUMBA = False
