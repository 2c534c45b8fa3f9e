"""Exact 1-D quadratic-cost transport oracles on discretized marginals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import monotone_sweep
from .errors import DegenerateDensityError, InvalidArgumentError, ModelError
from .lp import OPTIMAL, LinearProgram, solve

MAX_LP_SUPPORT = 64
DEFAULT_POINTS = 200
MASS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Point masses on a strictly increasing support inside [0, 1]."""

    support: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if support.ndim != 1 or support.shape != masses.shape or support.size == 0:
            raise InvalidArgumentError("support and masses must be matching nonempty 1-D arrays")
        if not (np.all(np.isfinite(support)) and np.all(np.isfinite(masses))):
            raise InvalidArgumentError("support and masses must be finite")
        if np.any(support < 0.0) or np.any(support > 1.0):
            raise InvalidArgumentError("support must lie in [0, 1]")
        if np.any(np.diff(support) <= 0.0):
            raise InvalidArgumentError("support must be strictly increasing")
        if np.any(masses < 0.0):
            raise InvalidArgumentError("masses must be nonnegative")
        if abs(float(masses.sum()) - 1.0) > MASS_TOL:
            raise InvalidArgumentError("masses must sum to 1")
        support.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "masses", masses)


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Dense coupling matrix between two discrete distributions."""

    plan: np.ndarray
    cost: float


def discretize(density, n: int = DEFAULT_POINTS) -> DiscreteDistribution:
    """Sample a density at n midpoints and renormalize the point masses."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidArgumentError("n must be an integer")
    if n < 2 or n > 100000:
        raise InvalidArgumentError("n must be in [2, 100000]")
    u = (np.arange(n) + 0.5) / n
    w = np.asarray(density.pdf(u), dtype=float)
    total = float(w.sum())
    if not np.isfinite(total) or total <= 0.0:
        raise DegenerateDensityError("density has no positive mass at the sample points")
    return DiscreteDistribution(support=u, masses=w / total)


def solve_ot_1d(mu: DiscreteDistribution, nu: DiscreteDistribution) -> TransportPlan:
    """Optimal quadratic-cost coupling via the monotone quantile sweep.

    The sorted greedy matching is optimal for convex ground costs in one
    dimension, so this serves as the exact reference value.
    """
    rows, cols, vals, count, cost = monotone_sweep(
        mu.support, mu.masses, nu.support, nu.masses
    )
    plan = np.zeros((mu.support.size, nu.support.size))
    plan[rows[:count], cols[:count]] = vals[:count]
    return TransportPlan(plan=plan, cost=float(cost))


def solve_ot_lp(mu: DiscreteDistribution, nu: DiscreteDistribution) -> TransportPlan:
    """Transport by explicit linear program; supports capped at 64 each."""
    n = mu.support.size
    m = nu.support.size
    if n > MAX_LP_SUPPORT or m > MAX_LP_SUPPORT:
        raise InvalidArgumentError(f"LP route supports at most {MAX_LP_SUPPORT} points per side")
    diff = mu.support[:, None] - nu.support[None, :]
    objective = (diff * diff).ravel()
    lhs = np.zeros((n + m, n * m))
    for i in range(n):
        lhs[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        lhs[n + j, j::m] = 1.0
    rhs = np.concatenate([mu.masses, nu.masses])
    senses = ("=",) * (n + m)
    lp = LinearProgram(
        objective=objective,
        lhs=lhs,
        senses=senses,
        rhs=rhs,
        lower_bounds=np.zeros(n * m),
    )
    solution = solve(lp)
    if solution.status != OPTIMAL:
        raise ModelError(f"transport LP unexpectedly {solution.status}")
    plan = solution.values.reshape(n, m)
    return TransportPlan(plan=plan, cost=float(solution.objective_value))
