"""Gauss-Legendre quadrature on the unit interval and unit square."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericalDomainError

MAX_NODES = 256
DEFAULT_NODES = 32
_NEWTON_TOL = 1e-15
_NEWTON_CAP = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integration over [0, 1].

    Attributes
    ----------
    nodes : np.ndarray
        Strictly increasing points in the open interval (0, 1).
    weights : np.ndarray
        Positive weights summing to 1 (up to roundoff).
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise InvalidArgumentError("nodes and weights must be 1-D and equally long")
        if nodes.size == 0:
            raise InvalidArgumentError("rule must have at least one node")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise InvalidArgumentError("nodes and weights must be finite")
        if nodes[0] <= 0.0 or nodes[-1] >= 1.0 or np.any(np.diff(nodes) <= 0.0):
            raise InvalidArgumentError("nodes must be strictly increasing inside (0, 1)")
        if np.any(weights <= 0.0):
            raise InvalidArgumentError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("weights must sum to 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size


def _legendre_pair(n: int, x: np.ndarray):
    """Evaluate (P_n, P_{n-1}) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(1, n):
        p, p_prev = ((2 * k + 1) * x * p - k * p_prev) / (k + 1), p
    return p, p_prev


@lru_cache(maxsize=64)
def gauss_legendre_rule(n: int = DEFAULT_NODES) -> QuadratureRule:
    """Build the n-point Gauss-Legendre rule mapped to [0, 1].

    Nodes are found by Newton iteration on the Legendre recurrence,
    converged to 1e-15 and symmetrized, so construction is deterministic
    and needs no tabulated values. The rule integrates polynomials up to
    degree 2n - 1 exactly.

    Parameters
    ----------
    n : int
        Node count, 1 <= n <= 256.

    Returns
    -------
    QuadratureRule
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidArgumentError("node count must be an integer")
    if n < 1 or n > MAX_NODES:
        raise InvalidArgumentError(f"node count must be in [1, {MAX_NODES}], got {n}")
    k = np.arange(n, dtype=float)
    x = np.cos(np.pi * (k + 0.75) / (n + 0.5))
    for _ in range(_NEWTON_CAP):
        p, p_prev = _legendre_pair(n, x)
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        step = p / dp
        x -= step
        if np.max(np.abs(step)) < _NEWTON_TOL:
            break
    else:
        raise NumericalDomainError("Legendre Newton iteration failed to converge")
    # Exact antisymmetry removes one-sided roundoff drift.
    x = 0.5 * (x - x[::-1])
    p, p_prev = _legendre_pair(n, x)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    order = np.argsort(x)
    x = x[order]
    w = w[order]
    return QuadratureRule(nodes=(x + 1.0) / 2.0, weights=w / 2.0)


def composite_rule(base: QuadratureRule, breakpoints: Sequence[float]) -> QuadratureRule:
    """Tile ``base`` over the segments of [0, 1] cut at ``breakpoints``.

    Breakpoints outside (0, 1) are rejected; duplicates closer than 1e-12
    are merged. The result is itself a valid rule on [0, 1], exact on
    each smooth segment to the base rule's degree.
    """
    pts = np.asarray(sorted(float(b) for b in breakpoints), dtype=float)
    if pts.size and (pts[0] <= 0.0 or pts[-1] >= 1.0):
        raise InvalidArgumentError("breakpoints must lie strictly inside (0, 1)")
    edges = [0.0]
    for b in pts:
        if b - edges[-1] > 1e-12:
            edges.append(b)
    edges.append(1.0)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        span = hi - lo
        nodes.append(lo + span * base.nodes)
        weights.append(span * base.weights)
    return QuadratureRule(nodes=np.concatenate(nodes), weights=np.concatenate(weights))


def _finite_values(raw, shape) -> np.ndarray:
    vals = np.asarray(raw, dtype=float)
    try:
        vals = np.broadcast_to(vals, shape)
    except ValueError as exc:
        raise InvalidArgumentError(
            f"integrand returned shape {vals.shape}, expected broadcastable to {shape}"
        ) from exc
    if not np.all(np.isfinite(vals)):
        raise NumericalDomainError("integrand produced a non-finite value")
    return vals


def integrate_1d(f: Callable, rule: QuadratureRule | None = None) -> float:
    """Integrate a vectorized callable over [0, 1]."""
    if rule is None:
        rule = gauss_legendre_rule()
    vals = _finite_values(f(rule.nodes), rule.nodes.shape)
    return float(np.dot(rule.weights, vals))


def integrate_2d(
    f: Callable,
    rule: QuadratureRule | None = None,
    rule_y: QuadratureRule | None = None,
) -> float:
    """Integrate f(x, y) over the unit square by tensor product.

    ``rule`` applies to the x axis; ``rule_y`` defaults to the same rule.
    The callable must accept broadcastable arrays.
    """
    if rule is None:
        rule = gauss_legendre_rule()
    if rule_y is None:
        rule_y = rule
    x = rule.nodes[:, None]
    y = rule_y.nodes[None, :]
    vals = _finite_values(f(x, y), (rule.nodes.size, rule_y.nodes.size))
    return float(rule.weights @ vals @ rule_y.weights)
