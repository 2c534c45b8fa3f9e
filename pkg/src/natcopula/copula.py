"""Nonnegative polynomial reweighting of a product density, fitted by LP.

The joint density is f_X(x) f_Y(y) tau(x, y) with tau a constant plus a
combination of monomials x^j y^k (j, k >= 1, so the axes keep the
constant value). Minimizing the quadratic transport functional subject
to unit total mass and pointwise nonnegativity of tau on a grid is a
linear program in the tau coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    EstimationInfeasibleError,
    InvalidArgumentError,
    ModelError,
)
from .lp import INFEASIBLE, UNBOUNDED, LinearProgram, solve
from .quadrature import QuadratureRule, gauss_legendre_rule, integrate_2d

MAX_MONOMIALS = 8
DEFAULT_GRID_N = 21
RECHECK_GRID_N = 101


@dataclass(frozen=True)
class MonomialBasis:
    """Exponent pairs (j, k), each >= 1, of the reweighting monomials."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(j), int(k)) for j, k in self.pairs)
        if len(pairs) > MAX_MONOMIALS:
            raise InvalidArgumentError(f"at most {MAX_MONOMIALS} monomials supported")
        seen = set()
        for j, k in pairs:
            if j < 1 or k < 1:
                raise InvalidArgumentError("exponents must be at least 1 on both axes")
            if (j, k) in seen:
                raise InvalidArgumentError(f"duplicate monomial ({j}, {k})")
            seen.add((j, k))
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @classmethod
    def default(cls) -> "MonomialBasis":
        return cls(pairs=((1, 1), (2, 1), (1, 2), (2, 2)))

    @classmethod
    def parse(cls, text: str) -> "MonomialBasis":
        """Parse 'jk' digit-pair tokens, e.g. '11,21,12,22'; '' is empty."""
        text = text.strip()
        if not text:
            return cls(pairs=())
        pairs = []
        for token in text.split(","):
            token = token.strip()
            if not re.fullmatch(r"[1-9][1-9]", token):
                raise InvalidArgumentError(
                    f"basis token {token!r} must be two digits 1-9 (j then k)"
                )
            pairs.append((int(token[0]), int(token[1])))
        return cls(pairs=tuple(pairs))

    def transpose(self) -> "MonomialBasis":
        return MonomialBasis(pairs=tuple((k, j) for j, k in self.pairs))


@dataclass(frozen=True, eq=False)
class CostIntegrals:
    """Mass and transport-cost integrals per term (index 0 = constant)."""

    basis: MonomialBasis
    plain: np.ndarray
    weighted: np.ndarray

    def __post_init__(self):
        plain = np.asarray(self.plain, dtype=float)
        weighted = np.asarray(self.weighted, dtype=float)
        expected = 1 + len(self.basis)
        if plain.shape != (expected,) or weighted.shape != (expected,):
            raise InvalidArgumentError("one integral pair per term required")
        if not (np.all(np.isfinite(plain)) and np.all(np.isfinite(weighted))):
            raise ModelError("integrals must be finite")
        if abs(plain[0] - 1.0) > 1e-8:
            raise ModelError("marginals are not normalized: product mass differs from 1")
        if np.any(weighted < -1e-12):
            raise ModelError("transport-cost integrals must be nonnegative")
        object.__setattr__(self, "plain", plain)
        object.__setattr__(self, "weighted", weighted)


@dataclass(frozen=True)
class CopulaConfig:
    grid_n: int = DEFAULT_GRID_N
    rule_n: int = 32
    moment_constraints: int = 0
    recheck_n: int = RECHECK_GRID_N


@dataclass(frozen=True, eq=False)
class CopulaDiagnostics:
    constraint_residual: float
    product_cost: float
    repair_delta: float
    min_tau_recheck: float
    lp_pivots: int


@dataclass(frozen=True, eq=False)
class CopulaModel:
    """Estimated joint density f_X f_Y tau on the unit square."""

    f_x: object
    f_y: object
    basis: MonomialBasis
    constant: float
    coefficients: np.ndarray
    cost: float
    diagnostics: CopulaDiagnostics

    def tau(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast_shapes(x.shape, y.shape), self.constant)
        for coeff, (j, k) in zip(self.coefficients, self.basis.pairs):
            out = out + coeff * x**j * y**k
        return out

    def tau_dx(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for coeff, (j, k) in zip(self.coefficients, self.basis.pairs):
            out = out + coeff * j * x ** (j - 1) * y**k
        return out

    def tau_dy(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for coeff, (j, k) in zip(self.coefficients, self.basis.pairs):
            out = out + coeff * k * x**j * y ** (k - 1)
        return out

    def tau_dxx(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for coeff, (j, k) in zip(self.coefficients, self.basis.pairs):
            if j >= 2:
                out = out + coeff * j * (j - 1) * x ** (j - 2) * y**k
        return out

    def tau_dyy(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for coeff, (j, k) in zip(self.coefficients, self.basis.pairs):
            if k >= 2:
                out = out + coeff * k * (k - 1) * x**j * y ** (k - 2)
        return out

    def density(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.f_x.pdf(x) * self.f_y.pdf(y) * self.tau(x, y)


def compute_integrals(
    f_x,
    f_y,
    basis: MonomialBasis,
    rule: QuadratureRule | None = None,
) -> CostIntegrals:
    """Mass integrals I_i and transport-cost integrals over the square.

    Index 0 is the constant term; index i >= 1 follows the basis order.
    Each marginal supplies a quadrature rule split at its clamp kinks,
    so the piecewise-smooth integrands are resolved exactly.
    """
    if rule is None:
        rule = gauss_legendre_rule()
    rx = f_x.quadrature(rule)
    ry = f_y.quadrature(rule)
    terms = [(0, 0), *basis.pairs]
    plain = np.empty(len(terms))
    weighted = np.empty(len(terms))
    for idx, (j, k) in enumerate(terms):
        plain[idx] = integrate_2d(
            lambda x, y: f_x.pdf(x) * f_y.pdf(y) * x**j * y**k, rx, ry
        )
        weighted[idx] = integrate_2d(
            lambda x, y: (x - y) ** 2 * f_x.pdf(x) * f_y.pdf(y) * x**j * y**k, rx, ry
        )
    return CostIntegrals(basis=basis, plain=plain, weighted=weighted)


def _moment_rows(f_x, f_y, basis: MonomialBasis, k_max: int):
    """Equality rows matching the first k_max marginal moments per axis."""
    lhs = []
    rhs = []
    for r in range(1, k_max + 1):
        mx_r = f_x.moment(r)
        row = [mx_r]
        for j, k in basis.pairs:
            row.append(f_x.moment(r + j) * f_y.moment(k))
        lhs.append(row)
        rhs.append(mx_r)
        my_r = f_y.moment(r)
        row = [my_r]
        for j, k in basis.pairs:
            row.append(f_x.moment(j) * f_y.moment(r + k))
        lhs.append(row)
        rhs.append(my_r)
    return lhs, rhs


def assemble_lp(
    integrals: CostIntegrals,
    f_x=None,
    f_y=None,
    basis: MonomialBasis | None = None,
    grid_n: int = DEFAULT_GRID_N,
    moment_constraints: int = 0,
) -> LinearProgram:
    """Build the estimation LP over (constant, coefficients).

    Minimize the transport-cost combination subject to total mass >= 1
    and tau >= 0 at every point of an equispaced grid_n x grid_n grid
    including the boundary. All variables are free. Optional equality
    rows match the first marginal moments on each axis; the marginals
    are only needed when moment_constraints > 0.
    """
    if not isinstance(grid_n, (int, np.integer)) or isinstance(grid_n, bool):
        raise InvalidArgumentError("grid_n must be an integer")
    if grid_n < 2 or grid_n > 101:
        raise InvalidArgumentError("grid_n must be in [2, 101]")
    if moment_constraints < 0:
        raise InvalidArgumentError("moment_constraints must be nonnegative")
    basis = basis if basis is not None else integrals.basis
    if basis.pairs != integrals.basis.pairs:
        raise InvalidArgumentError("basis does not match the integrals")
    n_vars = 1 + len(basis)
    g = np.linspace(0.0, 1.0, grid_n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    gx = gx.ravel()
    gy = gy.ravel()
    grid_rows = np.ones((gx.size, n_vars))
    for idx, (j, k) in enumerate(basis.pairs):
        grid_rows[:, idx + 1] = gx**j * gy**k
    lhs = [integrals.plain.reshape(1, -1), grid_rows]
    rhs = [np.array([1.0]), np.zeros(gx.size)]
    senses = [">="] * (1 + gx.size)
    if moment_constraints > 0:
        if f_x is None or f_y is None:
            raise InvalidArgumentError("moment constraints require both marginals")
        extra_lhs, extra_rhs = _moment_rows(f_x, f_y, basis, moment_constraints)
        lhs.append(np.asarray(extra_lhs, dtype=float))
        rhs.append(np.asarray(extra_rhs, dtype=float))
        senses.extend(["="] * len(extra_rhs))
    return LinearProgram(
        objective=integrals.weighted,
        lhs=np.concatenate(lhs, axis=0),
        senses=tuple(senses),
        rhs=np.concatenate(rhs),
        lower_bounds=np.full(n_vars, -np.inf),
    )


def estimate_copula(
    f_x,
    f_y,
    basis: MonomialBasis | None = None,
    config: CopulaConfig | None = None,
) -> CopulaModel:
    """Estimate the minimum-transport-cost reweighting of f_X f_Y.

    Solves the LP, then rechecks tau on a finer grid; a negative dip
    between enforcement nodes is repaired by mixing toward the product
    model (shift the constant by delta, rescale by 1 / (1 + delta)),
    which preserves the mass and moment equalities exactly and can only
    increase the cost toward the product cost.
    """
    basis = basis if basis is not None else MonomialBasis.default()
    config = config or CopulaConfig()
    rule = gauss_legendre_rule(config.rule_n)
    integrals = compute_integrals(f_x, f_y, basis, rule)
    lp = assemble_lp(
        integrals,
        f_x,
        f_y,
        basis,
        grid_n=config.grid_n,
        moment_constraints=config.moment_constraints,
    )
    solution = solve(lp)
    if solution.status == INFEASIBLE:
        raise EstimationInfeasibleError("estimation LP infeasible")
    if solution.status == UNBOUNDED:
        raise ModelError("estimation LP unbounded; nonnegativity grid missing or too sparse")
    values = solution.values
    constraint_residual = float(abs(integrals.plain @ values - 1.0))
    if constraint_residual > 1e-6:
        raise ModelError("mass constraint not active at the LP optimum")

    g = np.linspace(0.0, 1.0, config.recheck_n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    tau_grid = np.full(gx.shape, values[0])
    for coeff, (j, k) in zip(values[1:], basis.pairs):
        tau_grid = tau_grid + coeff * gx**j * gy**k
    min_tau = float(tau_grid.min())
    delta = max(0.0, -min_tau)
    if delta > 0.0:
        values = values.copy()
        values[0] += delta
        values /= 1.0 + delta
    cost = float(integrals.weighted @ values)
    diagnostics = CopulaDiagnostics(
        constraint_residual=float(abs(integrals.plain @ values - 1.0)),
        product_cost=float(integrals.weighted[0]),
        repair_delta=delta,
        min_tau_recheck=min_tau,
        lp_pivots=solution.pivots,
    )
    return CopulaModel(
        f_x=f_x,
        f_y=f_y,
        basis=basis,
        constant=float(values[0]),
        coefficients=np.asarray(values[1:], dtype=float),
        cost=cost,
        diagnostics=diagnostics,
    )


def copula_density(model: CopulaModel, x, y) -> np.ndarray:
    """Joint density at points of the unit square."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(y < 0.0) or np.any(y > 1.0):
        raise InvalidArgumentError("points must lie in the unit square")
    return model.density(x, y)


def wasserstein_cost(model: CopulaModel, rule: QuadratureRule | None = None) -> float:
    """Recompute the transport-cost functional of the model density."""
    if rule is None:
        rule = gauss_legendre_rule()
    rx = model.f_x.quadrature(rule)
    ry = model.f_y.quadrature(rule)
    return integrate_2d(
        lambda x, y: (x - y) ** 2 * model.density(x, y), rx, ry
    )


def marginal_deviation(model: CopulaModel, n_points: int = 101) -> float:
    """Worst absolute gap between the model's marginals and f_X, f_Y.

    The mass constraint fixes only the total integral, so the slice
    integrals generally deviate; this reports the sup over a grid.
    """
    grid = np.linspace(0.0, 1.0, n_points)
    ry = model.f_y.quadrature(None)
    rx = model.f_x.quadrature(None)
    worst = 0.0
    tau_xy = model.tau(grid[:, None], ry.nodes[None, :])
    fy_vals = model.f_y.pdf(ry.nodes)
    slice_x = (tau_xy * fy_vals[None, :]) @ ry.weights
    worst = float(np.max(np.abs(model.f_x.pdf(grid) * (slice_x - 1.0))))
    tau_yx = model.tau(rx.nodes[:, None], grid[None, :])
    fx_vals = model.f_x.pdf(rx.nodes)
    slice_y = rx.weights @ (tau_yx * fx_vals[:, None])
    worst = max(worst, float(np.max(np.abs(model.f_y.pdf(grid) * (slice_y - 1.0)))))
    return worst
