"""Flow diagnostics for scalar potentials on the unit square.

A potential V induces the divergence-free velocity v = (dV/dy, -dV/dx).
Circulation and flux are line integrals along the boundary of the unit
square, traversed counterclockwise. The circulation must equal the
integral of the vorticity -Laplacian(V) over the interior; comparing
the two (a Green identity) is the consistency check exposed here.

Clamped densities are only piecewise smooth. Their classical Laplacian
misses the singular vorticity carried by the kink lines, so the field
constructors precompute a correction term: the integrated jump of the
normal derivative along each kink line, with the sign that makes the
identity exact for V = max(0, x - b).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .copula import CopulaModel
from .errors import InvalidArgumentError, NumericalDomainError
from .quadrature import QuadratureRule, gauss_legendre_rule, integrate_1d, integrate_2d

DEFAULT_FD_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class FlowField:
    """Velocity samplers plus the data needed for interior integrals.

    ``laplacian`` is the classical (piecewise) Laplacian of the
    potential; ``vorticity_correction`` carries the kink-line
    contribution that the classical Laplacian misses. The rules are
    split at the kinks of the respective axis.
    """

    vx: Callable
    vy: Callable
    laplacian: Callable
    rule_x: QuadratureRule
    rule_y: QuadratureRule
    vorticity_correction: float = 0.0


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Velocity samples on an equispaced grid covering the unit square."""

    x: np.ndarray
    y: np.ndarray
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self):
        sizes = {self.x.size, self.y.size, self.vx.size, self.vy.size}
        if len(sizes) != 1:
            raise InvalidArgumentError("field arrays must have equal lengths")


@dataclass(frozen=True)
class Legs:
    """One boundary integral per side, counterclockwise orientation."""

    bottom: float
    right: float
    top: float
    left: float

    @property
    def total(self) -> float:
        return self.bottom + self.right + self.top + self.left


@dataclass(frozen=True)
class GreenCheck:
    boundary: float
    interior: float

    @property
    def difference(self) -> float:
        return self.boundary - self.interior

    @property
    def residual(self) -> float:
        return abs(self.boundary - self.interior)


def _shifted_eval(fn, x, y, axis: int, dt: float):
    t = x if axis == 0 else y
    s = np.clip(t + dt, 0.0, 1.0)
    return fn(s, y) if axis == 0 else fn(x, s)


def _fd_partial(fn, x, y, axis: int, h: float):
    """Second-order partial derivative with the stencil kept in [0, 1].

    Central differences in the interior, one-sided stencils within h of
    the boundary. Out-of-range evaluations are clipped but only feed
    branches that are not selected there.
    """
    t = np.asarray(x if axis == 0 else y, dtype=float)
    ev = lambda dt: _shifted_eval(fn, x, y, axis, dt)
    lo = t - h < 0.0
    hi = t + h > 1.0
    central = (ev(h) - ev(-h)) / (2.0 * h)
    forward = (-3.0 * ev(0.0) + 4.0 * ev(h) - ev(2.0 * h)) / (2.0 * h)
    backward = (3.0 * ev(0.0) - 4.0 * ev(-h) + ev(-2.0 * h)) / (2.0 * h)
    return np.where(lo, forward, np.where(hi, backward, central))


def _fd_second(fn, x, y, axis: int, h: float):
    t = np.asarray(x if axis == 0 else y, dtype=float)
    ev = lambda dt: _shifted_eval(fn, x, y, axis, dt)
    lo = t - h < 0.0
    hi = t + h > 1.0
    h2 = h * h
    central = (ev(h) - 2.0 * ev(0.0) + ev(-h)) / h2
    forward = (2.0 * ev(0.0) - 5.0 * ev(h) + 4.0 * ev(2.0 * h) - ev(3.0 * h)) / h2
    backward = (2.0 * ev(0.0) - 5.0 * ev(-h) + 4.0 * ev(-2.0 * h) - ev(-3.0 * h)) / h2
    return np.where(lo, forward, np.where(hi, backward, central))


def field_from_potential(
    potential: Callable,
    gradient: Callable | None = None,
    laplacian: Callable | None = None,
    step: float = DEFAULT_FD_STEP,
    rule: QuadratureRule | None = None,
) -> FlowField:
    """Flow field of a smooth scalar potential.

    ``gradient``, if given, must return the pair (dV/dx, dV/dy).
    Missing derivatives fall back to finite differences with ``step``.
    """
    if not callable(potential):
        raise InvalidArgumentError("potential must be callable")
    if not 0.0 < step <= 0.25:
        raise InvalidArgumentError("step must be in (0, 0.25]")
    if rule is None:
        rule = gauss_legendre_rule()
    if gradient is not None:
        vx = lambda x, y: np.asarray(gradient(x, y)[1], dtype=float)
        vy = lambda x, y: -np.asarray(gradient(x, y)[0], dtype=float)
    else:
        vx = lambda x, y: _fd_partial(potential, x, y, 1, step)
        vy = lambda x, y: -_fd_partial(potential, x, y, 0, step)
    if laplacian is not None:
        lap = lambda x, y: np.asarray(laplacian(x, y), dtype=float)
    else:
        lap = lambda x, y: (
            _fd_second(potential, x, y, 0, step) + _fd_second(potential, x, y, 1, step)
        )
    return FlowField(vx=vx, vy=vy, laplacian=lap, rule_x=rule, rule_y=rule)


def density_field(model, rule: QuadratureRule | None = None) -> FlowField:
    """Flow field whose potential is the joint density of ``model``.

    Derivatives are assembled analytically from the marginal pdf
    derivatives and the polynomial reweighting, so no finite
    differencing is involved. Kink lines inherited from the clamped
    marginals contribute the vorticity correction.
    """
    f_x, f_y = model.f_x, model.f_y
    rule_x = f_x.quadrature(rule)
    rule_y = f_y.quadrature(rule)

    def vx(x, y):
        return f_x.pdf(x) * (
            f_y.dpdf(y) * model.tau(x, y) + f_y.pdf(y) * model.tau_dy(x, y)
        )

    def vy(x, y):
        return -f_y.pdf(y) * (
            f_x.dpdf(x) * model.tau(x, y) + f_x.pdf(x) * model.tau_dx(x, y)
        )

    def lap(x, y):
        tau = model.tau(x, y)
        px, py = f_x.pdf(x), f_y.pdf(y)
        return (
            f_x.d2pdf(x) * py * tau
            + 2.0 * f_x.dpdf(x) * py * model.tau_dx(x, y)
            + px * f_y.d2pdf(y) * tau
            + 2.0 * px * f_y.dpdf(y) * model.tau_dy(x, y)
            + px * py * (model.tau_dxx(x, y) + model.tau_dyy(x, y))
        )

    correction = 0.0
    for b in f_x.breakpoints:
        jump = f_x.derivative_jump(b)
        correction -= jump * integrate_1d(
            lambda y: f_y.pdf(y) * model.tau(b, y), rule_y
        )
    for c in f_y.breakpoints:
        jump = f_y.derivative_jump(c)
        correction -= jump * integrate_1d(
            lambda x: f_x.pdf(x) * model.tau(x, c), rule_x
        )
    return FlowField(
        vx=vx,
        vy=vy,
        laplacian=lap,
        rule_x=rule_x,
        rule_y=rule_y,
        vorticity_correction=correction,
    )


def _cumulative(density, order: int, u) -> np.ndarray:
    """Vectorized partial moments; deduplicates repeated grid values."""
    u = np.asarray(u, dtype=float)
    uniq, inverse = np.unique(u.ravel(), return_inverse=True)
    vals = np.array([density.partial_moment(order, float(t)) for t in uniq])
    return vals[inverse].reshape(u.shape)


def cdf_field(model, rule: QuadratureRule | None = None) -> FlowField:
    """Flow field whose potential is the joint distribution function.

    The potential is C * F_X F_Y plus, per monomial, the product of the
    order-j partial moment of f_X and the order-k partial moment of
    f_Y. It is continuously differentiable even when the densities are
    clamped, so no vorticity correction is needed.
    """
    f_x, f_y = model.f_x, model.f_y
    rule_x = f_x.quadrature(rule)
    rule_y = f_y.quadrature(rule)
    const = model.constant
    pairs = model.basis.pairs
    coeffs = model.coefficients

    def vx(x, y):
        acc = const * _cumulative(f_x, 0, x)
        y = np.asarray(y, dtype=float)
        for c, (j, k) in zip(coeffs, pairs):
            acc = acc + c * _cumulative(f_x, j, x) * y**k
        return f_y.pdf(y) * acc

    def vy(x, y):
        acc = const * _cumulative(f_y, 0, y)
        x = np.asarray(x, dtype=float)
        for c, (j, k) in zip(coeffs, pairs):
            acc = acc + c * x**j * _cumulative(f_y, k, y)
        return -f_x.pdf(x) * acc

    def lap(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = const * (
            f_x.dpdf(x) * _cumulative(f_y, 0, y) + _cumulative(f_x, 0, x) * f_y.dpdf(y)
        )
        for c, (j, k) in zip(coeffs, pairs):
            gxx = j * x ** (j - 1) * f_x.pdf(x) + x**j * f_x.dpdf(x)
            gyy = k * y ** (k - 1) * f_y.pdf(y) + y**k * f_y.dpdf(y)
            out = out + c * (gxx * _cumulative(f_y, k, y) + _cumulative(f_x, j, x) * gyy)
        return out

    return FlowField(vx=vx, vy=vy, laplacian=lap, rule_x=rule_x, rule_y=rule_y)


def as_flow_field(potential, rule: QuadratureRule | None = None, step: float = DEFAULT_FD_STEP) -> FlowField:
    """Coerce a potential into a FlowField.

    Accepts a FlowField (returned as is), an estimated copula (analytic
    density potential), or a plain callable V(x, y) (finite differences
    with the given step).
    """
    if isinstance(potential, FlowField):
        return potential
    if isinstance(potential, CopulaModel):
        return density_field(potential, rule)
    if callable(potential):
        return field_from_potential(potential, step=step, rule=rule)
    raise InvalidArgumentError(
        "potential must be a FlowField, an estimated copula, or a callable"
    )


def circulation_legs(potential, rule: QuadratureRule | None = None) -> Legs:
    """Tangential boundary integrals, counterclockwise from the bottom."""
    field = as_flow_field(potential, rule)
    rx, ry = field.rule_x, field.rule_y
    return Legs(
        bottom=integrate_1d(lambda t: field.vx(t, 0.0), rx),
        right=integrate_1d(lambda t: field.vy(1.0, t), ry),
        top=-integrate_1d(lambda t: field.vx(t, 1.0), rx),
        left=-integrate_1d(lambda t: field.vy(0.0, t), ry),
    )


def circulation(potential, rule: QuadratureRule | None = None) -> float:
    return circulation_legs(potential, rule).total


def flux_legs(potential, rule: QuadratureRule | None = None) -> Legs:
    """Outward normal boundary integrals, counterclockwise from the bottom."""
    field = as_flow_field(potential, rule)
    rx, ry = field.rule_x, field.rule_y
    return Legs(
        bottom=-integrate_1d(lambda t: field.vy(t, 0.0), rx),
        right=integrate_1d(lambda t: field.vx(1.0, t), ry),
        top=integrate_1d(lambda t: field.vy(t, 1.0), rx),
        left=-integrate_1d(lambda t: field.vx(0.0, t), ry),
    )


def flux(potential, rule: QuadratureRule | None = None) -> float:
    return flux_legs(potential, rule).total


def interior_circulation(potential, rule: QuadratureRule | None = None) -> float:
    """Vorticity integral: -Laplacian over the square plus kink terms."""
    field = as_flow_field(potential, rule)
    bulk = integrate_2d(field.laplacian, field.rule_x, field.rule_y)
    return -bulk + field.vorticity_correction


def green_check(potential, rule: QuadratureRule | None = None) -> GreenCheck:
    """Boundary circulation against the interior vorticity integral."""
    field = as_flow_field(potential, rule)
    return GreenCheck(
        boundary=circulation(field), interior=interior_circulation(field)
    )


def velocity_field(potential, grid_n: int = 21) -> VelocityField:
    """Velocity samples on an equispaced (grid_n x grid_n) grid.

    Flattened row-major (x varies slowest) for tabular export. Callables
    are differenced with step 1 / (4 * grid_n); estimated copulas use
    their closed-form derivatives.
    """
    if not isinstance(grid_n, (int, np.integer)) or isinstance(grid_n, bool):
        raise InvalidArgumentError("grid_n must be an integer")
    if grid_n < 2 or grid_n > 501:
        raise InvalidArgumentError("grid_n must be in [2, 501]")
    field = as_flow_field(potential, step=1.0 / (4.0 * grid_n))
    g = np.linspace(0.0, 1.0, grid_n)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    vx = np.asarray(np.broadcast_to(field.vx(gx, gy), gx.shape), dtype=float)
    vy = np.asarray(np.broadcast_to(field.vy(gx, gy), gx.shape), dtype=float)
    if not (np.all(np.isfinite(vx)) and np.all(np.isfinite(vy))):
        raise NumericalDomainError("velocity field is not finite on the grid")
    return VelocityField(
        x=gx.ravel(), y=gy.ravel(), vx=vx.ravel().copy(), vy=vy.ravel().copy()
    )
