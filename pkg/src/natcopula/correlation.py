"""Quadratic dependence summary of an estimated joint density.

For a density f_X f_Y tau with unit total mass, the dependence measure
is the product-weighted integral of tau^2 - 1. When the mass constraint
holds it equals the product-weighted variance of tau - 1, which gives a
free internal consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .quadrature import QuadratureRule, gauss_legendre_rule, integrate_2d


@dataclass(frozen=True)
class CorrelationReport:
    value: float
    variance_residual: float


def total_correlation(model, rule: QuadratureRule | None = None) -> CorrelationReport:
    """Product-weighted second moment of tau minus one.

    ``variance_residual`` is the gap between the two equivalent forms
    E[tau^2] - 1 and E[(tau - 1)^2]; it vanishes exactly when the
    estimated density integrates to one.
    """
    if rule is None:
        rule = gauss_legendre_rule()
    rx = model.f_x.quadrature(rule)
    ry = model.f_y.quadrature(rule)

    def weighted(g):
        return integrate_2d(
            lambda x, y: model.f_x.pdf(x) * model.f_y.pdf(y) * g(model.tau(x, y)),
            rx,
            ry,
        )

    value = weighted(lambda t: t * t - 1.0)
    variance = weighted(lambda t: (t - 1.0) ** 2)
    return CorrelationReport(
        value=float(value), variance_residual=float(value - variance)
    )


def correlation_ct(model, rule: QuadratureRule | None = None) -> float:
    """Scalar form of the dependence measure."""
    return total_correlation(model, rule).value


def scale_deviation(model, factor: float):
    """Model with tau replaced by 1 + factor * (tau - 1).

    Scaling the deviation from independence scales the dependence
    measure by factor squared; useful for sensitivity checks. Only the
    reweighting changes; the stored transport cost is not recomputed.
    """
    constant = 1.0 + factor * (model.constant - 1.0)
    coefficients = np.asarray(model.coefficients, dtype=float) * factor
    return replace(model, constant=float(constant), coefficients=coefficients)
