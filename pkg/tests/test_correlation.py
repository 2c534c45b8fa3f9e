import numpy as np

from natcopula import (
    CorrelationReport,
    DomainMap,
    MarginalSpec,
    MonomialBasis,
    UniformDensity,
    correlation_ct,
    estimate_copula,
    gauss_legendre_rule,
    normalize,
    scale_deviation,
    total_correlation,
)

FLAT = UniformDensity()


def _skewed_pair():
    dm = DomainMap(13.174, 13.574)
    f_a = normalize(
        MarginalSpec(coeffs=(1.0, 0.3, -0.05, 0.02), xi=3.558, center=13.374,
                     width=0.0471, theta=1.0, volume=3.5),
        dm,
    )
    f_b = normalize(
        MarginalSpec(coeffs=(1.0, 0.0, 0.0, 0.0), xi=1.0, center=13.40,
                     width=0.08, theta=1.5, volume=2.0),
        dm,
    )
    return f_a, f_b


def test_product_model_has_zero_correlation():
    """tau identically one carries no dependence at all."""
    f_a, f_b = _skewed_pair()
    model = estimate_copula(f_a, f_b, MonomialBasis(pairs=()))
    report = total_correlation(model)
    assert isinstance(report, CorrelationReport)
    assert abs(report.value) <= 1e-12
    assert abs(report.variance_residual) <= 1e-12


def test_uniform_single_monomial_value():
    # tau = 4xy on flat marginals: E[tau^2] - 1 = 16/9 - 1
    model = estimate_copula(FLAT, FLAT, MonomialBasis(pairs=((1, 1),)))
    assert abs(correlation_ct(model) - 7.0 / 9.0) <= 1e-8


def test_variance_identity_for_normalized_models():
    f_a, f_b = _skewed_pair()
    for pair in ((f_a, f_b), (f_b, f_a), (FLAT, f_a)):
        model = estimate_copula(pair[0], pair[1], MonomialBasis.default())
        report = total_correlation(model)
        assert abs(report.variance_residual) <= 1e-8
        assert report.value >= -1e-9


def test_scalar_form_matches_report():
    model = estimate_copula(FLAT, FLAT, MonomialBasis(pairs=((1, 1),)))
    assert correlation_ct(model) == total_correlation(model).value


def test_scaled_deviation_follows_square_law():
    f_a, f_b = _skewed_pair()
    model = estimate_copula(f_a, f_b, MonomialBasis.default())
    base = correlation_ct(model)
    for factor in (0.0, 0.5, 2.0, -1.0):
        scaled = scale_deviation(model, factor)
        assert abs(correlation_ct(scaled) - factor**2 * base) <= 1e-8


def test_scaled_deviation_reweights_pointwise():
    model = estimate_copula(FLAT, FLAT, MonomialBasis(pairs=((1, 1),)))
    scaled = scale_deviation(model, 0.25)
    x = np.array([0.1, 0.5, 0.9])
    y = np.array([0.3, 0.5, 0.2])
    expected = 1.0 + 0.25 * (model.tau(x, y) - 1.0)
    assert np.max(np.abs(scaled.tau(x, y) - expected)) <= 1e-12
    # marginals are untouched
    assert scaled.f_x is model.f_x
    assert scaled.f_y is model.f_y


def test_custom_rule_agrees_with_default():
    f_a, f_b = _skewed_pair()
    model = estimate_copula(f_a, f_b, MonomialBasis.default())
    coarse = total_correlation(model, gauss_legendre_rule(48)).value
    assert abs(coarse - correlation_ct(model)) <= 1e-9
