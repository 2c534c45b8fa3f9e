import numpy as np
import pytest

from natcopula import (
    DegenerateDensityError,
    DiscreteDistribution,
    InvalidArgumentError,
    UniformDensity,
    discretize,
    solve_ot_1d,
    solve_ot_lp,
)


def _random_pair(rng, n, m):
    mu = DiscreteDistribution(
        support=np.sort(rng.uniform(0.0, 1.0, n)),
        masses=(lambda w: w / w.sum())(rng.uniform(0.1, 1.0, n)),
    )
    nu = DiscreteDistribution(
        support=np.sort(rng.uniform(0.0, 1.0, m)),
        masses=(lambda w: w / w.sum())(rng.uniform(0.1, 1.0, m)),
    )
    return mu, nu


def test_distribution_validation():
    good_support = np.array([0.2, 0.8])
    good_masses = np.array([0.5, 0.5])
    DiscreteDistribution(support=good_support, masses=good_masses)
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=np.array([0.2, 1.2]), masses=good_masses)
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=np.array([0.8, 0.2]), masses=good_masses)
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=good_support, masses=np.array([0.7, 0.5]))
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=good_support, masses=np.array([-0.1, 1.1]))
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=good_support, masses=np.array([1.0]))
    with pytest.raises(InvalidArgumentError):
        DiscreteDistribution(support=np.array([]), masses=np.array([]))


def test_two_point_hand_case():
    mu = DiscreteDistribution(support=np.array([0.0, 1.0]), masses=np.array([0.5, 0.5]))
    nu = DiscreteDistribution(support=np.array([0.25, 0.75]), masses=np.array([0.25, 0.75]))
    result = solve_ot_1d(mu, nu)
    expected_plan = np.array([[0.25, 0.25], [0.0, 0.5]])
    assert np.allclose(result.plan, expected_plan, atol=1e-15)
    expected_cost = 0.25 * 0.0625 + 0.25 * 0.5625 + 0.5 * 0.0625
    assert abs(result.cost - expected_cost) <= 1e-15
    lp = solve_ot_lp(mu, nu)
    assert abs(lp.cost - expected_cost) <= 1e-12


def test_identical_marginals_cost_zero():
    rng = np.random.default_rng(5)
    mu, _ = _random_pair(rng, 12, 12)
    assert solve_ot_1d(mu, mu).cost == 0.0
    assert solve_ot_lp(mu, mu).cost <= 1e-12


def test_plan_marginals_and_monotonicity():
    rng = np.random.default_rng(17)
    for n, m in [(6, 9), (20, 13)]:
        mu, nu = _random_pair(rng, n, m)
        plan = solve_ot_1d(mu, nu).plan
        assert np.allclose(plan.sum(axis=1), mu.masses, atol=1e-12)
        assert np.allclose(plan.sum(axis=0), nu.masses, atol=1e-12)
        assert np.all(plan >= 0.0)
        # sorted matching never crosses: active cells move right as i grows
        rows, cols = np.nonzero(plan)
        assert np.all(np.diff(cols[np.argsort(rows, kind="stable")]) >= 0)


def test_lp_matches_quantile_coupling():
    """The explicit LP and the sweep solve the same problem."""
    rng = np.random.default_rng(23)
    for n, m in [(4, 4), (8, 5), (16, 16), (24, 19)]:
        mu, nu = _random_pair(rng, n, m)
        sweep = solve_ot_1d(mu, nu)
        lp = solve_ot_lp(mu, nu)
        assert abs(lp.cost - sweep.cost) <= 1e-8
        assert np.allclose(lp.plan.sum(axis=1), mu.masses, atol=1e-9)
        assert np.allclose(lp.plan.sum(axis=0), nu.masses, atol=1e-9)


def test_lp_rejects_oversized_supports():
    rng = np.random.default_rng(1)
    mu, nu = _random_pair(rng, 65, 10)
    with pytest.raises(InvalidArgumentError):
        solve_ot_lp(mu, nu)


def test_discretize_uniform_density():
    dist = discretize(UniformDensity(), 10)
    assert np.allclose(dist.support, (np.arange(10) + 0.5) / 10.0)
    assert np.allclose(dist.masses, 0.1)


def test_discretize_validation():
    flat = UniformDensity()
    with pytest.raises(InvalidArgumentError):
        discretize(flat, 1)
    with pytest.raises(InvalidArgumentError):
        discretize(flat, 100001)
    with pytest.raises(InvalidArgumentError):
        discretize(flat, 10.0)

    class Dead:
        def pdf(self, u):
            return np.zeros_like(np.asarray(u, dtype=float))

    with pytest.raises(DegenerateDensityError):
        discretize(Dead(), 10)
