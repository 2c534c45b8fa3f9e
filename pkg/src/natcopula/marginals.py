"""Hermite-expansion volume profiles on a mapped unit interval.

A side of the book is modeled as a clamped, weighted Hermite series in
the scaled price, normalized to a probability density on [0, 1]. The
clamp (negative values set to zero) makes the raw profile piecewise
smooth; the points where the underlying quartic crosses zero are kept as
breakpoints so that quadrature can split around the kinks.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateDensityError,
    IllConditionedFitError,
    InsufficientDataError,
    InvalidArgumentError,
    NumericalDomainError,
)
from .quadrature import (
    DEFAULT_NODES,
    QuadratureRule,
    composite_rule,
    gauss_legendre_rule,
    integrate_1d,
)

MAX_HERMITE_ORDER = 10
_N_COEFFS = 4


def hermite(n: int, x) -> np.ndarray:
    """Physicists' Hermite polynomial H_n evaluated elementwise.

    Uses the recurrence H_{n+1} = 2 x H_n - 2 n H_{n-1} with H_0 = 1 and
    H_1 = 2x. Orders above 10 are rejected.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidArgumentError("order must be an integer")
    if n < 0 or n > MAX_HERMITE_ORDER:
        raise InvalidArgumentError(f"order must be in [0, {MAX_HERMITE_ORDER}], got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = 2.0 * x
    for k in range(1, n):
        h, h_prev = 2.0 * x * h - 2.0 * k * h_prev, h
    return h


def _hermite_table(x: np.ndarray, order: int) -> list[np.ndarray]:
    """H_0 .. H_order at x, computed once with the shared recurrence."""
    table = [np.ones_like(x)]
    if order >= 1:
        table.append(2.0 * x)
    for k in range(1, order):
        table.append(2.0 * x * table[k] - 2.0 * k * table[k - 1])
    return table


@dataclass(frozen=True)
class DomainMap:
    """Affine map between a price interval [lo, hi] and [0, 1]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise InvalidArgumentError("domain requires finite lo < hi")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_unit(self, price):
        return (np.asarray(price, dtype=float) - self.lo) / self.width

    def to_price(self, u):
        return self.lo + np.asarray(u, dtype=float) * self.width


@dataclass(frozen=True)
class MarginalSpec:
    """Parameters of one side's clamped Hermite profile.

    coeffs weight H_1..H_4; xi scales term i by xi**i; center and width
    are in price units; theta widens the Gaussian cutoff; volume is the
    overall positive amplitude.
    """

    coeffs: tuple[float, float, float, float]
    xi: float
    center: float
    width: float
    theta: float
    volume: float

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if len(coeffs) != _N_COEFFS:
            raise InvalidArgumentError(f"exactly {_N_COEFFS} coefficients required")
        object.__setattr__(self, "coeffs", coeffs)
        values = coeffs + (self.xi, self.center, self.width, self.theta, self.volume)
        if not all(np.isfinite(v) for v in values):
            raise InvalidArgumentError("spec parameters must be finite")
        if not any(c != 0.0 for c in coeffs):
            raise InvalidArgumentError("at least one coefficient must be nonzero")
        if self.xi <= 0.0 or self.width <= 0.0 or self.theta <= 0.0 or self.volume <= 0.0:
            raise InvalidArgumentError("xi, width, theta and volume must be positive")

    def scaled_coeffs(self) -> np.ndarray:
        return np.array([c * self.xi ** (i + 1) for i, c in enumerate(self.coeffs)])


def _series_and_gauss(spec: MarginalSpec, x: np.ndarray):
    """Unclamped series Q(t) and Gaussian factor at prices x."""
    t = (x - spec.center) / spec.width
    table = _hermite_table(t, _N_COEFFS)
    g = spec.scaled_coeffs()
    q = g[0] * table[1] + g[1] * table[2] + g[2] * table[3] + g[3] * table[4]
    gauss = np.exp(-((x - spec.center) ** 2) / (2.0 * spec.theta * spec.width**2))
    return q, gauss, t, table


def raw_density(spec: MarginalSpec, u, domain_map: DomainMap) -> np.ndarray:
    """Clamped unnormalized profile at unit-interval coordinates u."""
    u = np.asarray(u, dtype=float)
    x = domain_map.to_price(u)
    q, gauss, _, _ = _series_and_gauss(spec, x)
    return np.maximum(0.0, spec.volume * q * gauss)


def _power_coeffs(spec: MarginalSpec) -> np.ndarray:
    """Power-basis coefficients of Q(t), highest degree first."""
    g1, g2, g3, g4 = spec.scaled_coeffs()
    return np.array(
        [
            16.0 * g4,
            8.0 * g3,
            4.0 * g2 - 48.0 * g4,
            2.0 * g1 - 12.0 * g3,
            -2.0 * g2 + 12.0 * g4,
        ]
    )


def clamp_breakpoints(spec: MarginalSpec, domain_map: DomainMap) -> tuple[float, ...]:
    """Unit-interval locations where the clamped profile has kinks.

    These are the real roots of the Hermite quartic that fall strictly
    inside (0, 1) after mapping; quadrature of the clamped density is
    exact only when split at these points.
    """
    coeffs = _power_coeffs(spec)
    lead = np.flatnonzero(np.abs(coeffs) > 1e-300)
    if lead.size == 0:
        return ()
    coeffs = coeffs[lead[0] :]
    if coeffs.size < 2:
        return ()
    roots = np.roots(coeffs)
    real = roots.real[np.abs(roots.imag) <= 1e-9 * (1.0 + np.abs(roots.real))]
    x = spec.center + spec.width * real
    u = np.sort(domain_map.to_unit(x))
    out: list[float] = []
    for v in u:
        if 1e-12 < v < 1.0 - 1e-12 and (not out or v - out[-1] > 1e-12):
            out.append(float(v))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class MarginalDensity:
    """A normalized clamped profile, integrating to 1 over [0, 1]."""

    spec: MarginalSpec
    domain_map: DomainMap
    normalizer: float
    breakpoints: tuple[float, ...]
    rule: QuadratureRule

    def pdf(self, u) -> np.ndarray:
        return raw_density(self.spec, u, self.domain_map) / self.normalizer

    def dpdf(self, u) -> np.ndarray:
        """First derivative of pdf in u; zero on clamped stretches."""
        u = np.asarray(u, dtype=float)
        x = self.domain_map.to_price(u)
        spec = self.spec
        q, gauss, t, table = _series_and_gauss(spec, x)
        g = spec.scaled_coeffs()
        qp = 2.0 * g[0] * table[0] + 4.0 * g[1] * table[1] + 6.0 * g[2] * table[2] + 8.0 * g[3] * table[3]
        deriv_x = spec.volume * gauss * (qp - q * t / spec.theta) / spec.width
        active = spec.volume * q * gauss > 0.0
        return np.where(active, deriv_x, 0.0) * self.domain_map.width / self.normalizer

    def d2pdf(self, u) -> np.ndarray:
        """Second derivative of pdf in u; zero on clamped stretches."""
        u = np.asarray(u, dtype=float)
        x = self.domain_map.to_price(u)
        spec = self.spec
        q, gauss, t, table = _series_and_gauss(spec, x)
        g = spec.scaled_coeffs()
        qp = 2.0 * g[0] * table[0] + 4.0 * g[1] * table[1] + 6.0 * g[2] * table[2] + 8.0 * g[3] * table[3]
        qpp = 8.0 * g[1] * table[0] + 24.0 * g[2] * table[1] + 48.0 * g[3] * table[2]
        th = spec.theta
        second_x = (
            spec.volume
            * gauss
            * (qpp - 2.0 * qp * t / th + q * (t * t / th**2 - 1.0 / th))
            / spec.width**2
        )
        active = spec.volume * q * gauss > 0.0
        return np.where(active, second_x, 0.0) * self.domain_map.width**2 / self.normalizer

    def derivative_jump(self, u0: float) -> float:
        """Jump of dpdf across a clamp breakpoint (above minus below)."""
        eps = 1e-9
        lo = max(0.0, u0 - eps)
        hi = min(1.0, u0 + eps)
        return float(self.dpdf(hi) - self.dpdf(lo))

    def quadrature(self, base: QuadratureRule | None = None) -> QuadratureRule:
        """Rule split at this density's clamp kinks."""
        if base is None:
            return self.rule
        if not self.breakpoints:
            return base
        return composite_rule(base, self.breakpoints)

    def moment(self, order: int, base: QuadratureRule | None = None) -> float:
        rule = self.quadrature(base)
        return integrate_1d(lambda u: u**order * self.pdf(u), rule)

    def partial_moment(self, order: int, upper: float, base: QuadratureRule | None = None) -> float:
        """integral of u**order * pdf over [0, upper]."""
        if upper <= 0.0:
            return 0.0
        if upper >= 1.0:
            return self.moment(order, base)
        src = base if base is not None else gauss_legendre_rule(DEFAULT_NODES)
        cuts = [b for b in self.breakpoints if b < upper]
        edges = [0.0, *cuts, upper]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            span = hi - lo
            if span <= 0.0:
                continue
            pts = lo + span * src.nodes
            total += span * float(np.dot(src.weights, pts**order * self.pdf(pts)))
        return total


class UniformDensity:
    """The flat density on [0, 1]; shares the marginal interface."""

    breakpoints: tuple[float, ...] = ()

    def __init__(self, rule: QuadratureRule | None = None):
        self.rule = rule if rule is not None else gauss_legendre_rule()

    def pdf(self, u):
        return np.ones_like(np.asarray(u, dtype=float))

    def dpdf(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def d2pdf(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def quadrature(self, base: QuadratureRule | None = None) -> QuadratureRule:
        return self.rule if base is None else base

    def moment(self, order: int, base: QuadratureRule | None = None) -> float:
        return 1.0 / (order + 1)

    def partial_moment(self, order: int, upper: float, base=None) -> float:
        u = min(max(upper, 0.0), 1.0)
        return u ** (order + 1) / (order + 1)


def normalize(
    spec: MarginalSpec,
    domain_map: DomainMap,
    rule: QuadratureRule | None = None,
) -> MarginalDensity:
    """Normalize a clamped profile into a probability density on [0, 1].

    Raises DegenerateDensityError when the clamp wipes out all mass on
    the mapped domain.
    """
    if rule is None:
        rule = gauss_legendre_rule()
    breakpoints = clamp_breakpoints(spec, domain_map)
    split = composite_rule(rule, breakpoints) if breakpoints else rule
    mass = float(np.dot(split.weights, raw_density(spec, split.nodes, domain_map)))
    if not np.isfinite(mass):
        raise NumericalDomainError("density normalizer is not finite")
    if mass <= 0.0:
        raise DegenerateDensityError("clamped profile has no positive mass on the domain")
    return MarginalDensity(
        spec=spec,
        domain_map=domain_map,
        normalizer=mass,
        breakpoints=breakpoints,
        rule=split,
    )


@dataclass(frozen=True)
class EmpiricalHistogram:
    """Binned per-price volume masses."""

    centers: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if centers.ndim != 1 or centers.shape != masses.shape:
            raise InvalidArgumentError("centers and masses must be 1-D and equally long")
        if centers.size < 3:
            raise InvalidArgumentError("histogram needs at least 3 bins")
        if not (np.all(np.isfinite(centers)) and np.all(np.isfinite(masses))):
            raise InvalidArgumentError("histogram values must be finite")
        if np.any(np.diff(centers) <= 0.0):
            raise InvalidArgumentError("bin centers must be strictly increasing")
        if np.any(masses < 0.0):
            raise InvalidArgumentError("masses must be nonnegative")
        centers.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "masses", masses)

    def default_domain(self) -> DomainMap:
        step = float(np.median(np.diff(self.centers)))
        return DomainMap(float(self.centers[0]) - step, float(self.centers[-1]) + step)


@dataclass(frozen=True)
class FitConfig:
    """Search ranges and stopping rules for the marginal fit."""

    xi_range: tuple[float, float] = (0.25, 6.0)
    center_range: tuple[float, float] | None = None
    width_range: tuple[float, float] | None = None
    theta_range: tuple[float, float] = (0.25, 6.0)
    domain: DomainMap | None = None
    rule_n: int = DEFAULT_NODES
    max_iter: int = 500
    xatol: float = 1e-8


@dataclass(frozen=True, eq=False)
class FitResult:
    """Fitted spec plus fit diagnostics."""

    spec: MarginalSpec
    density: MarginalDensity
    residual: float
    baseline_residual: float
    converged: bool
    iterations: int


_PENALTY = 1e12


def _fit_ranges(hist: EmpiricalHistogram, config: FitConfig):
    lo = float(hist.centers[0])
    hi = float(hist.centers[-1])
    span = hi - lo
    center_range = config.center_range or (lo - 0.25 * span, hi + 0.25 * span)
    width_range = config.width_range or (span / 50.0, 25.0 * span)
    for name, rng in (
        ("xi", config.xi_range),
        ("center", center_range),
        ("width", width_range),
        ("theta", config.theta_range),
    ):
        if rng[0] >= rng[1]:
            raise InvalidArgumentError(f"{name} range must satisfy lo < hi")
    if config.xi_range[0] <= 0 or width_range[0] <= 0 or config.theta_range[0] <= 0:
        raise InvalidArgumentError("xi, width and theta ranges must be positive")
    return center_range, width_range


def _fit_eval(params, centers, masses):
    """Inner linear solve at fixed nonlinear parameters.

    The series is linear in the coefficients only where the profile is
    positive, so the least-squares solve is restricted to bins carrying
    mass; bins the clamp zeroes out still enter the returned error
    through the clamped prediction. A final scalar polish reconciles
    the overall scale with the clamp. Returns (sse, payload); payload
    is None when the candidate is not usable.
    """
    xi, center, width, theta = params
    t = (centers - center) / width
    gauss = np.exp(-((centers - center) ** 2) / (2.0 * theta * width**2))
    table = _hermite_table(t, _N_COEFFS)
    design = np.stack(
        [xi ** (i + 1) * table[i + 1] * gauss for i in range(_N_COEFFS)], axis=1
    )
    support = masses > 0.0
    if int(support.sum()) <= _N_COEFFS:
        return _PENALTY, None
    beta, _, rank, _ = np.linalg.lstsq(design[support], masses[support], rcond=None)
    if rank < _N_COEFFS or not np.all(np.isfinite(beta)) or not np.any(beta != 0.0):
        return _PENALTY, None
    pred = np.maximum(0.0, design @ beta)
    pred_sq = float(np.dot(pred, pred))
    if pred_sq <= 0.0:
        return _PENALTY, None
    scale = float(np.dot(masses, pred)) / pred_sq
    if scale <= 0.0:
        return _PENALTY, None
    resid = scale * pred - masses
    return float(np.dot(resid, resid)), (beta, scale, rank)


def fit_marginal(hist: EmpiricalHistogram, config: FitConfig | None = None) -> FitResult:
    """Fit a clamped Hermite profile to a histogram.

    The four series coefficients are solved by linear least squares at
    each candidate of the nonlinear parameters (xi, center, width,
    theta), which a Nelder-Mead simplex searches inside the configured
    ranges. The returned spec reproduces volume * pdf at the bin
    centers. Deterministic: fixed initial simplex, no randomness.
    """
    from scipy.optimize import minimize

    config = config or FitConfig()
    if hist.centers.size < 6:
        raise InsufficientDataError("fit requires at least 6 bins")
    if float(hist.masses.sum()) <= 0.0:
        raise InsufficientDataError("histogram carries no mass")
    center_range, width_range = _fit_ranges(hist, config)
    domain = config.domain or hist.default_domain()
    rule = gauss_legendre_rule(config.rule_n)
    centers = hist.centers
    masses = hist.masses

    lows = np.array(
        [np.log(config.xi_range[0]), center_range[0], np.log(width_range[0]), np.log(config.theta_range[0])]
    )
    highs = np.array(
        [np.log(config.xi_range[1]), center_range[1], np.log(width_range[1]), np.log(config.theta_range[1])]
    )

    def unpack(z):
        return np.array([np.exp(z[0]), z[1], np.exp(z[2]), np.exp(z[3])])

    def objective(z):
        excess = np.maximum(0.0, lows - z) + np.maximum(0.0, z - highs)
        if excess.any():
            return _PENALTY * (1.0 + float(np.dot(excess, excess)))
        return _fit_eval(unpack(z), centers, masses)[0]

    span = float(centers[-1] - centers[0])
    # local simplex steps; range-proportional steps overshoot basins
    # when the search box is wide
    steps = np.array([0.3, 0.05 * span, 0.35, 0.5])

    def run(z0, cap):
        simplex = [z0]
        for axis in range(4):
            vertex = z0.copy()
            vertex[axis] = min(vertex[axis] + steps[axis], highs[axis])
            if vertex[axis] == z0[axis]:
                vertex[axis] = max(z0[axis] - steps[axis], lows[axis])
            simplex.append(vertex)
        return minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={
                "initial_simplex": np.asarray(simplex),
                "xatol": config.xatol,
                "fatol": 1e-10,
                "maxiter": cap,
                "maxfev": 20 * config.max_iter,
            },
        )

    # global stage: the inner solve is cheap, so scan a coarse grid of
    # (center, width, theta) around the mass-weighted moments and polish
    # the best few points with Nelder-Mead. Deterministic; perfect fits
    # stop the polish early.
    total = float(masses.sum())
    mean = float(np.dot(masses, centers)) / total
    sd = float(np.sqrt(np.dot(masses, (centers - mean) ** 2) / total))
    sd = min(max(sd, width_range[0]), width_range[1])
    mass_sq = float(np.dot(masses, masses))
    xi_mid = 0.5 * (lows[0] + highs[0])
    center_grid = [
        np.clip(c, center_range[0], center_range[1])
        for c in (mean - 0.5 * sd, mean, mean + 0.5 * sd)
    ]
    w_lo = max(span / 40.0, width_range[0])
    w_hi = min(12.0 * span, width_range[1])
    width_grid = np.exp(np.linspace(np.log(w_lo), np.log(w_hi), 10))
    theta_grid = [
        min(max(t, config.theta_range[0]), config.theta_range[1])
        for t in (0.5, 1.0, 2.0, 4.0)
    ]
    # keep the best probe per (width, theta) cell; polishing only the
    # overall top scorers is deceptive because a too-wide profile can
    # mimic the data modestly well while the true basin is entered from
    # a nearby width at the right theta
    champions = {}
    order = 0
    for c in center_grid:
        for wi, w in enumerate(width_grid):
            for ti, theta in enumerate(theta_grid):
                z = np.array([xi_mid, c, np.log(w), np.log(theta)])
                entry = (objective(z), order, z)
                order += 1
                group = (wi, ti)
                if group not in champions or entry < champions[group]:
                    champions[group] = entry
    # exploration runs are capped short; capped outcomes cannot separate
    # a dead end from a deep valley entered slowly, so the best few
    # endpoints all get a full-depth finish. A stall cut ends the scan
    # once extra starts stop paying, which keeps noisy fits fast
    # without giving up hard clean ones.
    explored = []
    result = None
    perfect = 1e-9 * mass_sq
    since_gain = 0
    for _, _, z0 in sorted(champions.values()):
        candidate = run(z0, min(150, config.max_iter))
        explored.append(candidate)
        if result is None or candidate.fun < 0.995 * result.fun:
            since_gain = 0
        else:
            since_gain += 1
        if result is None or candidate.fun < result.fun:
            result = candidate
        if result.fun <= perfect or since_gain >= 12:
            break
    if result.fun > perfect:
        explored.sort(key=lambda r: r.fun)
        for finalist in explored[:3]:
            finish = run(finalist.x, config.max_iter)
            if finish.fun < result.fun:
                result = finish
            if result.fun <= perfect:
                break
    converged = bool(result.success) or result.fun <= perfect
    if not converged:
        warnings.warn("marginal fit hit its iteration cap; returning best point", RuntimeWarning)
    z = np.minimum(np.maximum(result.x, lows), highs)
    params = unpack(z)
    sse, payload = _fit_eval(params, centers, masses)
    if payload is None:
        raise IllConditionedFitError("fit ended on a rank-deficient or empty profile")
    beta, scale, _ = payload
    probe = MarginalSpec(
        coeffs=tuple(beta),
        xi=float(params[0]),
        center=float(params[1]),
        width=float(params[2]),
        theta=float(params[3]),
        volume=1.0,
    )
    reference = normalize(probe, domain, rule)
    spec = MarginalSpec(
        coeffs=tuple(beta),
        xi=float(params[0]),
        center=float(params[1]),
        width=float(params[2]),
        theta=float(params[3]),
        volume=scale * reference.normalizer,
    )
    density = normalize(spec, domain, rule)
    mean_mass = float(masses.mean())
    baseline = float(np.dot(masses - mean_mass, masses - mean_mass))
    return FitResult(
        spec=spec,
        density=density,
        residual=sse,
        baseline_residual=baseline,
        converged=converged,
        iterations=int(result.nit),
    )
