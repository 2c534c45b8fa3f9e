"""Natural copula estimation for two-sided volume-at-price data.

The pipeline: ingest price/volume records, fit a clamped Hermite
profile per side, reweight the product of the fitted densities by a
nonnegative polynomial chosen by linear programming to minimize the
quadratic transport cost, then evaluate flow and dependence
diagnostics. An exact 1-D optimal transport solver provides an
independent lower bound for validation.
"""

from .copula import (
    CopulaConfig,
    CopulaDiagnostics,
    CopulaModel,
    CostIntegrals,
    MonomialBasis,
    assemble_lp,
    compute_integrals,
    copula_density,
    estimate_copula,
    marginal_deviation,
    wasserstein_cost,
)
from .correlation import (
    CorrelationReport,
    correlation_ct,
    scale_deviation,
    total_correlation,
)
from .errors import (
    DegenerateDensityError,
    EmptySideError,
    EstimationInfeasibleError,
    IllConditionedFitError,
    InsufficientDataError,
    InvalidArgumentError,
    ModelError,
    NatCopulaError,
    NumericalDomainError,
    ParseError,
    SolverStallError,
)
from .hydro import (
    FlowField,
    GreenCheck,
    Legs,
    VelocityField,
    as_flow_field,
    cdf_field,
    circulation,
    circulation_legs,
    density_field,
    field_from_potential,
    flux,
    flux_legs,
    green_check,
    interior_circulation,
    velocity_field,
)
from .ingest import PriceLevel, bin_levels, load_csv, ma_smooth, write_csv
from .lp import LinearProgram, LpSolution, solve
from .marginals import (
    DomainMap,
    EmpiricalHistogram,
    FitConfig,
    FitResult,
    MarginalDensity,
    MarginalSpec,
    UniformDensity,
    clamp_breakpoints,
    fit_marginal,
    hermite,
    normalize,
    raw_density,
)
from .quadrature import (
    QuadratureRule,
    composite_rule,
    gauss_legendre_rule,
    integrate_1d,
    integrate_2d,
)
from .transport import (
    DiscreteDistribution,
    TransportPlan,
    discretize,
    solve_ot_1d,
    solve_ot_lp,
)

__version__ = "0.1.0"

__all__ = [
    "CopulaConfig",
    "CopulaDiagnostics",
    "CopulaModel",
    "CorrelationReport",
    "CostIntegrals",
    "DegenerateDensityError",
    "DiscreteDistribution",
    "DomainMap",
    "EmpiricalHistogram",
    "EmptySideError",
    "EstimationInfeasibleError",
    "FitConfig",
    "FitResult",
    "FlowField",
    "GreenCheck",
    "IllConditionedFitError",
    "InsufficientDataError",
    "InvalidArgumentError",
    "Legs",
    "LinearProgram",
    "LpSolution",
    "MarginalDensity",
    "MarginalSpec",
    "ModelError",
    "MonomialBasis",
    "NatCopulaError",
    "NumericalDomainError",
    "ParseError",
    "PriceLevel",
    "QuadratureRule",
    "SolverStallError",
    "TransportPlan",
    "UniformDensity",
    "VelocityField",
    "as_flow_field",
    "assemble_lp",
    "bin_levels",
    "cdf_field",
    "circulation",
    "circulation_legs",
    "clamp_breakpoints",
    "composite_rule",
    "compute_integrals",
    "copula_density",
    "correlation_ct",
    "density_field",
    "discretize",
    "estimate_copula",
    "field_from_potential",
    "fit_marginal",
    "flux",
    "flux_legs",
    "gauss_legendre_rule",
    "green_check",
    "hermite",
    "integrate_1d",
    "integrate_2d",
    "interior_circulation",
    "load_csv",
    "ma_smooth",
    "marginal_deviation",
    "normalize",
    "raw_density",
    "scale_deviation",
    "solve",
    "solve_ot_1d",
    "solve_ot_lp",
    "total_correlation",
    "velocity_field",
    "wasserstein_cost",
    "write_csv",
]
