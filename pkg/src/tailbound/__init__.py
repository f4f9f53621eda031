"""tailbound: instance-dependent tail bounds for finite empirical processes.

Computes Chernoff confidence radii T_r(f) from exact cumulant generating
functions, class deviation coefficients w_r, Orlicz-norm machinery with
closed-form exponential-type bounds, the rank-k Gaussian spectral bound, and
deflated generic-chaining bounds with replayable certificates. A seeded Monte
Carlo harness empirically verifies every probabilistic guarantee.
"""

from .numerics import NumericError
from .cgf import (
    CENTERING_TOL,
    CgfOracle,
    DiscreteDistribution,
    TabulatedFunction,
    cgf_discrete,
    check_T_properties,
    rate_bound_T,
)
from .orlicz import (
    OrliczGenerator,
    OrliczNormValue,
    UnsupportedGeneratorError,
    bernstein_phi_star,
    conversion_factor_M,
    exp_moment_integral,
    make_generator,
    orlicz_norm,
    wr_exponential_type,
    wr_quadrature_bound,
)
from .gaussian import (
    GaussianBoundReport,
    GaussianModel,
    LinearFunctional,
    cgf_norm,
    gaussian_cgf_oracle,
    gaussian_class_wr,
    gaussian_instance_bound,
    optimal_rank,
)
from .chaining import (
    ChainBoundReport,
    DeflatedSet,
    DeflationPlan,
    FunctionFamily,
    OptimizeResult,
    build_deflation,
    cgf_functional_norm,
    class_wr,
    deflate,
    epsilon_ell,
    extremal_difference,
    gamma_functional,
    optimize_deflation,
    replay_certificate,
    theorem_main_bound,
    trivial_plan,
    validate_plan,
)
from .verify import TrialPlan, VerificationReport, run_trials, sweep

__version__ = "0.1.0"

__all__ = [
    "CENTERING_TOL",
    "CgfOracle",
    "ChainBoundReport",
    "DeflatedSet",
    "DeflationPlan",
    "DiscreteDistribution",
    "FunctionFamily",
    "GaussianBoundReport",
    "GaussianModel",
    "LinearFunctional",
    "NumericError",
    "OptimizeResult",
    "OrliczGenerator",
    "OrliczNormValue",
    "TabulatedFunction",
    "TrialPlan",
    "UnsupportedGeneratorError",
    "VerificationReport",
    "bernstein_phi_star",
    "build_deflation",
    "cgf_discrete",
    "cgf_functional_norm",
    "cgf_norm",
    "check_T_properties",
    "class_wr",
    "conversion_factor_M",
    "deflate",
    "epsilon_ell",
    "exp_moment_integral",
    "extremal_difference",
    "gamma_functional",
    "gaussian_cgf_oracle",
    "gaussian_class_wr",
    "gaussian_instance_bound",
    "make_generator",
    "optimal_rank",
    "optimize_deflation",
    "orlicz_norm",
    "rate_bound_T",
    "replay_certificate",
    "run_trials",
    "sweep",
    "theorem_main_bound",
    "trivial_plan",
    "validate_plan",
    "wr_exponential_type",
    "wr_quadrature_bound",
]
