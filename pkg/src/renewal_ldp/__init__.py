"""Large-deviation machinery for discrete-time renewal-reward models.

The package covers the pipeline from model definition to empirical
verification: exact partition functions through the renewal recursion,
tilted growth rates, rate functions for the constrained and free laws,
exact finite-horizon reward distributions on a lattice, reproducible
Monte Carlo estimation, and two counterexamples showing where the free
law escapes a full large deviation principle.
"""

from ._core import BACKEND
from .errors import (
    BudgetError,
    ConfigError,
    ConvergenceError,
    EligibilityError,
    ModelValidationError,
    RenewalLdpError,
)
from .kernel import (
    LogSequence,
    LogWeightSequence,
    SandwichReport,
    bisect_growth,
    log_survival_array,
    partition_constrained,
    partition_free,
    partition_sandwich,
    psi_rate,
    solve_renewal,
)
from .lattice import (
    LatticeMeasure,
    LatticeSpec,
    OpenConvexReport,
    SupermultReport,
    empirical_rate,
    exact_constrained,
    exact_free,
    open_convex_counterexample,
    prob_box,
    supermult_check,
)
from .model import (
    CauchyNoise,
    GeometricTail,
    Potential,
    RenewalModel,
    RewardMap,
    TailExponents,
    ValidationReport,
    WaitingDistribution,
    dump_model,
    frobenius_horizon,
    growth_witness,
    load_model,
    model_from_dict,
    model_to_dict,
    require_valid,
    tail_exponents,
    validate,
)
from .montecarlo import (
    CauchyReport,
    PathSample,
    WeightedEstimate,
    cauchy_counterexample,
    estimate_prob,
    resolve_workers,
    sample_paths,
)
from .rate import (
    BiconjugateReport,
    RateKind,
    RateValue,
    biconjugate_check,
    rate,
    rate_curve,
    rate_minimum,
)
from .tilt import TiltResult, ZFunction, z_graph, z_of

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BiconjugateReport",
    "BudgetError",
    "CauchyNoise",
    "CauchyReport",
    "ConfigError",
    "ConvergenceError",
    "EligibilityError",
    "GeometricTail",
    "LatticeMeasure",
    "LatticeSpec",
    "LogSequence",
    "LogWeightSequence",
    "ModelValidationError",
    "OpenConvexReport",
    "PathSample",
    "Potential",
    "RateKind",
    "RateValue",
    "RenewalLdpError",
    "RenewalModel",
    "RewardMap",
    "SandwichReport",
    "SupermultReport",
    "TailExponents",
    "TiltResult",
    "ValidationReport",
    "WaitingDistribution",
    "WeightedEstimate",
    "ZFunction",
    "__version__",
    "biconjugate_check",
    "bisect_growth",
    "cauchy_counterexample",
    "dump_model",
    "empirical_rate",
    "estimate_prob",
    "exact_constrained",
    "exact_free",
    "frobenius_horizon",
    "growth_witness",
    "load_model",
    "log_survival_array",
    "model_from_dict",
    "model_to_dict",
    "open_convex_counterexample",
    "partition_constrained",
    "partition_free",
    "partition_sandwich",
    "prob_box",
    "psi_rate",
    "rate",
    "rate_curve",
    "rate_minimum",
    "require_valid",
    "resolve_workers",
    "sample_paths",
    "solve_renewal",
    "supermult_check",
    "tail_exponents",
    "validate",
    "z_graph",
    "z_of",
]
