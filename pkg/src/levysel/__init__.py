"""Two-stage quasi-likelihood estimation and model selection for ergodic SDEs
driven by standardized Levy noise sampled at high frequency.

The workflow: simulate or load a path (`sde`), fit scale then drift candidates
by Gaussian quasi-likelihood (`fit`), score them with the information criteria
(`criteria`), pick winners stepwise (`selection`), and study selection
frequencies against their limit law (`experiment`, `limits`).
"""

from .criteria import (
    DEFAULT_TRUNC_KAPPA,
    DriftCriterion,
    ScaleCriterion,
    drift_criterion,
    free_energy_drift,
    free_energy_scale,
    modified_scale_penalty,
    scale_criterion,
    scale_criterion_detail,
    trunc_threshold,
)
from .errors import (
    DataError,
    DegenerateScaleError,
    ExplosionError,
    FitError,
    LevyselError,
    NumericalError,
    QuadratureError,
    SingularMatrixError,
    UsageError,
)
from .experiment import (
    CRITERION_PAIRS,
    ExperimentConfig,
    FrequencyTable,
    GridBlock,
    ReferenceComparison,
    benchmark_experiment,
    compare_to_reference,
    run_experiment,
)
from .fit import (
    DEFAULT_OPT,
    ConfidenceIntervals,
    FitResult,
    OptConfig,
    SandwichMatrices,
    StageFit,
    confidence_interval,
    empirical_matrices,
    fit_drift,
    fit_model,
    fit_scale,
    nu_hats,
    scale_stage,
)
from .gqlf import h1, h1_gradient, h2, h2_gradient, h2_star, scale_squares
from .limits import (
    LimitInputs,
    NestingMap,
    TailProbability,
    asymptotic_selection_prob,
    builtin_nesting,
    long_run_drift_inputs,
    long_run_scale_inputs,
    nesting_eigenvalues,
    weighted_chisq_tail,
)
from .models import (
    CandidateModel,
    Coefficient,
    available_candidates,
    registry,
    resolve_candidates,
)
from .noise import (
    BilateralGammaNoise,
    CumulantRates,
    GaussianNoise,
    LevySpec,
    NigNoise,
    cumulant_rates,
    increments,
    sample_cumulants,
    spec_from_config,
    spec_to_config,
    standardization_gap,
)
from .presets import (
    TRUE_ALPHA,
    TRUE_GAMMA,
    TRUE_MODEL,
    case_noise,
    default_candidates,
)
from .reference import ReferenceTable, benchmark_reference
from .rng import RngStream, replication_stream
from .sde import EXPLOSION_GUARD, PathMeta, SamplePath, TrueModel, euler_path
from .selection import (
    SelectionOutcome,
    select_drift,
    select_scale,
    stepwise_select,
    stepwise_select_multi,
)

__version__ = "0.1.0"

__all__ = [
    "BilateralGammaNoise",
    "CRITERION_PAIRS",
    "CandidateModel",
    "Coefficient",
    "ConfidenceIntervals",
    "CumulantRates",
    "DEFAULT_OPT",
    "DEFAULT_TRUNC_KAPPA",
    "DataError",
    "DegenerateScaleError",
    "DriftCriterion",
    "EXPLOSION_GUARD",
    "ExperimentConfig",
    "ExplosionError",
    "FitError",
    "FitResult",
    "FrequencyTable",
    "GaussianNoise",
    "GridBlock",
    "LevySpec",
    "LevyselError",
    "LimitInputs",
    "NestingMap",
    "NigNoise",
    "NumericalError",
    "OptConfig",
    "PathMeta",
    "QuadratureError",
    "ReferenceComparison",
    "ReferenceTable",
    "RngStream",
    "SamplePath",
    "SandwichMatrices",
    "ScaleCriterion",
    "SelectionOutcome",
    "SingularMatrixError",
    "StageFit",
    "TRUE_ALPHA",
    "TRUE_GAMMA",
    "TRUE_MODEL",
    "TailProbability",
    "TrueModel",
    "UsageError",
    "asymptotic_selection_prob",
    "available_candidates",
    "benchmark_experiment",
    "benchmark_reference",
    "builtin_nesting",
    "case_noise",
    "compare_to_reference",
    "confidence_interval",
    "cumulant_rates",
    "default_candidates",
    "drift_criterion",
    "empirical_matrices",
    "euler_path",
    "fit_drift",
    "fit_model",
    "fit_scale",
    "free_energy_drift",
    "free_energy_scale",
    "h1",
    "h1_gradient",
    "h2",
    "h2_gradient",
    "h2_star",
    "increments",
    "long_run_drift_inputs",
    "long_run_scale_inputs",
    "modified_scale_penalty",
    "nesting_eigenvalues",
    "nu_hats",
    "registry",
    "replication_stream",
    "resolve_candidates",
    "run_experiment",
    "sample_cumulants",
    "scale_criterion",
    "scale_criterion_detail",
    "scale_squares",
    "scale_stage",
    "select_drift",
    "select_scale",
    "spec_from_config",
    "spec_to_config",
    "standardization_gap",
    "stepwise_select",
    "stepwise_select_multi",
    "trunc_threshold",
    "weighted_chisq_tail",
]
