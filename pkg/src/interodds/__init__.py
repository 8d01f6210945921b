"""Additive odds-scale measures of joint effects and interaction.

Estimates the excess odds ratio, attributable proportion and synergy
index among binary risk factors from case-control data: a saturated
logistic model is fitted by maximum likelihood, odds ratios are expanded
additively into marginal and interaction increments, and confidence
intervals come from the delta method with analytic gradients (with a
stratified percentile bootstrap as an independent alternative).
"""

from .errors import (
    BootstrapFailureError,
    ConvergenceError,
    CsvParseError,
    EmptyClassError,
    InterOddsError,
    NegativeVarianceError,
    NonBinaryFactorError,
    OrderRangeError,
    PrevalenceError,
    SeparationError,
    SingularDesignError,
    TransformRangeError,
    UndefinedSynergyError,
)
from .patterns import (
    MAX_FACTORS,
    PatternIndex,
    alternating_binomial_sum,
    alternating_sign,
    downset_indicator,
    pattern_index,
    subpatterns,
)
from .measures import (
    KINDS,
    MeasureParts,
    MeasureSpec,
    StructuralParams,
    canonical_kind,
    excess_or,
    excess_or_explicit,
    measure,
    measure_parts,
    odds_ratio,
    or_increment,
    predicted_or,
    predicted_or_increments,
)
from .logit import (
    CaseControlDataset,
    FitOptions,
    FitResult,
    FullParams,
    design_row,
    fit_design,
    fit_logit,
    loglik_and_derivatives,
    loglik_score_info,
)
from .inference import (
    EstimateReport,
    PartsGradients,
    Transform,
    bootstrap_ci,
    ci_transform,
    delta_ci,
    measure_gradient,
    normal_quantile,
    parts_gradients,
)
from .simulate import ConfounderModel, SimDesign, simulate, true_measure
from .dataio import (
    load_csv,
    parse_design_file,
    parse_measure_token,
    psi_coordinate_names,
    write_csv,
)
from .selfcheck import run_all as run_self_checks

__version__ = "0.1.0"

__all__ = [
    "BootstrapFailureError",
    "CaseControlDataset",
    "ConfounderModel",
    "ConvergenceError",
    "CsvParseError",
    "EmptyClassError",
    "EstimateReport",
    "FitOptions",
    "FitResult",
    "FullParams",
    "InterOddsError",
    "KINDS",
    "MAX_FACTORS",
    "MeasureParts",
    "MeasureSpec",
    "NegativeVarianceError",
    "NonBinaryFactorError",
    "OrderRangeError",
    "PatternIndex",
    "PartsGradients",
    "PrevalenceError",
    "SeparationError",
    "SimDesign",
    "SingularDesignError",
    "StructuralParams",
    "Transform",
    "TransformRangeError",
    "UndefinedSynergyError",
    "alternating_binomial_sum",
    "alternating_sign",
    "bootstrap_ci",
    "canonical_kind",
    "ci_transform",
    "delta_ci",
    "design_row",
    "downset_indicator",
    "excess_or",
    "excess_or_explicit",
    "fit_design",
    "fit_logit",
    "load_csv",
    "loglik_and_derivatives",
    "loglik_score_info",
    "measure",
    "measure_gradient",
    "measure_parts",
    "normal_quantile",
    "odds_ratio",
    "or_increment",
    "parse_design_file",
    "parse_measure_token",
    "pattern_index",
    "parts_gradients",
    "predicted_or",
    "predicted_or_increments",
    "psi_coordinate_names",
    "run_self_checks",
    "simulate",
    "subpatterns",
    "true_measure",
    "write_csv",
]
