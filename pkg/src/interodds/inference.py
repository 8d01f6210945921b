"""Confidence intervals for the odds-scale measures.

The delta method propagates the asymptotic covariance of the structural
coefficients through a measure: the gradient of the measure with respect
to those coefficients is assembled analytically from the gradients of its
three odds-ratio parts, the variance is the usual quadratic form, and the
interval is built symmetrically on a variance-stabilizing scale and mapped
back.  A stratified percentile bootstrap is provided as an independent,
slower route to the same interval.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import comb, sqrt
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtri

from .errors import (
    BootstrapFailureError,
    InterOddsError,
    NegativeVarianceError,
    TransformRangeError,
    UndefinedSynergyError,
)
from .logit import CaseControlDataset, FitOptions, FitResult, fit_design, fit_logit
from .measures import (
    MeasureSpec,
    StructuralParams,
    _spread,
    _validate_fixed,
    measure,
    measure_parts,
)
from .patterns import pattern_index

# Relative gap below which the attributable-proportion denominator is
# treated as tied; the gradient then follows the joint-OR branch.
AP_TIE_RTOL = 1e-9


def normal_quantile(beta: float) -> float:
    """Standard normal quantile (rational-approximation implementation)."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"quantile level must be in (0, 1), got {beta}")
    return float(ndtri(beta))


@lru_cache(maxsize=4096)
def _full_indicator(p: int, mask: int) -> np.ndarray:
    idx = pattern_index(p)
    out = ((idx.masks & ~mask) == 0).astype(float)
    out.setflags(write=False)
    return out


@dataclass(eq=False)
class PartsGradients:
    """Gradients of the measure parts w.r.t. the structural coefficients."""

    joint: np.ndarray
    predicted: np.ndarray
    baseline: np.ndarray


def parts_gradients(params: StructuralParams, spec: MeasureSpec) -> PartsGradients:
    """Analytic gradients of (joint, predicted, baseline) odds ratios.

    Each odds ratio differentiates to itself times the 0/1 indicator of
    the coordinates it sums over; the predicted part is the matching
    linear combination over the subpatterns below the truncation order.
    """
    varying, fixed_mask = _validate_fixed(params.p, spec.fixed)
    nj = len(varying)
    table = params.or_table

    full1 = _spread((1 << nj) - 1, varying) | fixed_mask
    joint = float(table[full1]) * _full_indicator(params.p, full1)
    baseline = float(table[fixed_mask]) * _full_indicator(params.p, fixed_mask)

    t = spec.effective_order - 1
    predicted = np.zeros((1 << params.p) - 1)
    for w in range(1 << nj):
        k = w.bit_count()
        if k > t:
            continue
        full = _spread(w, varying) | fixed_mask
        coef = (-1.0) ** (t - k) * comb(nj - 1 - k, t - k)
        predicted = predicted + coef * float(table[full]) * _full_indicator(
            params.p, full
        )
    return PartsGradients(joint=joint, predicted=predicted, baseline=baseline)


def measure_gradient(params: StructuralParams, spec: MeasureSpec) -> np.ndarray:
    """Gradient of the measure w.r.t. the structural coefficients.

    Chain rule through the three parts.  The attributable proportion is
    not differentiable where joint and predicted tie; the joint-branch
    subgradient is used there (ties have measure zero for continuous
    estimates).
    """
    parts = measure_parts(params, spec)
    g = parts_gradients(params, spec)
    a, b, c = parts.joint, parts.predicted, parts.baseline
    if spec.kind == "OR":
        return (1.0 / c) * g.joint - (a / c**2) * g.baseline
    if spec.kind == "EOR":
        return (1.0 / c) * (g.joint - g.predicted) - ((a - b) / c**2) * g.baseline
    if spec.kind == "AP":
        if a >= b:
            return (b / a**2) * g.joint - (1.0 / a) * g.predicted
        return (1.0 / b) * g.joint - (a / b**2) * g.predicted
    if not (a > c and b > c):
        raise UndefinedSynergyError(
            "synergy index gradient needs joint and predicted odds ratios "
            f"above the baseline; got joint={a:.6g}, predicted={b:.6g}, "
            f"baseline={c:.6g}"
        )
    d = b - c
    return (
        (1.0 / d) * g.joint
        - ((a - c) / d**2) * g.predicted
        + ((a - b) / d**2) * g.baseline
    )


@dataclass(eq=False)
class Transform:
    """Monotone increasing map from a measure's range to the real line."""

    name: str
    apply: Callable[[float], float]
    invert: Callable[[float], float]
    derivative: Callable[[float], float]


def _identity() -> Transform:
    return Transform("identity", lambda x: x, lambda y: y, lambda x: 1.0)


def _atanh_like() -> Transform:
    def apply(x):
        if not -1.0 < x < 1.0:
            raise TransformRangeError(
                f"value {x} outside the open interval (-1, 1)"
            )
        return float(np.log((1.0 + x) / (1.0 - x)))

    def invert(y):
        return float(np.tanh(0.5 * y))

    def derivative(x):
        if not -1.0 < x < 1.0:
            raise TransformRangeError(
                f"value {x} outside the open interval (-1, 1)"
            )
        return 2.0 / (1.0 - x * x)

    return Transform("atanh_like", apply, invert, derivative)


def _log() -> Transform:
    def apply(x):
        if not x > 0.0:
            raise TransformRangeError(f"value {x} outside (0, inf)")
        return float(np.log(x))

    def derivative(x):
        if not x > 0.0:
            raise TransformRangeError(f"value {x} outside (0, inf)")
        return 1.0 / x

    return Transform("log", apply, lambda y: float(np.exp(y)), derivative)


def ci_transform(kind: str) -> Transform:
    """Variance-stabilizing transform used for each measure kind.

    Identity for the excess odds ratio, ``log((1 + x)/(1 - x))`` for the
    attributable proportion, and the logarithm for the synergy index and
    the joint odds ratio.
    """
    kind = str(kind).upper()
    if kind == "EOR":
        return _identity()
    if kind == "AP":
        return _atanh_like()
    if kind in ("SI", "OR", "OR_JOINT"):
        return _log()
    raise ValueError(f"unknown measure kind {kind!r}")


@dataclass
class EstimateReport:
    """Point estimate with a confidence interval and its provenance."""

    kind: str
    point: float
    transform: str
    se_transformed: float
    ci_low: float
    ci_high: float
    alpha: float
    method: str  # "DELTA" or "BOOTSTRAP_PERCENTILE"
    n_boot: Optional[int] = None
    n_failed: Optional[int] = None
    note: Optional[str] = None


def delta_ci(fit: FitResult, spec: MeasureSpec, alpha: float = 0.05) -> EstimateReport:
    """Delta-method confidence interval for a measure at the fitted model.

    The variance of the estimate is the quadratic form of the analytic
    gradient with the structural covariance block; the interval is
    symmetric on the transformed scale and mapped back, so it respects
    the measure's natural range.

    Raises
    ------
    ValueError
        Fit not converged, dimension mismatch, or alpha outside (0, 1).
    NegativeVarianceError
        Quadratic form below -1e-10 (defective covariance matrix).
    """
    if not fit.converged:
        raise ValueError("delta_ci requires a converged fit")
    if fit.params.psi.p != spec.p:
        raise ValueError("spec factor count does not match the fit")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")

    psi_hat = fit.params.psi
    point = measure(psi_hat, spec)
    grad = measure_gradient(psi_hat, spec)
    var = float(grad @ fit.sigma_psi @ grad)
    if var < -1e-10:
        raise NegativeVarianceError(
            f"delta-method variance {var:.3g} is negative; covariance defect"
        )
    sigma = sqrt(max(var, 0.0))

    tr = ci_transform(spec.kind)
    se_t = tr.derivative(point) * sigma
    z = normal_quantile(1.0 - alpha / 2.0)
    center = tr.apply(point)
    if se_t == 0.0:
        ci_low = ci_high = point
    else:
        # monotone transforms preserve the ordering exactly; the clamp only
        # absorbs last-ulp rounding of the transform round trip
        ci_low = min(tr.invert(center - z * se_t), point)
        ci_high = max(tr.invert(center + z * se_t), point)

    note = None
    if spec.kind == "AP":
        parts = measure_parts(psi_hat, spec)
        if abs(parts.joint - parts.predicted) < AP_TIE_RTOL * max(
            parts.joint, parts.predicted
        ):
            note = (
                "joint and predicted odds ratios are numerically tied; "
                "the gradient used the joint branch of the denominator"
            )
    return EstimateReport(
        kind=spec.kind,
        point=point,
        transform=tr.name,
        se_transformed=se_t,
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        method="DELTA",
        note=note,
    )


def bootstrap_ci(
    data: CaseControlDataset,
    spec: MeasureSpec,
    alpha: float = 0.05,
    n_boot: int = 1000,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    base_fit: Optional[FitResult] = None,
) -> EstimateReport:
    """Stratified percentile-bootstrap confidence interval.

    Records are resampled with replacement independently within cases and
    within controls, so every replicate keeps the original case/control
    counts (the retrospective design fixes them).  Each replicate draws
    from its own seed-sequence substream indexed by replicate number,
    which makes the result independent of execution order; replicates
    whose refit fails or whose measure is undefined are dropped and
    counted.  ``base_fit`` may supply the full-data fit (for the point
    estimate) when the caller already has one.

    Raises
    ------
    BootstrapFailureError
        More than 10% of replicates dropped.
    ValueError
        ``n_boot`` below 200 or alpha outside (0, 1).
    """
    if n_boot < 200:
        raise ValueError(f"need at least 200 bootstrap replicates, got {n_boot}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")

    if base_fit is None:
        base_fit = fit_logit(data, options=options)
    point = measure(base_fit.params.psi, spec)

    X = data.design_matrix
    y = data.outcome.astype(float)
    case_rows = np.flatnonzero(data.outcome == 1)
    control_rows = np.flatnonzero(data.outcome == 0)
    n1, n0 = len(case_rows), len(control_rows)

    children = np.random.SeedSequence(seed).spawn(n_boot)
    max_failures = int(0.10 * n_boot)
    values = []
    failed = 0
    for child in children:
        rng = np.random.default_rng(child)
        rows = np.concatenate(
            [
                case_rows[rng.integers(0, n1, size=n1)],
                control_rows[rng.integers(0, n0, size=n0)],
            ]
        )
        try:
            refit = fit_design(
                X[rows], y[rows], data.p, data.q, options=options, check_rank=False
            )
            values.append(measure(refit.params.psi, spec))
        except InterOddsError:
            failed += 1
            if failed > max_failures:
                raise BootstrapFailureError(
                    f"{failed} of {n_boot} bootstrap replicates failed "
                    "(limit is 10%)"
                )
    values = np.asarray(values)
    ci_low, ci_high = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0])
    return EstimateReport(
        kind=spec.kind,
        point=point,
        transform="identity",
        se_transformed=float(np.std(values, ddof=1)),
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        alpha=alpha,
        method="BOOTSTRAP_PERCENTILE",
        n_boot=n_boot,
        n_failed=failed,
    )
