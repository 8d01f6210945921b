import numpy as np
import pytest

from interodds.errors import (
    BootstrapFailureError,
    NegativeVarianceError,
    TransformRangeError,
    UndefinedSynergyError,
)
from interodds.inference import (
    bootstrap_ci,
    ci_transform,
    delta_ci,
    measure_gradient,
    normal_quantile,
    parts_gradients,
)
from interodds.logit import CaseControlDataset, FitResult, FullParams, fit_logit
from interodds.measures import MeasureSpec, StructuralParams
from interodds.selfcheck import gradient_fd_error
from interodds.simulate import ConfounderModel, SimDesign, simulate

RUN2 = StructuralParams(np.log([2.0, 3.0, 1.5]), 2)


def make_fit(psi, sigma, q=0, kappa=None):
    psi = psi if isinstance(psi, StructuralParams) else StructuralParams(psi, 2)
    kappa = np.zeros(q + 1) if kappa is None else kappa
    return FitResult(
        params=FullParams(psi=psi, kappa=kappa),
        sigma_psi=np.asarray(sigma, dtype=float),
        loglik=-100.0,
        iterations=3,
        converged=True,
        gradient_norm=1e-12,
    )


# ------------------------------------------------------------------ gradients


def test_joint_gradient_at_null_is_all_ones():
    g = parts_gradients(StructuralParams.zeros(3), MeasureSpec(p=3, kind="OR"))
    assert g.joint.tolist() == [1.0] * 7


def test_baseline_gradient_vanishes_without_held_factors():
    g = parts_gradients(RUN2, MeasureSpec(p=2, kind="EOR", order=2))
    assert g.baseline.tolist() == [0.0, 0.0, 0.0]


def test_predicted_gradient_running_example():
    g = parts_gradients(RUN2, MeasureSpec(p=2, kind="EOR", order=2))
    assert np.allclose(g.predicted, [2.0, 3.0, 0.0], rtol=1e-12)


def test_measure_gradient_running_examples():
    d_or = measure_gradient(RUN2, MeasureSpec(p=2, kind="OR"))
    assert np.allclose(d_or, [9.0, 9.0, 9.0], rtol=1e-12)
    d_eor = measure_gradient(RUN2, MeasureSpec(p=2, kind="EOR", order=2))
    assert np.allclose(d_eor, [7.0, 6.0, 9.0], rtol=1e-12)


def test_measure_gradient_null_interaction_coordinate_only():
    d = measure_gradient(StructuralParams.zeros(2), MeasureSpec(p=2, kind="EOR", order=2))
    assert np.allclose(d, [0.0, 0.0, 1.0], rtol=1e-12)


def test_gradients_match_finite_differences():
    assert gradient_fd_error(points=30, seed=77) <= 1e-6


def test_joint_and_baseline_gradients_nonnegative():
    rng = np.random.default_rng(19)
    for _ in range(20):
        psi = StructuralParams(rng.uniform(-1.0, 1.0, 7), 3)
        spec = MeasureSpec(p=3, kind="AP", order=2, fixed={1: int(rng.integers(2))})
        g = parts_gradients(psi, spec)
        assert np.all(g.joint >= 0.0)
        assert np.all(g.baseline >= 0.0)
        assert np.all(np.isfinite(measure_gradient(psi, spec)))


def test_si_gradient_undefined_where_measure_is():
    psi = StructuralParams(np.log([0.5, 0.6, 1.01]), 2)
    with pytest.raises(UndefinedSynergyError):
        measure_gradient(psi, MeasureSpec(p=2, kind="SI", order=2))


def test_predicted_gradient_matches_double_sum_form():
    """Closed-form prediction gradient vs its double-sum origin.

    Summing each increment's gradient (an alternating sum of OR times
    downset indicator) over every subpattern below the truncation order
    must reproduce the binomial-coefficient form after the interchange of
    summation.
    """
    from interodds.measures import odds_ratio
    from interodds.patterns import downset_indicator

    rng = np.random.default_rng(23)
    for _ in range(10):
        p = int(rng.integers(2, 5))
        psi = StructuralParams(rng.uniform(-0.8, 0.8, (1 << p) - 1), p)
        while True:
            kmask = int(rng.integers(1 << p))
            if kmask.bit_count() < p:
                break
        fixed = {j: int(rng.integers(2)) for j in range(p) if (kmask >> j) & 1}
        varying = [j for j in range(p) if j not in fixed]
        nj = len(varying)
        order = int(rng.integers(1, nj + 1))
        spec = MeasureSpec(p=p, kind="AP", order=order, fixed=fixed)
        g = parts_gradients(psi, spec)

        expected = np.zeros((1 << p) - 1)
        for u in range(1 << nj):
            if u.bit_count() > order - 1:
                continue
            for w in range(1 << nj):
                if w & ~u:
                    continue
                bits = [0] * p
                for j, level in fixed.items():
                    bits[j] = level
                for i, j in enumerate(varying):
                    bits[j] = (w >> i) & 1
                sign = (-1.0) ** (u.bit_count() - w.bit_count())
                expected = expected + sign * odds_ratio(psi, bits) * downset_indicator(bits)
        assert np.allclose(g.predicted, expected, rtol=1e-10, atol=1e-12)


def test_delta_ci_or_se_is_classic_log_or_se():
    """Joint-OR SE on the log scale is the downset quadratic form."""
    rng = np.random.default_rng(24)
    psi = StructuralParams(rng.uniform(-0.5, 0.5, 7), 3)
    root = rng.normal(0, 0.1, (7, 7))
    sigma = root @ root.T
    fit = make_fit(psi, sigma)
    rep = delta_ci(fit, MeasureSpec(p=3, kind="OR"))
    ones = np.ones(7)
    assert np.isclose(rep.se_transformed, np.sqrt(ones @ sigma @ ones), rtol=1e-12)


# ----------------------------------------------------------------- transforms


def test_transform_shapes():
    ap = ci_transform("AP")
    assert ap.apply(0.0) == 0.0
    assert np.isclose(ap.apply(0.5), np.log(3.0), rtol=1e-15)
    si = ci_transform("SI")
    assert si.apply(1.0) == 0.0
    assert ci_transform("EOR").name == "identity"
    assert ci_transform("OR").name == "log"


@pytest.mark.parametrize(
    "kind,values",
    [
        ("EOR", np.linspace(-30, 30, 13)),
        ("AP", np.linspace(-0.999, 0.999, 13)),
        ("SI", np.geomspace(1e-4, 1e4, 13)),
        ("OR", np.geomspace(1e-4, 1e4, 13)),
    ],
)
def test_transform_round_trip(kind, values):
    tr = ci_transform(kind)
    for x in values:
        assert abs(tr.invert(tr.apply(float(x))) - x) <= 1e-12 * max(1.0, abs(x))
        assert tr.derivative(float(x)) > 0.0


def test_transform_range_errors():
    with pytest.raises(TransformRangeError):
        ci_transform("AP").apply(1.0)
    with pytest.raises(TransformRangeError):
        ci_transform("AP").apply(-1.5)
    with pytest.raises(TransformRangeError):
        ci_transform("SI").apply(0.0)
    with pytest.raises(TransformRangeError):
        ci_transform("SI").apply(-2.0)


def test_normal_quantile():
    assert abs(normal_quantile(0.975) - 1.959963984540054) < 1e-9
    assert abs(normal_quantile(0.5)) < 1e-12
    assert abs(normal_quantile(0.025) + normal_quantile(0.975)) < 1e-12
    with pytest.raises(ValueError):
        normal_quantile(1.0)


# ------------------------------------------------------------------- delta CI


def test_delta_ci_collapses_with_zero_variance():
    fit = make_fit(RUN2, np.zeros((3, 3)))
    rep = delta_ci(fit, MeasureSpec(p=2, kind="AP", order=2))
    assert rep.ci_low == rep.point == rep.ci_high
    assert rep.se_transformed == 0.0
    assert rep.method == "DELTA"


def test_delta_ci_requires_converged_fit():
    fit = make_fit(RUN2, np.eye(3))
    fit.converged = False
    with pytest.raises(ValueError):
        delta_ci(fit, MeasureSpec(p=2, kind="AP", order=2))


def test_delta_ci_negative_variance_detected():
    fit = make_fit(RUN2, -np.eye(3))
    with pytest.raises(NegativeVarianceError):
        delta_ci(fit, MeasureSpec(p=2, kind="EOR", order=2))


def test_delta_ci_ordering_and_ranges():
    rng = np.random.default_rng(21)
    for _ in range(25):
        psi = StructuralParams(rng.uniform(0.1, 0.8, 3), 2)
        root = rng.normal(0, 0.2, (3, 3))
        fit = make_fit(psi, root @ root.T)
        for kind, order in (("OR", None), ("EOR", 2), ("AP", 2), ("SI", 2)):
            spec = MeasureSpec(p=2, kind=kind, order=order)
            rep = delta_ci(fit, spec)
            assert rep.ci_low <= rep.point <= rep.ci_high
            if kind == "AP":
                assert -1.0 <= rep.ci_low <= rep.ci_high <= 1.0
            if kind in ("SI", "OR"):
                assert rep.ci_low > 0.0
            assert rep.se_transformed >= 0.0


def test_delta_ci_si_log_scale_equivariance():
    rng = np.random.default_rng(22)
    psi = StructuralParams(rng.uniform(0.2, 0.7, 3), 2)
    root = rng.normal(0, 0.15, (3, 3))
    fit = make_fit(psi, root @ root.T)
    rep = delta_ci(fit, MeasureSpec(p=2, kind="SI", order=2), alpha=0.05)
    z = normal_quantile(0.975)
    center = float(np.log(rep.point))
    assert rep.ci_low == float(np.exp(center - z * rep.se_transformed))
    assert rep.ci_high == float(np.exp(center + z * rep.se_transformed))


def test_delta_ci_notes_ap_tie():
    # psi = 0 ties joint and predicted at 1 for order 1
    fit = make_fit(StructuralParams.zeros(2), 0.01 * np.eye(3))
    rep = delta_ci(fit, MeasureSpec(p=2, kind="AP", order=1))
    assert rep.note is not None
    rep2 = delta_ci(fit, MeasureSpec(p=2, kind="AP", order=2))
    assert rep2.note is not None


def test_delta_ci_alpha_validation():
    fit = make_fit(RUN2, np.eye(3) * 0.01)
    with pytest.raises(ValueError):
        delta_ci(fit, MeasureSpec(p=2, kind="AP", order=2), alpha=1.2)


# ----------------------------------------------------------------- bootstrap


def boot_dataset(seed=0, n0=400, n1=400):
    design = SimDesign(
        p=2,
        q=1,
        psi_true=RUN2,
        kappa_true=np.array([-0.6, 0.3]),
        exposure_probs=np.array([0.4, 0.35]),
        n0=n0,
        n1=n1,
        seed=seed,
        z_models=(ConfounderModel.normal(),),
    )
    return simulate(design)


def test_bootstrap_deterministic_given_seed():
    data = boot_dataset()
    spec = MeasureSpec(p=2, kind="AP", order=2)
    rep1 = bootstrap_ci(data, spec, n_boot=200, seed=42)
    rep2 = bootstrap_ci(data, spec, n_boot=200, seed=42)
    assert (rep1.ci_low, rep1.ci_high, rep1.point) == (
        rep2.ci_low,
        rep2.ci_high,
        rep2.point,
    )
    rep3 = bootstrap_ci(data, spec, n_boot=200, seed=43)
    assert (rep1.ci_low, rep1.ci_high) != (rep3.ci_low, rep3.ci_high)


def test_bootstrap_requires_enough_replicates():
    data = boot_dataset()
    with pytest.raises(ValueError):
        bootstrap_ci(data, MeasureSpec(p=2, kind="AP", order=2), n_boot=100)


def test_bootstrap_report_fields():
    data = boot_dataset(seed=5)
    fit = fit_logit(data)
    spec = MeasureSpec(p=2, kind="OR")
    rep = bootstrap_ci(data, spec, n_boot=200, seed=1, base_fit=fit)
    assert rep.method == "BOOTSTRAP_PERCENTILE"
    assert rep.n_boot == 200
    assert rep.n_failed == 0
    assert rep.ci_low <= rep.point <= rep.ci_high
    from interodds.measures import measure

    assert rep.point == measure(fit.params.psi, spec)


def test_bootstrap_too_many_failures():
    # one exposed record per class: resamples that drop either one give a
    # zero cell, the coefficient diverges, and the replicate fails
    rng = np.random.default_rng(7)
    n_half = 15
    y = np.repeat([0, 1], n_half).astype(np.int8)
    v = np.zeros(2 * n_half, dtype=np.int8)
    v[0] = 1
    v[n_half] = 1
    data = CaseControlDataset(v.reshape(-1, 1), np.zeros((2 * n_half, 0)), y)
    with pytest.raises(BootstrapFailureError):
        bootstrap_ci(data, MeasureSpec(p=1, kind="EOR", order=1), n_boot=200, seed=3)
