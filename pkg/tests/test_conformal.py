"""Calibration engine: ranks, tau solvers, records, prediction rule."""

import math

import numpy as np
import pytest
from conftest import Z_95

from cp2 import (AdjustmentFunction, BallUnionBuilder, BallUnionFamily,
                 BoundMethod, BracketError, CalibratedMethod,
                 CalibrationRecord, CapabilityError, Dataset, DegenerateError,
                 DomainError, FixedWidthFamily, NumericalError,
                 ValidationError, adjustment_apply, anchor_inverse, calibrate,
                 compute_tau, conformal_quantile, dgp_sample, lambda_sup,
                 make_cp, make_cp2_hpd, make_cp2_pcp, make_cqr, make_dgp,
                 make_pcp, make_pi_yx, oracle_model, order_index, predict_set,
                 substream, theory_bounds)
from cp2.core.mixture import GaussianMixture


def test_order_index_frozen_cases():
    # ceil((1 - alpha)(n + 1)) worked by hand
    assert order_index(9, 0.1) == 9
    assert order_index(99, 0.1) == 90
    assert order_index(100, 0.1) == 91
    assert order_index(19, 0.05) == 19
    assert order_index(10, 0.5) == 6
    assert order_index(5, 0.05) == 6  # exceeds n: quantile is infinite
    with pytest.raises(DomainError):
        order_index(10, 0.0)
    with pytest.raises(DomainError):
        order_index(10, 1.0)
    with pytest.raises(DegenerateError):
        order_index(0, 0.1)


def test_conformal_quantile_against_sort_oracle():
    rng = substream(0, "cq")
    scores = rng.standard_normal(57)
    k = math.ceil(0.9 * 58)
    assert conformal_quantile(scores, 0.1) == sorted(scores)[k - 1]
    assert conformal_quantile(rng.standard_normal(5), 0.05) == math.inf
    with pytest.raises(DegenerateError):
        conformal_quantile(np.array([]), 0.1)
    with pytest.raises(DegenerateError):
        conformal_quantile(np.zeros((3, 2)), 0.1)
    with pytest.raises(NumericalError):
        conformal_quantile(np.array([1.0, math.nan]), 0.1)
    with pytest.raises(DomainError):
        conformal_quantile(scores, 0.1, mode="median")


def test_quantile_modes_agree_when_both_defined():
    rng = substream(1, "cq")
    for _ in range(30):
        n = int(rng.integers(3, 41))
        alpha = float(rng.uniform(1.0 / (n + 1), 0.9))
        scores = rng.standard_normal(n)
        mu = conformal_quantile(scores, alpha, "mu")
        cbar = conformal_quantile(scores, alpha, "cbar")
        assert mu == cbar


def test_cbar_rejects_small_alpha():
    with pytest.raises(DomainError):
        conformal_quantile(np.zeros(5), 0.05, "cbar")


def test_analytic_tau_on_gaussian_width():
    fam = FixedWidthFamily([0.0], pred=0.0)
    std = GaussianMixture([1.0], [[0.0]], [[1.0]])
    cases = [
        (AdjustmentFunction("linear"), Z_95),
        (AdjustmentFunction("additive"), Z_95),
        (AdjustmentFunction("exp"), math.log(Z_95)),
        (AdjustmentFunction("tan"), math.atan(Z_95)),
    ]
    for adj, want in cases:
        got = compute_tau(fam, adj, 0.1, mixture=std)
        assert got == pytest.approx(want, abs=1e-8), adj.kind


def test_analytic_tau_unreachable_mass():
    # a sigmoid anchor saturates below radius 1; mass 0.9 needs z_95
    fam = FixedWidthFamily([0.0], pred=0.0)
    std = GaussianMixture([1.0], [[0.0]], [[1.0]])
    with pytest.raises(BracketError):
        compute_tau(fam, AdjustmentFunction("sigmoid"), 0.1, mixture=std)


def test_monte_carlo_tau_closed_form():
    rng = substream(2, "mc")
    fam = BallUnionFamily([0.0], centers=rng.standard_normal(12))
    draws = rng.standard_normal(40)
    vals = np.sort(fam.lam_batch(draws))
    k = math.ceil(0.9 * 40)
    adj = AdjustmentFunction("linear")
    assert compute_tau(fam, adj, 0.1, draws=draws) == \
        anchor_inverse(adj, float(vals[k - 1]))
    adj = AdjustmentFunction("additive")
    assert compute_tau(fam, adj, 0.1, draws=draws) == \
        anchor_inverse(adj, float(vals[k - 1]))


def test_empirical_root_matches_closed_form():
    rng = substream(3, "mc")
    fam = BallUnionFamily([0.0], centers=rng.standard_normal(8))
    draws = rng.standard_normal(60)
    adj = AdjustmentFunction("linear")
    fast = compute_tau(fam, adj, 0.15, draws=draws)
    slow = compute_tau(fam, adj, 0.15, draws=draws, solver="empirical-root")
    assert slow == pytest.approx(fast, abs=1e-8)


def test_compute_tau_validation():
    fam = FixedWidthFamily([0.0], pred=0.0)
    std = GaussianMixture([1.0], [[0.0]], [[1.0]])
    with pytest.raises(DomainError):
        compute_tau(fam, AdjustmentFunction("trivial"), 0.1, mixture=std)
    with pytest.raises(DomainError):
        compute_tau(fam, AdjustmentFunction("linear"), 1.5, mixture=std)
    with pytest.raises(CapabilityError):
        compute_tau(fam, AdjustmentFunction("linear"), 0.1,
                    solver="monte-carlo")
    with pytest.raises(CapabilityError):
        compute_tau(fam, AdjustmentFunction("linear"), 0.1)
    with pytest.raises(DomainError):
        compute_tau(fam, AdjustmentFunction("linear"), 0.1, mixture=std,
                    solver="downhill")


def _toy_calibration(n=30, alpha=0.2, seed=5, variant="L"):
    dgp = make_dgp("bimodal1d")
    model = oracle_model(dgp)
    method = make_cp2_pcp(model, variant, m=10, m2=40)
    calib = dgp_sample(dgp, n, seed)
    return calibrate(calib, method, alpha, seed), calib, method


def test_calibration_permutation_invariance():
    cm, calib, method = _toy_calibration()
    rng = substream(9, "perm")
    perm = rng.permutation(len(calib))
    shuffled = Dataset(calib.x[perm], calib.y[perm], ids=calib.ids[perm])
    cm2 = calibrate(shuffled, method, 0.2, 5)
    assert cm2.quantile_v == cm.quantile_v
    by_id = {r.point_id: r for r in cm.records}
    for r in cm2.records:
        assert by_id[r.point_id] == r


def test_calibration_records_invert_consistently():
    cm, _, method = _toy_calibration()
    adj = method.adjustment
    for r in cm.records:
        assert adjustment_apply(adj, r.tau, r.score) == \
            pytest.approx(r.lam, rel=1e-9, abs=1e-12)
        assert r.lam >= 0.0  # ball-union conformity is a distance


def test_predict_set_deterministic():
    cm, _, _ = _toy_calibration()
    a = predict_set(cm, [2.0], 99)
    b = predict_set(cm, [2.0], 99)
    assert a.intervals == b.intervals and a.unbounded == b.unbounded


def test_infinite_quantile_yields_flagged_whole_line():
    dgp = make_dgp("hetero1d")
    model = oracle_model(dgp)
    cm = calibrate(dgp_sample(dgp, 5, 1), make_cp(model), 0.05, 1)
    assert cm.quantile_v == math.inf
    s = predict_set(cm, [0.5], 0)
    assert s.unbounded and s.contains(1e12)


def test_quantile_outside_response_domain():
    dgp = make_dgp("bimodal1d")
    model = oracle_model(dgp)
    method = BoundMethod("TAN", BallUnionBuilder(model, 5),
                         AdjustmentFunction("tan"),
                         tau_solver="monte-carlo", m2=20)
    cm = calibrate(dgp_sample(dgp, 12, 3), method, 0.2, 3)
    hi = CalibratedMethod(method, cm.alpha, cm.seed, cm.records, 1e9)
    s = predict_set(hi, [1.0], 0)
    assert s.unbounded
    lo = CalibratedMethod(method, cm.alpha, cm.seed, cm.records, -1e9)
    s = predict_set(lo, [1.0], 0)
    assert s.count == 0 and not s.unbounded
    # sanity: the thresholds really do fall outside the response range
    tau = cm.records[0].tau
    assert lambda_sup(method.adjustment, tau) < 1e9


def test_calibrate_validation():
    dgp = make_dgp("hetero1d")
    model = oracle_model(dgp)
    with pytest.raises(DomainError):
        calibrate(dgp_sample(dgp, 10, 0), make_cp(model), 1.2, 0)


def test_record_rejects_non_finite_fields():
    with pytest.raises(NumericalError):
        CalibrationRecord(0, math.inf, 1.0, 1.0)
    with pytest.raises(NumericalError):
        CalibrationRecord(0, 1.0, 1.0, math.nan)


def test_bound_method_validation():
    dgp = make_dgp("hetero1d")
    model = oracle_model(dgp)
    builder = BallUnionBuilder(model, 5)
    trivial, linear = AdjustmentFunction("trivial"), AdjustmentFunction("linear")
    with pytest.raises(ValidationError):
        BoundMethod("A", builder, trivial, tau_solver="monte-carlo")
    with pytest.raises(ValidationError):
        BoundMethod("B", builder, linear, tau_solver="none")
    with pytest.raises(ValidationError):
        BoundMethod("C", builder, linear, tau_solver="monte-carlo", m2=0)
    with pytest.raises(ValidationError):
        BoundMethod("D", builder, linear, tau_solver="gradient")
    with pytest.raises(ValidationError):
        BoundMethod("E", builder, trivial, quantile_mode="max")


def test_method_constructors():
    dgp = make_dgp("bimodal1d")
    model = oracle_model(dgp)
    assert make_cp(model).name == "CP"
    assert make_cp(model).adjustment.kind == "trivial"
    assert make_pcp(model, 7).builder.m == 7
    piyx = make_pi_yx(model, m=50)
    assert piyx.adjustment.kind == "constant" and piyx.m2 == 250
    assert make_cp2_pcp(model, "L").adjustment.kind == "linear"
    assert make_cp2_pcp(model, "D").adjustment.kind == "additive"
    with pytest.raises(ValidationError):
        make_cp2_pcp(model, "Q")
    hpd = make_cp2_hpd(model)
    assert hpd.adjustment.kind == "additive"
    assert hpd.tau_solver == "analytic"
    with pytest.raises(ValidationError):
        make_cqr()
    train = dgp_sample(dgp, 200, 11)
    cqr = make_cqr(train=train, alpha=0.1)
    assert cqr.quantile_mode == "cbar"
    assert cqr.builder.regressor.levels == (0.05, 0.95)
    assert make_cqr(train=train, alpha=0.1, multiplicative=True).name == "CQR-M"


def test_theory_bounds_edges():
    b = theory_bounds(0.1, 100, epsilon=0.0)
    assert b["phi"] == 0.0 and b["bennett_term"] == 1.0 and b["lemma_gate"]
    with pytest.raises(DomainError):
        theory_bounds(0.0, 100)
    with pytest.raises(DomainError):
        theory_bounds(0.1, 1)
    with pytest.raises(DomainError):
        theory_bounds(0.1, 100, epsilon=0.95)
    with pytest.raises(DomainError):
        theory_bounds(0.1, 100, epsilon=-0.1)
