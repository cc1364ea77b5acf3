import math

import numpy as np
import pytest

from nrmselect import (
    Dataset, DegenerateProblemError, LossModel, NrmProblem, gap_ball_thresholds, lambda_max,
    lambda_sequence, rank_bound_for_lambda, scaled_feasible_pair, selection_coefficients,
    solve_nrm, SolverOptions, numerical_rank,
)
from nrmselect.datagen import random_instance
from nrmselect.duality import theta_max
from nrmselect.selection import (
    EMPTY, INTERVAL, LOWER_BOUND, MEAN_SPECTRAL, STRICT, SelectionCoefficients, certified_region,
    exact_dual_certificate, gap_ball_certificate, operator_bound_sq, select,
)

from conftest import instance, loss_for


@pytest.mark.parametrize("rule", [MEAN_SPECTRAL, STRICT])
def test_gap_ball_thresholds_d0(D0, ls, rule):
    pair = scaled_feasible_pair(D0, ls, 2.0)
    thr = gap_ball_thresholds(D0, ls, pair, rule)
    np.testing.assert_allclose(thr, [2 + math.sqrt(2.3125), 1.5 + math.sqrt(2.3125)], rtol=1e-9)
    assert gap_ball_certificate(D0, ls, pair, rule).bound is None


def test_gap_ball_zero_gap_reduces_to_exact_dual(D0, ls):
    # at lambda > lambda_max, B = 0 and theta = y is the exact dual point
    from nrmselect.duality import FeasiblePair
    pair = FeasiblePair(np.zeros((2, 2)), np.array([3.0, 4.0]), np.array([3.0, 4.0]), 5.0)
    thr = gap_ball_thresholds(D0, ls, pair)
    # only the rounding guard separates the thresholds from sigma
    np.testing.assert_allclose(thr, [4.0, 3.0], rtol=1e-5)
    assert exact_dual_certificate(D0, pair.theta, 5.0).bound == 0
    assert gap_ball_certificate(D0, ls, pair).bound == 0


def test_gap_ball_slightly_above_lambda_max():
    data = instance(11, p=4, q=4, n=20, rank=1, noise=0.5)
    ls = LossModel.least_squares()
    lmax = lambda_max(data, ls)
    from nrmselect.duality import FeasiblePair
    tau = theta_max(data, ls)
    pair = FeasiblePair(np.zeros((4, 4)), data.response.copy(), tau, 1.05 * lmax)
    thr = gap_ball_thresholds(data, ls, pair)
    # gap of (0, y, tau) is zero up to rounding, so threshold_1 is lambda_max
    assert thr[0] == pytest.approx(lmax, rel=1e-5)
    assert gap_ball_certificate(data, ls, pair).bound == 0


def test_coefficients_d0(D0, ls):
    for rule in (MEAN_SPECTRAL, STRICT):
        coef = selection_coefficients(D0, ls, rule)
        assert coef.lambda_max == pytest.approx(4.0)
        np.testing.assert_allclose(coef.sigma, [4.0, 3.0])
        np.testing.assert_allclose(coef.a, [-25 / 16, -1.5])
        assert coef.b == pytest.approx(-4.5)
        assert coef.c == pytest.approx(14.0625)
        assert coef.d == pytest.approx(-1.0)


def test_coefficients_displayed_formula_oracle():
    """Least-squares coefficients against a literal transcription of the displayed formulas."""
    data = instance(2, p=5, q=3, n=30, noise=1.0)
    coef = selection_coefficients(data, LossModel.least_squares(), MEAN_SPECTRAL)
    y = data.response
    n = data.n
    M = np.einsum("i,ijk->jk", y, data.sensing)
    s = np.linalg.svd(M, compute_uv=False)
    lmax = s[0]
    S = sum(np.linalg.svd(X, compute_uv=False)[0] ** 2 for X in data.sensing)
    a = n * (lmax - s) ** 2 / (lmax ** 2 * S) - (np.linalg.norm(y) / lmax) ** 2
    b = (s.sum() - y @ y) / lmax
    u = np.array([np.sum(X * M) for X in data.sensing]) / lmax
    c = np.sum((y - u) ** 2)
    d = lmax - np.linalg.norm(y) * math.sqrt(S / n)
    np.testing.assert_allclose(coef.a, a, rtol=1e-10)
    assert coef.b == pytest.approx(b, rel=1e-10)
    assert coef.c == pytest.approx(c, rel=1e-10)
    assert coef.d == pytest.approx(d, rel=1e-10)


def test_strict_radius_is_never_looser():
    for seed in range(10):
        data = instance(seed, p=4, q=6, n=15)
        assert operator_bound_sq(data, STRICT) <= data.sum_sq_spectral * (1 + 1e-12)
        assert operator_bound_sq(data, STRICT) >= np.linalg.norm(data.flat, 2) ** 2 * (1 - 1e-12)


def test_coefficients_invariants():
    for seed in range(20):
        family = "huber" if seed % 2 else "least_squares"
        data = instance(seed, p=5, q=5, n=30, noise=3.0, family=family)
        coef = selection_coefficients(data, loss_for(family))
        assert np.all(np.diff(coef.a) >= -1e-12 * (1 + abs(coef.a[0])))
        assert np.all(np.diff(coef.sigma) <= 0)
        assert coef.c >= 0
        assert coef.lambda_max == coef.sigma[0]


def test_huber_equals_ls_without_clipping():
    # small responses and small residuals: nothing is clipped anywhere
    data, _ = random_instance(4, 4, 4, 20, 1, 0.01)
    scale = 0.5 / np.max(np.abs(data.response))
    data = Dataset(data.sensing, data.response * scale)
    _, s_ls = select(data, LossModel.least_squares())
    _, s_h = select(data, LossModel.huber(2.5))
    assert s_ls.entries == s_h.entries


def test_degenerate(ls):
    with pytest.raises(DegenerateProblemError):
        selection_coefficients(Dataset(np.ones((2, 2, 2)), [0.0, 0.0]), ls)


def test_sequence_d0(D0, ls):
    _, seq = select(D0, ls)
    assert [e.kind for e in seq.entries] == [EMPTY, EMPTY]
    assert rank_bound_for_lambda(seq, 3.0).bound is None
    assert rank_bound_for_lambda(seq, 4.5).bound == 0
    assert seq.lambda_max == pytest.approx(4.0)


def _coef(a, b, c):
    a = np.asarray(a, dtype=float)
    return SelectionCoefficients(
        lambda_max=10.0, tau=np.zeros(1), sigma=np.linspace(10, 1, a.size), a=a, b=b, c=c,
        d=0.0, sum_sq_spectral=1.0, operator_bound_sq=1.0,
    )


def test_sequence_cases():
    # a > 0: lower bound (b + delta) / a; a = 0 with b < 0: c / (-2b); a < 0: interval
    seq = lambda_sequence(_coef([1.0, 0.0, -1.0, -1.0], -3.0, 4.0))
    e1, e2, e3, e4 = seq.entries
    assert e1.kind == LOWER_BOUND and e1.lower == pytest.approx(-3 + math.sqrt(13))
    assert e2.kind == LOWER_BOUND and e2.lower == pytest.approx(4 / 6)
    assert e3.kind == INTERVAL
    assert (e3.lower, e3.upper) == pytest.approx(((-3 + math.sqrt(5)) / -1, (-3 - math.sqrt(5)) / -1))
    seq = lambda_sequence(_coef([0.0], 1.0, 4.0))
    assert seq.entries[0].kind == EMPTY
    seq = lambda_sequence(_coef([-1.0], 1.0, 4.0))
    assert seq.entries[0].kind == EMPTY


def test_sequence_lower_bound_clamped_at_zero():
    seq = lambda_sequence(_coef([1.0], 3.0, 0.0))
    # roots 0 and 6; quadratic positive beyond 6
    assert seq.entries[0].lower == pytest.approx(6.0)
    seq = lambda_sequence(_coef([1.0], -3.0, 0.0))
    assert seq.entries[0].lower == 0.0


def test_boundaries_are_quadratic_roots():
    for seed in range(30):
        family = "huber" if seed % 2 else "least_squares"
        data = instance(seed, p=6, q=6, n=80, rank=1, noise=0.05, family=family)
        coef = selection_coefficients(data, loss_for(family))
        seq = lambda_sequence(coef)
        for e in seq.defined():
            for v in e.boundaries():
                assert abs(coef.quadratic(e.k, v)) <= 1e-8 * (1 + abs(coef.c))


def test_certified_region_interior_satisfies_raw_rule():
    checked = 0
    for seed in range(40):
        data = instance(seed, p=6, q=6, n=80, rank=1, noise=0.05)
        ls = LossModel.least_squares()
        _, seq = select(data, ls)
        for e in seq.defined():
            hi = min(e.upper if e.upper is not None else math.inf, seq.lambda_max)
            lo = e.lower
            if not lo < hi:
                continue
            lam = 0.5 * (lo + hi)
            pair = scaled_feasible_pair(data, ls, lam)
            thr = gap_ball_thresholds(data, ls, pair)
            assert lam > thr[e.k - 1]
            checked += 1
    assert checked > 0


def test_monotone_lower_bound_certificates():
    data = instance(3, p=6, q=6, n=80, rank=1, noise=0.05)
    _, seq = select(data, LossModel.least_squares())
    lams = np.linspace(seq.lambda_max * 1.1, 1e-3, 200)
    bounds = [rank_bound_for_lambda(seq, l).bound for l in lams]
    only_lower = all(e.kind in (LOWER_BOUND, EMPTY) for e in seq.entries)
    if only_lower:
        seen = [b for b in bounds if b is not None]
        assert seen == sorted(seen)


def test_certified_region_capped():
    data = instance(3, p=6, q=6, n=80, rank=1, noise=0.05)
    _, seq = select(data, LossModel.least_squares())
    for lo, hi in certified_region(seq, 1):
        assert 0 <= lo < hi <= seq.lambda_max


def test_certificate_cross_validation_50_seeds():
    """6x6, n=60, rank-1 truth, low noise: solver rank never exceeds the certificate."""
    ls = LossModel.least_squares()
    opts = SolverOptions(gap_tolerance=1e-9, max_iterations=20000)
    certified = 0
    for seed in range(50):
        data, _ = random_instance(seed, 6, 6, 60, 1, 0.01)
        _, seq = select(data, ls)
        regions = certified_region(seq, 5)
        if regions:
            lo, hi = regions[0]
            lam = 0.5 * (lo + hi)
        else:
            lam = 0.7 * seq.lambda_max
        cert = rank_bound_for_lambda(seq, lam)
        if cert.bound is None:
            continue
        sol = solve_nrm(NrmProblem(data, ls, lam), opts)
        assert sol.converged
        assert numerical_rank(sol.B) <= cert.bound
        certified += 1
    assert certified > 0


def test_mean_spectral_radius_counterexample():
    """A frozen Huber instance where the mean_spectral radius rule over-certifies.

    The solver finds rank 2 at a lambda for which the mean_spectral radius
    ``sqrt(S/n)`` certifies rank <= 1. The strict radius does not.
    """
    data, _ = random_instance(19, 4, 2, 99, 2, 0.5, "huber")
    huber = LossModel.huber(2.5)
    opts = SolverOptions(gap_tolerance=1e-10, max_iterations=50000)
    found = False
    for frac in np.linspace(0.05, 1.1, 20):
        lam = frac * lambda_max(data, huber)
        sol = solve_nrm(NrmProblem(data, huber, lam), opts)
        rank = numerical_rank(sol.B)
        loose = rank_bound_for_lambda(select(data, huber, MEAN_SPECTRAL)[1], lam).bound
        strict = rank_bound_for_lambda(select(data, huber, STRICT)[1], lam).bound
        if strict is not None:
            assert rank <= strict
        if loose is not None and rank > loose:
            found = True
    assert found
