import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiatrack.bounds import (
    CoverageResult,
    ExponentTriple,
    Thm2Constants,
    classify_regime,
    conditional_mixing_check,
    decaying_sum_check,
    dominating_sequence,
    homogeneous_comparison_bound,
    noise_envelope,
    noise_envelope_coverage,
    power_sum_bounds,
    recursion_coefficients,
    stationarity_gap_bound,
    tracking_error_bound,
    unroll_recursion,
)
from adiatrack.chains import Distribution, TransitionMatrix
from adiatrack.schedules import ConstantSchedule, DriftParams, InterpolationSchedule

A = TransitionMatrix([[0.9, 0.1], [0.2, 0.8]])
FLAT = TransitionMatrix([[0.5, 0.5], [0.5, 0.5]])


# ------------------------------------------------- homogeneous comparison bound

def test_comparison_bound_vanishes_when_nothing_differs():
    lam = Distribution([0.3, 0.7])
    assert homogeneous_comparison_bound(lam, lam, A, [A, A, A]) == 0.0


def test_comparison_bound_reduces_to_initial_term():
    lam, mu = Distribution([0.3, 0.7]), Distribution([0.6, 0.4])
    got = homogeneous_comparison_bound(lam, mu, A, [A] * 5)
    assert got == pytest.approx(0.3 * 0.7 ** 5, abs=1e-15)


def test_comparison_bound_two_matrix_hand_value():
    # T=2 with mats (FLAT, A) against reference A:
    #   ||lam-mu|| rho^2 + ||FLAT-A|| rho^1 + ||A-A|| rho^0
    lam, mu = Distribution([1.0, 0.0]), Distribution([0.5, 0.5])
    hand = 0.5 * 0.7 ** 2 + 0.4 * 0.7 + 0.0
    got = homogeneous_comparison_bound(lam, mu, A, [FLAT, A])
    assert got == pytest.approx(hand, abs=1e-14)


def test_comparison_bound_needs_matrices():
    with pytest.raises(ValueError):
        homogeneous_comparison_bound(Distribution([1, 0]), Distribution([1, 0]), A, [])


# ---------------------------------------------------- stationarity gap bound

def test_gap_bound_zero_drift_zero_init():
    assert stationarity_gap_bound(lambda t: 0.0, 0.5, 8, 0.0) == 0.0


def test_gap_bound_hand_value():
    # phi_t = 1/t, rho = 0.5, T = 4, init gap 1:
    # 0.5*(0.5/0.25) + 0.5^3/0.5*(1+0.5) + 0.5^4 = 1 + 0.375 + 0.0625
    got = stationarity_gap_bound(lambda t: 1.0 / t, 0.5, 4, 1.0)
    assert got == pytest.approx(1.4375, abs=1e-15)


def test_gap_bound_odd_horizon_floors():
    # T=5 floors to the same half-horizon pieces; only the initial-gap
    # term sees the extra rho power
    even = stationarity_gap_bound(lambda t: 1.0 / t, 0.5, 4, 1.0)
    odd = stationarity_gap_bound(lambda t: 1.0 / t, 0.5, 5, 1.0)
    assert odd == pytest.approx(even - 0.5 ** 4 + 0.5 ** 5, abs=1e-15)


def test_gap_bound_accepts_sequence_input():
    seq = [1.0, 0.5, 1 / 3, 0.25]
    assert stationarity_gap_bound(seq, 0.5, 4, 1.0) == pytest.approx(1.4375, abs=1e-15)


def test_gap_bound_rejects_rho_one():
    with pytest.raises(ValueError):
        stationarity_gap_bound(lambda t: 0.0, 1.0, 4, 0.0)


# ------------------------------------------------------- tracking error bound

def _consts(**kw):
    base = dict(r_max_eff=1.0, rho=0.5, beta=0.5)
    base.update(kw)
    return Thm2Constants(**base)


def test_tracking_bound_drift_term_hand_value():
    rep = tracking_error_bound(_consts(), ExponentTriple(1.0, 0.5, 0.0), 100)
    # d_b * k / (1-beta) * T^-(1-0.5-0) = 2 * 100^-0.5 = 0.2
    assert rep.ada3 == pytest.approx(0.2, abs=1e-15)


def test_tracking_bound_static_sentinel_zeroes_drift_terms():
    rep = tracking_error_bound(_consts(), ExponentTriple(math.inf, 0.6, 0.0), 1000)
    assert rep.ada3 == 0.0
    assert rep.ada4 == pytest.approx(8.0 / 0.25 * math.log(1000.0) / 1e9 + 2.0 / 1e9)
    assert rep.regime == "adiabatic"


def test_tracking_bound_total_is_sum_and_monotone_fixture():
    exps = ExponentTriple(1.0, 0.5, 0.1)
    hi = tracking_error_bound(_consts(), exps, 10 ** 6)
    lo = tracking_error_bound(_consts(), exps, 10 ** 4)
    for rep in (hi, lo):
        assert rep.total == rep.ada1 + rep.ada2 + rep.ada3 + rep.ada4
        assert min(rep.ada1, rep.ada2, rep.ada3, rep.ada4) >= 0.0
    assert hi.total < lo.total


def test_tracking_bound_tau_definition():
    rep = tracking_error_bound(_consts(tau_coeff=4.0), ExponentTriple(1.0, 0.5, 0.0), 64)
    assert rep.tau == pytest.approx(4.0 * math.log(64.0) / abs(math.log(0.5)))


def test_tracking_bound_json_shape():
    rep = tracking_error_bound(_consts(), ExponentTriple(1.0, 0.5, 0.0), 100)
    assert set(rep.to_json()) == {"ada1", "ada2", "ada3", "ada4", "total", "tau",
                                  "regime", "same_rate_as_static"}


def test_exponent_triple_standing_assumptions():
    with pytest.raises(ValueError):
        ExponentTriple(1.0, 0.6, 0.5)  # gamma_alpha + gamma_pi >= 1
    with pytest.raises(ValueError):
        ExponentTriple(1.0, 1.2, 0.0)


# ------------------------------------------------------------ regime classifier

def test_classify_regime_examples():
    lab = classify_regime(ExponentTriple(1.0, 0.5, 0.1))
    assert lab.regime == "adiabatic"
    assert classify_regime(ExponentTriple(0.3, 0.5, 0.0)).regime == "diabatic"
    lab2 = classify_regime(ExponentTriple(1.0, 0.6, 0.0))
    assert lab2.same_rate_as_static  # 0.4 > 0.3
    # boundary: drift rate matches the combined decay exactly
    assert classify_regime(ExponentTriple(0.6, 0.6, 0.0)).regime != "diabatic"
    assert classify_regime(ExponentTriple(0.6, 0.6, 0.0)).regime != "adiabatic"


def test_classify_regime_needs_noise_condition_for_adiabatic():
    # drift fast enough but gamma_alpha <= 3 gamma_pi: boundary, not adiabatic
    lab = classify_regime(ExponentTriple(2.0, 0.5, 0.2))
    assert lab.regime == "boundary"
    assert lab.adiabatic_under_conjecture  # 0.5 > 0.2


def test_classify_regime_static_chain():
    lab = classify_regime(ExponentTriple(math.inf, 0.6, 0.0))
    assert lab.regime == "adiabatic" and lab.same_rate_as_static


# ------------------------------------------------------------- power sum bounds

def test_power_sum_bounds_degenerate_point():
    lo, hi = power_sum_bounds(5, 5, 0.5)
    assert lo == 0.0
    assert hi == pytest.approx(5 ** -0.5)


def test_power_sum_bounds_sqrt_example():
    direct = sum(n ** -0.5 for n in range(1, 5))
    lo, hi = power_sum_bounds(1, 4, 0.5)
    assert lo == pytest.approx(2.0) and hi == pytest.approx(3.0)
    assert lo <= direct <= hi
    assert direct == pytest.approx(2.7845, abs=1e-4)


def test_power_sum_bounds_harmonic_convention():
    direct = sum(1.0 / n for n in range(1, 101))
    lo, hi = power_sum_bounds(1, 100, 1.0)
    assert lo == pytest.approx(math.log(100.0))
    assert hi == pytest.approx(1.0 + math.log(100.0))
    assert lo <= direct <= hi


@given(st.integers(1, 400), st.integers(0, 400), st.floats(0.05, 2.5))
@settings(max_examples=100, deadline=None)
def test_power_sum_bounds_bracket_direct_sum(s, extra, gamma):
    t = s + extra
    direct = float(np.sum(np.arange(s, t + 1, dtype=float) ** -gamma))
    lo, hi = power_sum_bounds(s, t, gamma)
    assert lo - 1e-10 <= direct <= hi + 1e-10


# ------------------------------------------------------------ decaying sum check

def test_decaying_sum_zero_b():
    res = decaying_sum_check([0.5] * 10, [0.0] * 10, 10)
    assert res.passed and res.lhs == 0.0


def test_decaying_sum_power_law_example():
    ts = np.arange(1, 65, dtype=float)
    res = decaying_sum_check(0.5 / ts ** 0.5, 1.0 / ts, 64)
    assert res.passed


def test_decaying_sum_powerlaw_scaling_recorded():
    # LHS * T^gamma_b stays bounded over a horizon scan; the constant is
    # recorded, not asserted against any particular value
    scaled = []
    for t_hor in [2 ** k for k in range(4, 13)]:
        ts = np.arange(1, t_hor + 1, dtype=float)
        res = decaying_sum_check(0.3 / ts ** 0.6, 2.0 / ts ** 0.8, t_hor)
        assert res.passed
        scaled.append(res.lhs * t_hor ** 0.8)
    assert np.isfinite(scaled).all()
    assert max(scaled) / min(scaled) < 50  # bounded, no blow-up across the scan


def test_decaying_sum_validates_inputs():
    with pytest.raises(ValueError):
        decaying_sum_check([1.5] * 4, [1.0] * 4, 4)
    with pytest.raises(ValueError):
        decaying_sum_check([0.5] * 4, [1.0, 2.0, 1.0, 0.5], 4)


# -------------------------------------------------------- recursion coefficients

def test_recursion_coefficients_zero_sequence():
    out = recursion_coefficients(np.zeros(10), np.full(10, 0.3))
    np.testing.assert_array_equal(out, np.zeros(10))


def test_recursion_coefficients_power_law_reconstructs_and_caps():
    ts = np.arange(1, 1001, dtype=float)
    a_big = 2.0 / ts ** 0.7
    alpha = 0.5 / ts ** 0.6
    coeffs = recursion_coefficients(a_big, alpha, verify_tol=1e-10)  # verifies inside
    growth = np.abs(coeffs) * ts ** 0.7
    assert np.isfinite(growth.max())  # growth constant recorded, not pinned


def test_recursion_coefficients_rejects_nonpositive_alpha():
    with pytest.raises(ValueError):
        recursion_coefficients(np.ones(4), np.array([0.5, 0.0, 0.5, 0.5]))


# --------------------------------------------------------- recursion unrolling

@given(st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_unroll_recursion_matches_direct_iteration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 200))
    z0 = float(rng.uniform(0, 3))
    a = rng.uniform(0.01, 0.99, n)
    c = rng.uniform(0, 1, n)
    closed = unroll_recursion(z0, a, c)
    z = z0
    for k in range(n):
        z = z * (1 - a[k]) + c[k]
        assert abs(z - closed[k]) <= 1e-10 * (1 + abs(z))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_dominating_sequence_dominates(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 300))
    z0 = float(rng.uniform(0, 2))
    beta = float(rng.uniform(0.05, 0.95))
    alpha = rng.uniform(0.01, 0.6, n)
    c = rng.uniform(0, 0.5, n)
    tilde = dominating_sequence(z0, alpha, beta, c)
    w = z0
    z_prev = z0
    for k in range(n):
        w = (1 - alpha[k]) * w + alpha[k] * beta * z_prev + c[k]
        z_t = float(rng.random()) * w
        assert z_t <= tilde[k] + 1e-10
        z_prev = z_t


# -------------------------------------------------------- conditional mixing

def test_conditional_mixing_constant_schedule():
    sched = ConstantSchedule(A)
    t_hor = 512
    rho = 0.7
    tau = math.ceil(8 * math.log(t_hor) / abs(math.log(rho)))
    res = conditional_mixing_check(sched, tau, t_hor, rho)
    assert res.passed
    assert res.detail["tau"] == tau
    # static chain after tau steps is within rho^tau <= T^-8 of stationary
    assert res.lhs <= t_hor ** -8.0 + 1e-12


def test_conditional_mixing_boundary_and_range_checks():
    sched = ConstantSchedule(A)
    rho = 0.7
    tau = math.ceil(8 * math.log(256) / abs(math.log(rho)))
    assert conditional_mixing_check(sched, 256, 256, rho).passed  # t = T
    with pytest.raises(ValueError):
        conditional_mixing_check(sched, tau - 1, 256, rho)
    with pytest.raises(ValueError):
        conditional_mixing_check(sched, tau, 256, rho=1.0)
    with pytest.raises(ValueError):
        conditional_mixing_check(sched, tau, 256, rho=0.5)  # below rho_cap


def test_conditional_mixing_drifting_schedule():
    sched = InterpolationSchedule(A, FLAT, DriftParams(0.05, 1.0, 0.25, 0.0))
    t_hor = 1024
    rho = 0.7
    tau = math.ceil(8 * math.log(t_hor) / abs(math.log(rho)))
    for t in (tau, 2 * tau, t_hor):
        assert conditional_mixing_check(sched, t, t_hor, rho).passed


# ---------------------------------------------------------------- noise envelope

def test_noise_envelope_monotone_in_delta():
    ts = np.arange(1, 101, dtype=float)
    alpha = 0.5 / ts ** 0.6
    pi = np.full(100, 0.5)
    wide = noise_envelope(alpha, pi, 1.0, delta=0.01, tau=4, t_max=100)
    narrow = noise_envelope(alpha, pi, 1.0, delta=0.2, tau=4, t_max=100)
    assert (wide > narrow).all()


def test_coverage_zero_noise_never_violates():
    ts = np.arange(1, 101, dtype=float)
    res = noise_envelope_coverage(0.5 / ts ** 0.6, np.full(100, 0.5), eps_max=0.0,
                                  delta=0.05, tau=4, t_max=100, n_reps=50, seed=1)
    assert isinstance(res, CoverageResult)
    assert res.n_violating == 0 and res.passed


def test_coverage_spec_point():
    ts = np.arange(1, 1001, dtype=float)
    res = noise_envelope_coverage(0.5 / ts ** 0.6, np.full(1000, 0.5), eps_max=1.0,
                                  delta=0.05, tau=4, t_max=1000, n_reps=500, seed=7)
    assert res.threshold == pytest.approx(0.05 + 2 * math.sqrt(0.05 * 0.95 / 500))
    assert res.passed


def test_coverage_envelope_is_not_vacuous():
    # the realized process reaches a constant fraction of the envelope, so a
    # mis-scaled envelope (an order too tight) would be caught by coverage
    ts = np.arange(1, 1001, dtype=float)
    alpha = 0.5 / ts ** 0.6
    pi = np.full(1000, 0.5)
    env = noise_envelope(alpha, pi, 1.0, 0.05, 4, 1000)
    rng = np.random.default_rng(11)
    damp = 1.0 - alpha * pi
    hits = 0
    for _ in range(100):
        eps = rng.uniform(-1, 1, 1000)
        e = 0.0
        for t in range(3, 1000):
            e = alpha[t] * eps[t] if t == 3 else damp[t] * e + alpha[t] * eps[t]
            if abs(e) > 0.15 * env[t]:
                hits += 1
                break
    assert hits > 10
