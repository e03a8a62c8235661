"""Closed-form evaluators for the mixing and tracking bounds, plus the
sequence-lemma oracles the test suite leans on.

Conventions shared by every evaluator here:
  * rho is the uniform ergodicity-coefficient bound in (0, 1); evaluators
    reject rho >= 1 (the bounds go vacuous there)
  * gamma_p = inf is the static-chain sentinel: drift-driven terms vanish
    exactly instead of needing a separate caller code path
  * horizons written T/2 floor for odd T
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chains
from .dp import CheckResult

GAMMA_INF = math.inf

__all__ = [
    "ExponentTriple",
    "Thm2Constants",
    "BoundReport",
    "RegimeLabel",
    "homogeneous_comparison_bound",
    "stationarity_gap_bound",
    "tracking_error_bound",
    "classify_regime",
    "power_sum_bounds",
    "decaying_sum_check",
    "recursion_coefficients",
    "unroll_recursion",
    "dominating_sequence",
    "conditional_mixing_check",
    "noise_envelope",
    "noise_envelope_coverage",
    "CoverageResult",
]


@dataclass(frozen=True)
class ExponentTriple:
    """Decay exponents: matrix drift, learning rate, stationary-minimum floor.

    Standing assumptions: gamma_alpha in (0,1) and gamma_alpha + gamma_pi < 1.
    gamma_p may be inf (static chain).
    """

    gamma_p: float
    gamma_alpha: float
    gamma_pi: float

    def __post_init__(self):
        if not 0 < self.gamma_alpha < 1:
            raise ValueError("gamma_alpha must lie in (0, 1)")
        if self.gamma_pi < 0:
            raise ValueError("gamma_pi must be non-negative")
        if not self.gamma_alpha + self.gamma_pi < 1:
            raise ValueError("need gamma_alpha + gamma_pi < 1")
        if self.gamma_p < 0:
            raise ValueError("gamma_p must be non-negative (inf allowed)")


@dataclass(frozen=True)
class RegimeLabel:
    regime: str  # "adiabatic" | "diabatic" | "boundary"
    same_rate_as_static: bool
    adiabatic_under_conjecture: bool


def classify_regime(exps: ExponentTriple) -> RegimeLabel:
    """Adiabatic iff gamma_p > gamma_alpha + gamma_pi and gamma_alpha > 3 gamma_pi;
    diabatic iff gamma_p < gamma_alpha + gamma_pi; boundary otherwise.

    same_rate_as_static: gamma_p - gamma_alpha - gamma_pi > (gamma_alpha - 3 gamma_pi)/2,
    i.e. the drift term decays no slower than the static-chain noise term.
    adiabatic_under_conjecture flags the (unproven, weaker) gamma_alpha > gamma_pi
    variant for experiment labeling; nothing asserts on it.
    """
    gp, ga, gpi = exps.gamma_p, exps.gamma_alpha, exps.gamma_pi
    drift_margin = gp - ga - gpi  # inf - finite = inf, as wanted
    if drift_margin > 0 and ga > 3 * gpi:
        regime = "adiabatic"
    elif drift_margin < 0:
        regime = "diabatic"
    else:
        regime = "boundary"
    return RegimeLabel(
        regime=regime,
        same_rate_as_static=bool(drift_margin > (ga - 3 * gpi) / 2.0),
        adiabatic_under_conjecture=bool(drift_margin > 0 and ga > gpi),
    )


def homogeneous_comparison_bound(lam: chains.Distribution, mu: chains.Distribution,
                                 p_ref: chains.TransitionMatrix, mats) -> float:
    """Upper bound on || lam P^(1)...P^(T) - mu P_ref^T ||.

    ||lam - mu|| rho(P_ref)^T + sum_t ||P^(t) - P_ref|| rho(P_ref)^(T-t),
    evaluated exactly from the supplied matrices.
    """
    mats = list(mats)
    if not mats:
        raise ValueError("need at least one schedule matrix")
    rho = chains.ergodicity_coefficient(p_ref)
    big_t = len(mats)
    total = chains.tv_distance(lam, mu) * rho ** big_t
    for t, mat in enumerate(mats, start=1):
        total += chains.matrix_tv_distance(mat, p_ref) * rho ** (big_t - t)
    return float(total)


def stationarity_gap_bound(phi, rho: float, t_horizon: int, init_gap: float) -> float:
    """Upper bound on the TV gap between the inhomogeneous marginal at T and
    the stationary distribution of the current matrix.

    phi(t) must dominate the backward per-step drift ||P^(t) - P^(t-1)|| and
    be positive (or zero) decreasing.  The bound is

        phi(T/2) rho/(1-rho)^2 + rho^(T/2+1)/(1-rho) * sum_{t<=T/2} phi(t)
        + init_gap * rho^T

    with T/2 floored for odd T.  rho >= 1 is rejected (vacuous bound).
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if t_horizon < 2:
        raise ValueError("t_horizon must be >= 2")
    phi_fn = phi if callable(phi) else (lambda t, seq=list(phi): seq[t - 1])
    half = t_horizon // 2
    phi_sum = sum(phi_fn(t) for t in range(1, half + 1))
    return float(phi_fn(half) * rho / (1.0 - rho) ** 2
                 + rho ** (half + 1) / (1.0 - rho) * phi_sum
                 + init_gap * rho ** t_horizon)


@dataclass(frozen=True)
class Thm2Constants:
    """Constants entering the four-term tracking bound.

    The d_* constants are not pinned by the theory (they absorb
    c_alpha/c_pi/c_p dependences); they default to 1 and only rate
    exponents are ever asserted on.  r_max_eff plays the value-scale
    R_max = r_max/(1-beta); k is the fixed-point Lipschitz constant.
    """

    r_max_eff: float
    rho: float
    beta: float
    d_a: float = 1.0
    d_b: float = 1.0
    d_b_prime: float = 1.0
    k: float = 1.0
    c_alpha: float = 0.5
    c_pi: float = 0.5
    c_p: float = 1.0
    delta: float = 0.05
    tau_coeff: float = 4.0

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def to_spec(self) -> dict:
        return {"r_max_eff": self.r_max_eff, "rho": self.rho, "beta": self.beta,
                "d_a": self.d_a, "d_b": self.d_b, "d_b_prime": self.d_b_prime,
                "k": self.k, "c_alpha": self.c_alpha, "c_pi": self.c_pi,
                "c_p": self.c_p, "delta": self.delta, "tau_coeff": self.tau_coeff}

    @staticmethod
    def from_spec(doc: dict) -> "Thm2Constants":
        return Thm2Constants(**{k: float(v) for k, v in doc.items()})


@dataclass
class BoundReport:
    """Evaluated right-hand side of the four-term tracking bound."""

    ada1: float
    ada2: float
    ada3: float
    ada4: float
    total: float
    tau: float
    regime: str
    same_rate_as_static: bool

    def to_json(self) -> dict:
        return {"ada1": self.ada1, "ada2": self.ada2, "ada3": self.ada3,
                "ada4": self.ada4, "total": self.total, "tau": self.tau,
                "regime": self.regime,
                "same_rate_as_static": self.same_rate_as_static}


def tracking_error_bound(consts: Thm2Constants, exps: ExponentTriple,
                         t_horizon: int) -> BoundReport:
    """Evaluate the four-term high-probability tracking bound at horizon T.

    ada1: stretched-exponential forgetting of the initial condition
    ada2: martingale-noise term, sqrt(tau log(2 T tau / delta)) / T^((ga-3gpi)/2)
    ada3: drift term d_b k/(1-beta) / T^(gp-ga-gpi)   (0 for static chains)
    ada4: conditional-mixing remainder, three summands
    tau = tau_coeff * log T / |log rho|.
    """
    gp, ga, gpi = exps.gamma_p, exps.gamma_alpha, exps.gamma_pi
    if not 1.0 - ga - gpi > 0:
        raise ValueError("need gamma_alpha + gamma_pi < 1")
    if t_horizon < 2:
        raise ValueError("t_horizon must be >= 2")
    big_t = float(t_horizon)
    rho, beta, r_max = consts.rho, consts.beta, consts.r_max_eff
    tau = consts.tau_coeff * math.log(big_t) / abs(math.log(rho))

    ada1 = (2.0 * r_max * math.exp((1.0 - beta) * tau)
            * math.exp(-(big_t ** (1.0 - ga - gpi) - 1.0) / (1.0 - ga - gpi)))
    ada2 = (consts.d_a / (1.0 - beta)
            * math.sqrt(tau * math.log(2.0 * big_t * tau / consts.delta))
            / big_t ** ((ga - 3.0 * gpi) / 2.0))
    if gp == GAMMA_INF:
        ada3 = 0.0
        drift_summand = 0.0
    else:
        ada3 = consts.d_b * consts.k / (1.0 - beta) / big_t ** (gp - ga - gpi)
        drift_summand = (2.0 * r_max * consts.d_b_prime
                         / ((1.0 - rho) ** 2 * (1.0 - beta)) / big_t ** (gp - gpi))
    ada4 = (drift_summand
            + 8.0 * r_max / (1.0 - rho) ** 2 * math.log(big_t) / big_t ** 3
            + 2.0 * r_max / big_t ** 3)
    label = classify_regime(exps)
    return BoundReport(ada1=ada1, ada2=ada2, ada3=ada3, ada4=ada4,
                       total=ada1 + ada2 + ada3 + ada4, tau=tau,
                       regime=label.regime,
                       same_rate_as_static=label.same_rate_as_static)


def power_sum_bounds(s: int, t: int, gamma: float):
    """Integral bounds on sum_{n=s}^{t} n^-gamma.

    lower = (t^(1-gamma) - s^(1-gamma))/(1-gamma), upper = s^-gamma + lower;
    the gamma = 1 case reads the braceted expression as log t - log s.
    """
    if not 1 <= s <= t:
        raise ValueError("need 1 <= s <= t")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if gamma == 1.0:
        lower = math.log(t) - math.log(s)
    else:
        lower = (t ** (1.0 - gamma) - s ** (1.0 - gamma)) / (1.0 - gamma)
    return lower, s ** -gamma + lower


def decaying_sum_check(a, b, t_horizon: int, slack: float = 1e-12) -> CheckResult:
    """Check sum_t a_t b_t prod_{s>t} (1-a_s) <= b_{T/2} + e^{-sum_{t>=T/2} a_t} sum_{t<=T/2} a_t b_t.

    a_t in (0,1), b_t positive decreasing; both given for t = 1..T (arrays or
    callables).  The left side is evaluated by direct recursion.
    """
    a_arr = np.array([a(t) for t in range(1, t_horizon + 1)] if callable(a) else a,
                     dtype=float)
    b_arr = np.array([b(t) for t in range(1, t_horizon + 1)] if callable(b) else b,
                     dtype=float)
    if a_arr.size != t_horizon or b_arr.size != t_horizon:
        raise ValueError("need sequences of length t_horizon")
    if not ((a_arr > 0) & (a_arr < 1)).all():
        raise ValueError("a_t must lie in (0, 1)")
    if (b_arr < 0).any() or (np.diff(b_arr) > 0).any():
        raise ValueError("b_t must be non-negative and decreasing")
    lhs = 0.0
    for t in range(t_horizon):  # lhs_{k+1} = (1 - a_{k+1}) lhs_k + a b
        lhs = (1.0 - a_arr[t]) * lhs + a_arr[t] * b_arr[t]
    half = max(t_horizon // 2, 1)
    rhs = b_arr[half - 1] + math.exp(-a_arr[half - 1:].sum()) * (
        a_arr[:half] * b_arr[:half]).sum()
    return CheckResult(lhs=float(lhs), rhs=float(rhs),
                       passed=lhs <= rhs + slack)


def recursion_coefficients(a_big, alpha, verify_tol: float = 1e-10) -> np.ndarray:
    """Invert A_T = sum_t a_t alpha_t prod_{s>t}(1-alpha_s): return the a_t.

    a_t = (A_t - A_{t-1})/alpha_t + A_{t-1} with A_0 = 0; the reconstruction
    identity is re-verified at every horizon to verify_tol before returning.
    """
    a_big = np.asarray(a_big, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if a_big.shape != alpha.shape or a_big.ndim != 1:
        raise ValueError("A and alpha must be equal-length vectors")
    if (alpha <= 0).any():
        raise ValueError("alpha_t must be positive")
    prev = np.concatenate([[0.0], a_big[:-1]])
    coeffs = (a_big - prev) / alpha + prev
    recon = 0.0
    for t in range(a_big.size):  # rebuild A_T through the product recursion
        recon = (1.0 - alpha[t]) * recon + alpha[t] * coeffs[t]
        if abs(recon - a_big[t]) > verify_tol:
            raise ArithmeticError(
                f"reconstruction drifted to {abs(recon - a_big[t])!r} at t={t + 1}")
    return coeffs


def unroll_recursion(z0: float, a, c) -> np.ndarray:
    """Closed-form unroll of z_{n+1} = (1 - a_n) z_n + c_n.

    Returns [z_1, ..., z_N]: z_{n+1} = z_0 prod(1-a_k) + sum_j c_j prod_{k>j}(1-a_k).
    When the recursion holds with <= instead of =, the same expression is an
    upper bound.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    if a.shape != c.shape or a.ndim != 1:
        raise ValueError("a and c must be equal-length vectors")
    out = np.empty(a.size)
    acc = float(z0)
    for n in range(a.size):
        acc = acc * (1.0 - a[n]) + c[n]
        out[n] = acc
    return out


def dominating_sequence(z0_tilde: float, alpha, beta: float, c) -> np.ndarray:
    """The dominating recursion z~_{t+1} = (1 - alpha_t (1-beta)) z~_t + c_t.

    Any positive sequence satisfying the unrolled inequality with an extra
    beta z_s feedback term stays below this one (given z~_0 >= z_0).
    """
    alpha = np.asarray(alpha, dtype=float)
    c = np.asarray(c, dtype=float)
    if alpha.shape != c.shape or alpha.ndim != 1:
        raise ValueError("alpha and c must be equal-length vectors")
    out = np.empty(alpha.size)
    acc = float(z0_tilde)
    for t in range(alpha.size):
        acc = (1.0 - alpha[t] * (1.0 - beta)) * acc + c[t]
        out[t] = acc
    return out


def conditional_mixing_check(schedule, t: int, t_horizon: int, rho: float,
                             slack: float = 1e-12) -> CheckResult:
    """Worst-case conditional marginal vs the current stationary distribution.

    With tau = ceil(8 log T / |log rho|) and tau <= t <= T, the exact
    worst-case gap max_x || e_x P^(t-tau+1)...P^(t) - pi^(t) || must fall
    below  D_P/((1-rho)^2 t^gamma_p) + 4 log T/((1-rho)^2 T^4) + 1/T^4
    with D_P = c_p 2^gamma_p (first term 0 for static schedules).
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if schedule.rho_cap > rho + 1e-12:
        raise ValueError(f"schedule rho_cap {schedule.rho_cap} exceeds supplied rho {rho}")
    big_t = float(t_horizon)
    tau = math.ceil(8.0 * math.log(big_t) / abs(math.log(rho)))
    if not tau <= t <= t_horizon:
        raise ValueError(f"need tau={tau} <= t <= T={t_horizon}")

    n = schedule.n
    marginals = np.eye(n)  # row x = conditional law started from point mass e_x
    for u in range(t - tau + 1, t + 1):
        marginals = marginals @ schedule.matrix_at(u).rows
    pi = chains.stationary_distribution(schedule.matrix_at(t)).probs
    lhs = float(0.5 * np.abs(marginals - pi).sum(axis=1).max())

    params = schedule.params
    if params.gamma_p == GAMMA_INF:
        drift_term = 0.0
    else:
        d_p = params.c_p * 2.0 ** params.gamma_p
        drift_term = d_p / ((1.0 - rho) ** 2 * t ** params.gamma_p)
    rhs = (drift_term + 4.0 * math.log(big_t) / ((1.0 - rho) ** 2 * big_t ** 4)
           + big_t ** -4)
    return CheckResult(lhs=lhs, rhs=float(rhs), passed=lhs <= rhs + slack,
                       detail={"tau": tau, "t": t})


def noise_envelope(alpha: np.ndarray, pi: np.ndarray, eps_max: float, delta: float,
                   tau: int, t_max: int) -> np.ndarray:
    """High-probability envelope for the damped noise sum, per t = 1..t_max.

    z_t = sqrt(2 tau [sum_{s<=t} eps_max^2 alpha_s^2 prod_{u>s}(1-alpha_u pi_u)^2]
                log(2 T tau / delta)).
    """
    damp_sq = (1.0 - alpha * pi) ** 2
    s_run = np.empty(t_max)
    acc = 0.0
    for t in range(t_max):
        acc = acc * damp_sq[t] + alpha[t] ** 2
        s_run[t] = acc
    log_term = math.log(2.0 * t_max * tau / delta)
    return eps_max * np.sqrt(2.0 * tau * s_run * log_term)


@dataclass
class CoverageResult:
    violation_fraction: float
    threshold: float
    passed: bool
    n_reps: int
    n_violating: int

    def to_json(self) -> dict:
        return {"violation_fraction": self.violation_fraction,
                "threshold": self.threshold, "pass": self.passed,
                "n_reps": self.n_reps, "n_violating": self.n_violating}


def noise_envelope_coverage(alpha, pi, eps_max: float, delta: float, tau: int,
                            t_max: int, n_reps: int, seed: int) -> CoverageResult:
    """Empirical coverage of the noise envelope over seeded replications.

    Each replication draws iid bounded zero-mean noise, runs the damped sum
    E_t = sum_{s=tau}^t alpha_s eps_s prod_{u>s}(1-alpha_u pi_u), and counts
    a violation if |E_t| exceeds the envelope anywhere on [tau, T].  The
    violating fraction must stay below delta + 2 sqrt(delta(1-delta)/N).
    """
    if n_reps < 1 or not 1 <= tau <= t_max:
        raise ValueError("need n_reps >= 1 and 1 <= tau <= t_max")
    alpha = np.asarray(alpha, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if alpha.size != t_max or pi.size != t_max:
        raise ValueError("alpha and pi must have length t_max")
    envelope = noise_envelope(alpha, pi, eps_max, delta, tau, t_max)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 2])))
    eps = rng.uniform(-eps_max, eps_max, size=(n_reps, t_max))
    damp = 1.0 - alpha * pi
    e_run = np.zeros(n_reps)
    violated = np.zeros(n_reps, dtype=bool)
    for t in range(tau - 1, t_max):  # 0-based index of step t+1
        if t == tau - 1:
            e_run = alpha[t] * eps[:, t]
        else:
            e_run = damp[t] * e_run + alpha[t] * eps[:, t]
        violated |= np.abs(e_run) > envelope[t]
    frac = float(violated.mean())
    threshold = delta + 2.0 * math.sqrt(delta * (1.0 - delta) / n_reps)
    return CoverageResult(violation_fraction=frac, threshold=float(threshold),
                          passed=frac <= threshold, n_reps=n_reps,
                          n_violating=int(violated.sum()))
