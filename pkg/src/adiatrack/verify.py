"""Randomized and exhaustive property suites behind `adiatrack verify`.

Each suite runs with a fixed master seed (per-case streams derive from it),
counts violations, and reports the worst margin plus full counterexample
inputs (matrices verbatim) so a CI failure is reproducible from the report
alone.  The ergodicity coefficient is always looked up through the chains
module at call time, so a corrupted implementation is caught rather than
silently trusted.
"""

from __future__ import annotations

import math

import numpy as np

from . import bounds, chains, dp, schedules
from .chains import Distribution, TransitionMatrix
from .harness import SPEC_VERSION

__all__ = ["SUITES", "run_suite"]

DEFAULT_MASTER_SEED = 20240809


class _Recorder:
    def __init__(self, suite, master_seed):
        self.suite = suite
        self.master_seed = master_seed
        self.cases = 0
        self.checks = 0
        self.violations = []
        self.worst_margin = np.inf

    def check(self, name, lhs, rhs, tol, inputs=None):
        """Record the inequality lhs <= rhs + tol."""
        self.checks += 1
        margin = rhs + tol - lhs
        if margin < self.worst_margin:
            self.worst_margin = margin
        if lhs > rhs + tol:
            entry = {"check": name, "lhs": float(lhs), "rhs": float(rhs),
                     "tol": tol, "case": self.cases}
            if inputs:
                entry["inputs"] = inputs
            self.violations.append(entry)

    def require(self, name, condition, inputs=None):
        self.checks += 1
        if not condition:
            entry = {"check": name, "case": self.cases}
            if inputs:
                entry["inputs"] = inputs
            self.violations.append(entry)

    def report(self):
        return {"suite": self.suite, "master_seed": self.master_seed,
                "cases": self.cases, "checks": self.checks,
                "violation_count": len(self.violations),
                "violations": self.violations[:10],
                "worst_margin": float(self.worst_margin),
                "pass": not self.violations,
                "spec_version": SPEC_VERSION}


def _rng(master_seed, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(
        [int(master_seed), int(stream)])))


def random_transition_matrix(rng, n) -> TransitionMatrix:
    """Dense positive random rows (hence irreducible), varied skew."""
    style = rng.integers(3)
    raw = rng.random((n, n))
    if style == 1:
        raw = raw ** 4  # skewed rows, ergodicity coefficient near 1
    elif style == 2:
        cycle = np.eye(n)[(np.arange(n) + 1) % n]  # cycle backbone, still dense
        raw = 0.2 * raw + 0.8 * cycle + 1e-3
    return TransitionMatrix(raw / raw.sum(axis=1, keepdims=True))


def random_distribution(rng, n) -> Distribution:
    raw = rng.random(n) + 1e-12
    return Distribution(raw / raw.sum())


def suite_prop1(n_cases=10_000, master_seed=DEFAULT_MASTER_SEED, tol=1e-10):
    """Ergodicity-coefficient properties on random irreducible matrix pairs.

    Per pair (n in 2..6): sub-multiplicativity over products, contraction of
    TV under right multiplication, agreement of the row-pair and overlap
    forms, and the stationary perturbation bound.  Plus, on random 2x2
    matrices, |second eigenvalue| <= rho.
    """
    rec = _Recorder("prop1", master_seed)
    rng = _rng(master_seed, 1)
    for _ in range(n_cases):
        rec.cases += 1
        n = int(rng.integers(2, 7))
        p = random_transition_matrix(rng, n)
        q = random_transition_matrix(rng, n)
        rho_p = chains.ergodicity_coefficient(p)
        rho_q = chains.ergodicity_coefficient(q)
        inputs = {"p": p.rows.tolist(), "q": q.rows.tolist()}

        prod = TransitionMatrix(p.rows @ q.rows)
        rec.check("submultiplicative", chains.ergodicity_coefficient(prod),
                  rho_p * rho_q, tol, inputs)

        lam = random_distribution(rng, n)
        mu = random_distribution(rng, n)
        rec.check("tv_contraction",
                  chains.tv_distance(Distribution(lam.probs @ p.rows),
                                     Distribution(mu.probs @ p.rows)),
                  rho_p * chains.tv_distance(lam, mu), tol, inputs)

        overlap = 1.0 - np.minimum(p.rows[:, None, :], p.rows[None, :, :]).sum(2).min()
        rec.check("row_pair_vs_overlap_form", abs(rho_p - overlap), 0.0, tol, inputs)

        if rho_p < 1.0 - 1e-6:
            pert = TransitionMatrix(0.7 * p.rows + 0.3 * q.rows)
            gap = chains.tv_distance(chains.stationary_distribution(p),
                                     chains.stationary_distribution(pert))
            rec.check("stationary_perturbation", gap,
                      chains.matrix_tv_distance(p, pert) / (1.0 - rho_p), tol, inputs)

    rng2 = _rng(master_seed, 2)
    for _ in range(n_cases):
        rec.cases += 1
        p = random_transition_matrix(rng2, 2)
        rec.check("second_eigenvalue", abs(chains.second_eigenvalue_2x2(p)),
                  chains.ergodicity_coefficient(p), tol, {"p": p.rows.tolist()})
    return rec.report()


def scan_families(n_anchor_seed=7):
    """The schedule-family instances every dominance scan walks (n <= 4)."""
    rng = _rng(n_anchor_seed, 3)
    a2 = TransitionMatrix([[0.9, 0.1], [0.2, 0.8]])
    b2 = TransitionMatrix([[0.1, 0.9], [0.8, 0.2]])
    a3 = random_transition_matrix(rng, 3)
    b3 = random_transition_matrix(rng, 3)
    a4 = random_transition_matrix(rng, 4)
    b4 = random_transition_matrix(rng, 4)
    fams = [
        schedules.ConstantSchedule(a2),
        schedules.ConstantSchedule(a4),
        schedules.InterpolationSchedule(
            a2, b2, schedules.DriftParams(0.05, 1.0, 0.2, 0.0)),
        schedules.InterpolationSchedule(
            a3, b3, schedules.DriftParams(0.1, 0.8, 0.05, 0.0)),
        schedules.InterpolationSchedule(
            a4, b4, schedules.DriftParams(0.1, 1.2, 0.05, 0.0)),
        schedules.CyclicSchedule([a2, b2], schedules.DriftParams(0.1, 0.7, 0.2, 0.0)),
        schedules.CyclicSchedule([a3, b3], schedules.DriftParams(0.15, 0.5, 0.05, 0.0)),
        schedules.ShrinkingStateSchedule(schedules.DriftParams(0.2, 1.5, 0.2, 0.5)),
        schedules.RestartWrappedSchedule(
            schedules.InterpolationSchedule(
                a2, b2, schedules.DriftParams(0.05, 1.0, 0.2, 0.0)),
            beta=0.5, beta_hat=0.8, x_restart=0),
    ]
    return fams


def backward_drift_phi(params):
    """phi(t) >= ||P^(t) - P^(t-1)||: the certificate shifted one step back."""
    def phi(t):
        return params.drift_bound(max(t - 1, 1))
    return phi


def suite_thm1(master_seed=DEFAULT_MASTER_SEED, tol=1e-10, t_values=None,
               dominance=True, limit_behavior=True):
    """Dominance of the comparison and stationarity-gap bounds on exact marginals.

    For every schedule family, horizons T in {2,4,...,512} and every
    point-mass start: the exact inhomogeneous marginal gap (computed by
    matrix propagation and direct stationary solves) must not exceed the
    bound evaluators.  Also the non-convergent cyclic family's gap at
    T = 1e2, 1e3, 1e4 must decrease strictly to witness the limit behavior.
    """
    rec = _Recorder("thm1", master_seed)
    t_values = t_values or [2 ** k for k in range(1, 10)]
    for fam in scan_families() if dominance else []:
        n = fam.n
        phi = backward_drift_phi(fam.params)
        ref_first = fam.matrix_at(1)
        t_set = set(t_values)
        ref_pow = np.eye(n)  # P_ref^t, for the homogeneous comparison target
        marg = np.eye(n)     # row x: exact marginal started from point mass e_x
        for t in range(1, max(t_values) + 1):
            marg = marg @ fam.matrix_at(t).rows
            ref_pow = ref_pow @ ref_first.rows
            if t not in t_set:
                continue
            rec.cases += 1
            p_last = fam.matrix_at(t)
            rho_last = chains.ergodicity_coefficient(p_last)
            pi_last = chains.stationary_distribution(p_last)
            mats = [fam.matrix_at(u) for u in range(1, t + 1)]
            inputs = {"family": fam.kind, "n": n, "T": t}
            if rho_last < 1.0:
                for x in range(n):
                    lam = chains.point_mass(n, x)
                    gap = 0.5 * np.abs(marg[x] - pi_last.probs).sum()
                    bound = bounds.stationarity_gap_bound(
                        phi, rho_last, t, chains.tv_distance(lam, pi_last))
                    rec.check("stationarity_gap_dominance", gap, bound, tol,
                              {**inputs, "x": x})
            mu_uni = chains.uniform_distribution(n)
            mu_pow = mu_uni.probs @ ref_pow
            for x in range(n):
                lam = chains.point_mass(n, x)
                gap = 0.5 * np.abs(marg[x] - mu_pow).sum()
                bound = bounds.homogeneous_comparison_bound(lam, mu_uni, ref_first, mats)
                rec.check("homogeneous_comparison_dominance", gap, bound, tol,
                          {**inputs, "x": x})

    if limit_behavior:
        # gap-vs-horizon is cycle-phase dependent; this instance's decade
        # gaps decrease with wide margins (see the scan in the notes)
        a2 = TransitionMatrix([[0.9, 0.1], [0.2, 0.8]])
        b2 = TransitionMatrix([[0.1, 0.9], [0.8, 0.2]])
        cyc = schedules.CyclicSchedule([a2, b2],
                                       schedules.DriftParams(0.3, 0.7, 0.2, 0.0))
        phi = backward_drift_phi(cyc.params)
        gaps = {}
        marg = np.zeros(2)
        marg[0] = 1.0
        for t in range(1, 10_000 + 1):
            marg = marg @ cyc.matrix_at(t).rows
            if t in (100, 1000, 10_000):
                rec.cases += 1
                p_last = cyc.matrix_at(t)
                pi_last = chains.stationary_distribution(p_last)
                gaps[t] = 0.5 * np.abs(marg - pi_last.probs).sum()
                bound = bounds.stationarity_gap_bound(
                    phi, chains.ergodicity_coefficient(p_last), t,
                    0.5 * np.abs(np.array([1.0, 0.0]) - pi_last.probs).sum())
                rec.check("limit_gap_below_bound", gaps[t], bound, tol,
                          {"T": t, "family": "cyclic"})
        rec.require("limit_gap_strictly_decreasing",
                    gaps[100] > gaps[1000] > gaps[10_000],
                    {"gaps": {str(k): float(v) for k, v in gaps.items()}})
    return rec.report()


def suite_lemmas(n_cases=300, master_seed=DEFAULT_MASTER_SEED, tol=1e-10,
                 t_horizon=1000):
    """Sequence-lemma oracles on randomized power-law inputs."""
    rec = _Recorder("lemmas", master_seed)
    rng = _rng(master_seed, 4)
    for _ in range(n_cases):
        rec.cases += 1
        ts = np.arange(1, t_horizon + 1, dtype=float)

        gamma = float(rng.choice([0.3, 0.5, 0.7, 1.0, 1.3, 2.0]))
        s = int(rng.integers(1, t_horizon // 2))
        t_hi = int(rng.integers(s, t_horizon))
        direct = float((np.arange(s, t_hi + 1, dtype=float) ** -gamma).sum())
        lo, hi = bounds.power_sum_bounds(s, t_hi, gamma)
        rec.check("power_sum_lower", lo, direct, tol, {"gamma": gamma, "s": s, "t": t_hi})
        rec.check("power_sum_upper", direct, hi, tol, {"gamma": gamma, "s": s, "t": t_hi})

        c_a = float(rng.uniform(0.05, 0.95))
        g_a = float(rng.uniform(0.05, 0.95))
        a_seq = c_a / ts ** g_a
        if rng.integers(2):
            b_seq = float(rng.uniform(0.1, 3.0)) / ts ** float(rng.uniform(0.0, 1.5))
        else:
            b_seq = np.sort(rng.random(t_horizon))[::-1]
        res = bounds.decaying_sum_check(a_seq, b_seq, t_horizon, slack=tol)
        rec.check("decaying_sum", res.lhs, res.rhs, tol,
                  {"c_a": c_a, "gamma_a": g_a})

        c_big = float(rng.uniform(0.1, 3.0))
        g_big = float(rng.uniform(0.0, 1.5))
        a_big = c_big / ts ** g_big
        alpha = c_a / ts ** float(rng.uniform(0.05, 1.0))
        coeffs = bounds.recursion_coefficients(a_big, alpha, verify_tol=tol)
        rec.require("recursion_coefficients_growth",
                    np.isfinite((np.abs(coeffs) * ts ** g_big).max()),
                    {"c_A": c_big, "gamma_A": g_big})

        z0 = float(rng.uniform(0.0, 2.0))
        a_rec = rng.uniform(0.01, 0.99, t_horizon)
        c_rec = rng.uniform(0.0, 1.0, t_horizon)
        closed = bounds.unroll_recursion(z0, a_rec, c_rec)
        z = z0
        ok = True
        for n_ in range(t_horizon):  # exact iterate must match the closed form
            z = z * (1.0 - a_rec[n_]) + c_rec[n_]
            if abs(z - closed[n_]) > tol * (1.0 + abs(z)):
                ok = False
                break
        rec.require("recursion_unroll_identity", ok, {"z0": z0})
        slackened = z0
        ok = True
        for n_ in range(t_horizon):  # <= version stays below the closed form
            slackened = slackened * (1.0 - a_rec[n_]) + c_rec[n_] * 0.7
            if slackened > closed[n_] + tol:
                ok = False
                break
        rec.require("recursion_unroll_dominates", ok, {"z0": z0})

        # any z staying under its own unrolled expansion (with the damped
        # alpha_t * beta * z_{t-1} feedback folded in as a source term) is
        # dominated by the linear (1 - alpha (1-beta)) recursion
        beta = float(rng.uniform(0.1, 0.9))
        alpha_z = rng.uniform(0.01, 0.5, t_horizon)
        c_z = rng.uniform(0.0, 0.5, t_horizon)
        tilde = bounds.dominating_sequence(z0, alpha_z, beta, c_z)
        w = z0
        z_prev = z0
        ok = True
        for k in range(t_horizon):
            w = (1.0 - alpha_z[k]) * w + alpha_z[k] * beta * z_prev + c_z[k]
            z_t = w if rng.integers(4) == 0 else float(rng.random()) * w
            if z_t > tilde[k] + tol:
                ok = False
                break
            z_prev = z_t
        rec.require("dominating_sequence", ok, {"beta": beta, "z0": z0})
    return rec.report()


def suite_lipschitz(n_reward_cases=8500, n_q_cases=1500,
                    master_seed=DEFAULT_MASTER_SEED, tol=1e-10):
    """Fixed-point Lipschitz continuity in the transition matrix.

    Reward version on random pairs (n in 2..6), optimal-Q version on random
    product-space pairs; beta drawn from {0.5, 0.9, 0.99}.  Rewards are
    non-negative: the TV-metered Lipschitz constant pairs a zero-mass row
    difference with the reward span, so one-signed rewards are the bound's
    domain (signed rewards break it by up to a factor of two).
    """
    rec = _Recorder("lipschitz", master_seed)
    rng = _rng(master_seed, 5)
    betas = [0.5, 0.9, 0.99]
    for i in range(n_reward_cases):
        rec.cases += 1
        n = int(rng.integers(2, 7))
        p = random_transition_matrix(rng, n)
        q = random_transition_matrix(rng, n)
        spec = dp.RewardSpec(rng.uniform(0, 1, n), betas[i % 3])
        res = dp.check_lipschitz_reward(p, q, spec, slack=tol)
        rec.check("reward_lipschitz", res.lhs, res.rhs, tol,
                  {"p": p.rows.tolist(), "q": q.rows.tolist(),
                   "r": spec.r.tolist(), "beta": spec.beta})
    for i in range(n_q_cases):
        rec.cases += 1
        n_s = int(rng.integers(2, 4))
        n_a = 2
        nsa = n_s * n_a
        p = random_transition_matrix(rng, nsa)
        q = random_transition_matrix(rng, nsa)
        spec = dp.RewardSpec(rng.uniform(0, 1, nsa), betas[i % 3])
        res = dp.check_lipschitz_q(p, q, spec, n_a, slack=tol, tol=1e-12)
        rec.check("q_lipschitz", res.lhs, res.rhs, tol,
                  {"p": p.rows.tolist(), "q": q.rows.tolist(),
                   "r": spec.r.tolist(), "beta": spec.beta, "n_actions": n_a})
    return rec.report()


def suite_restart(n_cases=1000, master_seed=DEFAULT_MASTER_SEED,
                  value_tol=1e-8, rho_tol=1e-12):
    """Restart construction: value rescaling at the restart state and the
    beta/beta_hat ergodicity cap, on randomized instances."""
    rec = _Recorder("restart", master_seed)
    rng = _rng(master_seed, 6)
    for _ in range(n_cases):
        rec.cases += 1
        n = int(rng.integers(2, 6))
        p = random_transition_matrix(rng, n)
        beta = float(rng.uniform(0.2, 0.9))
        beta_hat = beta + (1.0 - beta) * float(rng.uniform(0.2, 0.9))
        x_restart = int(rng.integers(n))
        spec = dp.RewardSpec(rng.uniform(-1, 1, n), beta)
        res = dp.check_restart_identity(p, spec, beta_hat, x_restart, slack=value_tol)
        inputs = {"p": p.rows.tolist(), "r": spec.r.tolist(), "beta": beta,
                  "beta_hat": beta_hat, "x_restart": x_restart}
        rec.check("restart_value_identity", abs(res.lhs - res.rhs), 0.0,
                  value_tol, inputs)
        rec.check("restart_rho_cap", res.detail["rho"], res.detail["rho_bound"],
                  rho_tol, inputs)
    return rec.report()


def _mixing_checkpoints(tau, t_horizon):
    grid = {tau, t_horizon}
    t = tau
    while t < t_horizon:
        grid.add(int(t))
        t *= 1.3
    return sorted(grid)


def suite_mixing(master_seed=DEFAULT_MASTER_SEED, t_horizon=4096, tol=1e-12):
    """Conditional-marginal mixing on 3-state interpolation and constant
    schedules: worst-case propagated gap vs the closed-form right side, at
    log-spaced t across [tau, T]."""
    rec = _Recorder("mixing", master_seed)
    a3 = TransitionMatrix([[0.7, 0.2, 0.1], [0.15, 0.7, 0.15], [0.1, 0.2, 0.7]])
    b3 = TransitionMatrix([[0.3, 0.4, 0.3], [0.4, 0.3, 0.3], [0.25, 0.35, 0.4]])
    fams = [
        ("interpolation", schedules.InterpolationSchedule(
            a3, b3, schedules.DriftParams(0.05, 1.0, 0.1, 0.0))),
        ("constant", schedules.ConstantSchedule(a3)),
    ]
    for name, fam in fams:
        rho = min(max(fam.rho_cap, 0.05), 0.95)
        tau = math.ceil(8.0 * math.log(t_horizon) / abs(math.log(rho)))
        for t in _mixing_checkpoints(tau, t_horizon):
            rec.cases += 1
            res = bounds.conditional_mixing_check(fam, t, t_horizon, rho, slack=tol)
            rec.check("conditional_mixing", res.lhs, res.rhs, tol,
                      {"family": name, "t": t, "tau": res.detail["tau"]})
    return rec.report()


def suite_coverage(n_reps=500, master_seed=DEFAULT_MASTER_SEED, t_max=1000,
                   delta=0.05, tau=4):
    """Empirical coverage of the noise envelope at the configured delta."""
    rec = _Recorder("coverage", master_seed)
    ts = np.arange(1, t_max + 1, dtype=float)
    alpha = 0.5 / ts ** 0.6
    pi = np.full(t_max, 0.5)
    res = bounds.noise_envelope_coverage(alpha, pi, eps_max=1.0, delta=delta,
                                         tau=tau, t_max=t_max, n_reps=n_reps,
                                         seed=master_seed)
    rec.cases = n_reps
    rec.check("envelope_coverage", res.violation_fraction, res.threshold, 0.0,
              {"delta": delta, "tau": tau, "n_reps": n_reps,
               "n_violating": res.n_violating})
    return rec.report()


SUITES = {
    "prop1": suite_prop1,
    "thm1": suite_thm1,
    "lemmas": suite_lemmas,
    "lipschitz": suite_lipschitz,
    "restart": suite_restart,
    "mixing": suite_mixing,
    "coverage": suite_coverage,
}


def run_suite(name: str, master_seed: int = DEFAULT_MASTER_SEED) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](master_seed=master_seed)
