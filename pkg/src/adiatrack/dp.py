"""Exact ground truth for the moving fixed points.

Discounted reward functions come from direct linear solves and optimal
Q-functions from value iteration, so tracking errors are measured against
machine-precision targets rather than noisy simulation estimates.

Q-learning instances live on the product state space: a single transition
matrix over (state, action) pairs with flat index x = s * n_actions + a.
Behavior policies are baked into that matrix; there is no separate policy
object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import chains
from .chains import TransitionMatrix
from .schedules import restart_wrap

__all__ = [
    "RewardSpec",
    "CheckResult",
    "exact_reward",
    "bellman_f",
    "exact_q",
    "bellman_g",
    "check_lipschitz_reward",
    "check_lipschitz_q",
    "check_restart_identity",
    "reward_lipschitz_constant",
]


@dataclass(frozen=True)
class RewardSpec:
    """Bounded per-state (or per state-action) rewards and a discount in (0,1)."""

    r: np.ndarray
    beta: float

    def __post_init__(self):
        arr = np.array(self.r, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValueError("rewards must be a finite vector")
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie strictly in (0,1), got {self.beta}")
        arr.flags.writeable = False
        object.__setattr__(self, "r", arr)

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def r_max(self) -> float:
        return float(np.abs(self.r).max())

    @property
    def value_cap(self) -> float:
        """Geometric-series bound r_max / (1 - beta) on any discounted value."""
        return self.r_max / (1.0 - self.beta)

    def with_beta(self, beta: float) -> "RewardSpec":
        return RewardSpec(self.r, beta)

    def to_spec(self) -> dict:
        return {"r": self.r.tolist(), "beta": self.beta}

    @staticmethod
    def from_spec(doc: dict) -> "RewardSpec":
        return RewardSpec(np.asarray(doc["r"], dtype=float), float(doc["beta"]))


@dataclass
class CheckResult:
    """One evaluated inequality: lhs <= rhs (+slack) with pass/fail."""

    lhs: float
    rhs: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


def reward_lipschitz_constant(spec: RewardSpec) -> float:
    """beta * r_max / (1-beta)^2: how fast fixed points move per unit matrix TV."""
    return spec.beta * spec.r_max / (1.0 - spec.beta) ** 2


def _check_dims(p: TransitionMatrix, spec: RewardSpec):
    if p.n != spec.n:
        raise ValueError(f"dimension mismatch: matrix n={p.n}, rewards n={spec.n}")


def exact_reward(p: TransitionMatrix, spec: RewardSpec) -> np.ndarray:
    """Solve (I - beta P) R = r directly; always solvable for beta < 1."""
    _check_dims(p, spec)
    solution = np.linalg.solve(np.eye(p.n) - spec.beta * p.rows, spec.r)
    resid = np.abs(solution - (spec.r + spec.beta * p.rows @ solution)).max()
    if resid > 1e-10 * (1.0 + np.abs(solution).max()):
        raise ArithmeticError(f"fixed-point residual {resid!r} too large")
    return solution


def bellman_f(p: TransitionMatrix, spec: RewardSpec, r_in: np.ndarray) -> np.ndarray:
    """One exact application r + beta P r_in."""
    _check_dims(p, spec)
    r_in = np.asarray(r_in, dtype=float)
    if r_in.shape != (p.n,):
        raise ValueError(f"value vector shape {r_in.shape} does not match n={p.n}")
    return spec.r + spec.beta * (p.rows @ r_in)


def _state_of_product(nsa: int, n_actions: int) -> np.ndarray:
    if nsa % n_actions != 0:
        raise ValueError(f"product-space size {nsa} not divisible by n_actions={n_actions}")
    return np.arange(nsa) // n_actions


def bellman_g(p: TransitionMatrix, spec: RewardSpec, q_in: np.ndarray,
              n_actions: int) -> np.ndarray:
    """One exact application r + beta E[max_a' Q(next_state, a')] on the product space."""
    _check_dims(p, spec)
    q_in = np.asarray(q_in, dtype=float)
    if q_in.shape != (p.n,):
        raise ValueError(f"Q vector shape {q_in.shape} does not match n={p.n}")
    s_of = _state_of_product(p.n, n_actions)
    v = q_in.reshape(-1, n_actions).max(axis=1)
    return spec.r + spec.beta * (p.rows @ v[s_of])


def exact_q(p: TransitionMatrix, spec: RewardSpec, n_actions: int,
            tol: float = 1e-10, max_iter: int = 10_000_000) -> np.ndarray:
    """Value iteration from Q = 0 until the residual certifies sup error <= tol.

    Stops once ||GQ - Q||_inf <= (1-beta) * tol; the contraction then
    guarantees the returned iterate is within tol of the fixed point.
    """
    q = np.zeros(p.n)
    threshold = (1.0 - spec.beta) * tol
    for _ in range(max_iter):
        gq = bellman_g(p, spec, q, n_actions)
        if np.abs(gq - q).max() <= threshold:
            return gq
        q = gq
    raise RuntimeError(f"value iteration failed to converge within {max_iter} sweeps")


def check_lipschitz_reward(p: TransitionMatrix, q: TransitionMatrix,
                           spec: RewardSpec, slack: float = 1e-10) -> CheckResult:
    """||R(.;P) - R(.;Q)||_inf <= beta r_max/(1-beta)^2 ||P - Q||.

    Holds for one-signed rewards: the TV-metered right side pairs each
    zero-mass row difference with the reward span, which equals r_max only
    when rewards do not change sign.
    """
    lhs = float(np.abs(exact_reward(p, spec) - exact_reward(q, spec)).max())
    rhs = reward_lipschitz_constant(spec) * chains.matrix_tv_distance(p, q)
    return CheckResult(lhs=lhs, rhs=rhs, passed=lhs <= rhs + slack)


def check_lipschitz_q(p: TransitionMatrix, q: TransitionMatrix, spec: RewardSpec,
                      n_actions: int, slack: float = 1e-10,
                      tol: float = 1e-12) -> CheckResult:
    """Same Lipschitz bound for optimal Q-functions on the product space."""
    lhs = float(np.abs(exact_q(p, spec, n_actions, tol=tol)
                       - exact_q(q, spec, n_actions, tol=tol)).max())
    rhs = reward_lipschitz_constant(spec) * chains.matrix_tv_distance(p, q)
    return CheckResult(lhs=lhs, rhs=rhs, passed=lhs <= rhs + slack)


def check_restart_identity(p: TransitionMatrix, spec: RewardSpec, beta_hat: float,
                           x_restart: int, slack: float = 1e-8) -> CheckResult:
    """Restart construction: wrap p so rho drops below beta/beta_hat while the
    discounted value at the restart state rescales by (1-beta)/(1-beta_hat).

    The identity couples the restart state to the evaluation state, so the
    value comparison is at component x_restart.  Also asserts the wrapped
    matrix's ergodicity coefficient <= beta/beta_hat + 1e-12.
    """
    beta = spec.beta
    wrapped = restart_wrap(p, beta, beta_hat, x_restart)
    lhs = float(exact_reward(wrapped, spec.with_beta(beta_hat))[x_restart])
    rhs = float((1.0 - beta) / (1.0 - beta_hat) * exact_reward(p, spec)[x_restart])
    rho = chains.ergodicity_coefficient(wrapped)
    rho_bound = beta / beta_hat
    rho_ok = rho <= rho_bound + 1e-12
    return CheckResult(lhs=lhs, rhs=rhs,
                       passed=(abs(lhs - rhs) <= slack) and rho_ok,
                       detail={"rho": rho, "rho_bound": rho_bound, "rho_ok": rho_ok})
