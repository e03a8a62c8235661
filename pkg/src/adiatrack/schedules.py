"""Families of drifting transition-matrix sequences {P^(t)} with certificates.

Every schedule declares a drift certificate (c_p, gamma_p): the per-step
change satisfies ||P^(t+1) - P^(t)|| <= c_p / t**gamma_p, a stationary
floor (c_pi, gamma_pi): pi^(t)_min >= c_pi / t**gamma_pi, and rho_cap, a
uniform upper bound on the ergodicity coefficient.  gamma_p = inf encodes
a constant sequence (zero drift).  Certificates are declared, then checked
by scan via verify_drift; construction-time checks catch the cheap cases.

Drift is metered in matrix-TV arc length along convex segments between
anchor matrices: TV is exactly linear there, so the certificates are exact
rather than estimated.  Time indexing starts at t = 1 (the power laws
divide by t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chains
from .chains import TransitionMatrix, matrix_tv_distance

GAMMA_INF = math.inf

__all__ = [
    "GAMMA_INF",
    "DriftParams",
    "Schedule",
    "ConstantSchedule",
    "InterpolationSchedule",
    "CyclicSchedule",
    "ShrinkingStateSchedule",
    "RestartWrappedSchedule",
    "interpolation_schedule",
    "cyclic_schedule",
    "shrinking_state_schedule",
    "restart_wrap",
    "verify_drift",
    "DriftReport",
    "DriftCertificateError",
    "schedule_from_spec",
]


@dataclass(frozen=True)
class DriftParams:
    """Certificate constants: drift c_p/t^gamma_p, floor c_pi/t^gamma_pi."""

    c_p: float
    gamma_p: float
    c_pi: float
    gamma_pi: float

    def __post_init__(self):
        if not self.c_p > 0:
            raise ValueError("c_p must be positive")
        if not (0 < self.c_pi <= 1):
            raise ValueError("c_pi must lie in (0, 1]")
        if self.gamma_p < 0 or self.gamma_pi < 0:
            raise ValueError("drift exponents must be non-negative")

    def drift_bound(self, t: int) -> float:
        if self.gamma_p == GAMMA_INF:
            return 0.0
        return self.c_p / t ** self.gamma_p

    def pi_floor(self, t: int) -> float:
        return self.c_pi / t ** self.gamma_pi

    def to_spec(self) -> dict:
        gp = "inf" if self.gamma_p == GAMMA_INF else self.gamma_p
        return {"c_p": self.c_p, "gamma_p": gp, "c_pi": self.c_pi, "gamma_pi": self.gamma_pi}

    @staticmethod
    def from_spec(doc: dict) -> "DriftParams":
        gp = doc["gamma_p"]
        gp = GAMMA_INF if gp == "inf" else float(gp)
        return DriftParams(float(doc["c_p"]), gp, float(doc["c_pi"]), float(doc["gamma_pi"]))


class Schedule:
    """Deterministic map t -> P^(t), immutable after construction."""

    kind = "abstract"

    def __init__(self, n: int, params: DriftParams, rho_cap: float):
        self.n = int(n)
        self.params = params
        if not 0.0 <= rho_cap <= 1.0:
            raise ValueError(f"rho_cap {rho_cap} outside [0, 1]")
        self.rho_cap = float(rho_cap)

    def matrix_at(self, t: int) -> TransitionMatrix:
        if t < 1:
            raise ValueError(f"schedule time index starts at 1, got t={t}")
        return self._matrix_at(int(t))

    def _matrix_at(self, t: int) -> TransitionMatrix:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError


def _require_irreducible(mat: TransitionMatrix, what: str):
    if not chains.is_irreducible(mat):
        raise ValueError(f"{what} is reducible")


def _blend(a: np.ndarray, b: np.ndarray, w: float) -> TransitionMatrix:
    return TransitionMatrix((1.0 - w) * a + w * b)


class _ArcLength:
    """Lazily grown prefix sums S_k = sum_{u<=k} c_p/u**gamma_p, S_0 = 0."""

    def __init__(self, c_p: float, gamma_p: float):
        self.c_p = c_p
        self.gamma_p = gamma_p
        self._prefix = [0.0]

    def upto(self, k: int) -> float:
        prefix = self._prefix
        while len(prefix) <= k:
            u = len(prefix)
            prefix.append(prefix[-1] + self.c_p / u ** self.gamma_p)
        return prefix[k]


class ConstantSchedule(Schedule):
    kind = "constant"

    def __init__(self, p: TransitionMatrix, params: DriftParams | None = None):
        _require_irreducible(p, "constant schedule matrix")
        if params is None:
            pi_min = chains.stationary_distribution(p).min_prob()
            params = DriftParams(c_p=1.0, gamma_p=GAMMA_INF, c_pi=pi_min, gamma_pi=0.0)
        super().__init__(p.n, params, chains.ergodicity_coefficient(p))
        self.p = p

    def _matrix_at(self, t: int) -> TransitionMatrix:
        return self.p

    def to_spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params.to_spec(),
                "p": self.p.rows.tolist()}


class InterpolationSchedule(Schedule):
    """Convex walk from p_start toward p_end, advancing TV arc c_p/t^gamma_p.

    P^(t) = (1-w_t) p_start + w_t p_end with w_1 = 0 and the weight
    advancing by drift_bound(t)/D per step, clamped at 1; D is the TV
    distance between the endpoints.  D = 0 degenerates to a constant
    schedule.
    """

    kind = "interpolation"

    def __init__(self, p_start: TransitionMatrix, p_end: TransitionMatrix,
                 params: DriftParams):
        if p_start.n != p_end.n:
            raise ValueError("endpoint dimension mismatch")
        _require_irreducible(p_start, "p_start")
        _require_irreducible(p_end, "p_end")
        _require_irreducible(_blend(p_start.rows, p_end.rows, 0.5), "midpoint blend")
        rho_cap = max(chains.ergodicity_coefficient(p_start),
                      chains.ergodicity_coefficient(p_end))
        super().__init__(p_start.n, params, rho_cap)
        self.p_start = p_start
        self.p_end = p_end
        self.segment_length = matrix_tv_distance(p_start, p_end)
        self._arc = _ArcLength(params.c_p, params.gamma_p)

    def weight_at(self, t: int) -> float:
        if self.segment_length == 0.0 or self.params.gamma_p == GAMMA_INF:
            return 0.0
        return min(1.0, self._arc.upto(t - 1) / self.segment_length)

    def _matrix_at(self, t: int) -> TransitionMatrix:
        w = self.weight_at(t)
        if w == 0.0:
            return self.p_start
        if w == 1.0:
            return self.p_end
        return _blend(self.p_start.rows, self.p_end.rows, w)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params.to_spec(),
                "p_start": self.p_start.rows.tolist(),
                "p_end": self.p_end.rows.tolist()}


class CyclicSchedule(Schedule):
    """Endless convex walk around a cycle of anchor matrices.

    Advances TV arc length c_p/t^gamma_p per step; gamma_p must lie in
    (0, 1) so the total arc diverges (the cycle is traversed forever) while
    the per-step increments vanish.  This is the non-convergent family: the
    matrix sequence keeps moving yet its increments go to zero.
    """

    kind = "cyclic"

    def __init__(self, mats, params: DriftParams):
        mats = list(mats)
        if len(mats) < 2:
            raise ValueError("cyclic schedule needs at least 2 matrices")
        if not 0 < params.gamma_p < 1:
            raise ValueError("cyclic schedule needs gamma_p in (0, 1); "
                             "outside that the cycle stalls or degenerates")
        n = mats[0].n
        for i, m in enumerate(mats):
            if m.n != n:
                raise ValueError("cycle matrices must share a dimension")
            _require_irreducible(m, f"cycle matrix {i}")
        segs = []
        for i, m in enumerate(mats):
            nxt = mats[(i + 1) % len(mats)]
            length = matrix_tv_distance(m, nxt)
            if length > 0.0:
                _require_irreducible(_blend(m.rows, nxt.rows, 0.5),
                                     f"blend of cycle matrices {i},{(i + 1) % len(mats)}")
                segs.append((m.rows, nxt.rows, length))
        super().__init__(n, params, max(chains.ergodicity_coefficient(m) for m in mats))
        self.mats = mats
        self._segments = segs
        self._offsets = np.concatenate([[0.0], np.cumsum([s[2] for s in segs])])
        self.cycle_length = float(self._offsets[-1]) if segs else 0.0
        self._arc = _ArcLength(params.c_p, params.gamma_p)

    def _matrix_at(self, t: int) -> TransitionMatrix:
        if not self._segments:
            return self.mats[0]
        pos = math.fmod(self._arc.upto(t - 1), self.cycle_length)
        j = int(np.searchsorted(self._offsets, pos, side="right")) - 1
        j = min(j, len(self._segments) - 1)
        a, b, length = self._segments[j]
        w = (pos - self._offsets[j]) / length
        return _blend(a, b, min(max(w, 0.0), 1.0))

    def to_spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params.to_spec(),
                "mats": [m.rows.tolist() for m in self.mats]}


class ShrinkingStateSchedule(Schedule):
    """3-state birth-death family whose third state's stationary mass is
    exactly c_pi/t^gamma_pi.

    Built in reverse: fix the target pi^(t) = ((1-m)/2, (1-m)/2, m) with
    m = c_pi/t^gamma_pi and assemble the reversible nearest-neighbour
    chain with that stationary vector (propose a neighbour with prob 1/2,
    accept with the usual stationary-ratio rule).  With h = m/(1-m):

        [[1/2, 1/2,   0 ],
         [1/2, 1/2-h, h ],
         [ 0 , 1/2,  1/2]]

    Only the middle row moves, so the per-step drift is exactly
    h_t - h_{t+1}; construction scans it against the declared c_p/t^gamma_p
    and refuses parameter combinations that violate it.  The ergodicity
    coefficient is exactly 1/2 for all t (h <= 1/2 when c_pi <= 1/3).
    """

    kind = "shrinking-state"

    def __init__(self, params: DriftParams, drift_check_horizon: int = 10_000):
        if not params.gamma_pi > 0:
            raise ValueError("shrinking-state family needs gamma_pi > 0")
        if not 0 < params.c_pi <= 1.0 / 3.0:
            raise ValueError("c_pi must lie in (0, 1/3] so the third state is the minimum")
        if params.gamma_p == GAMMA_INF:
            raise ValueError("drifting family cannot declare gamma_p = inf")
        ts = np.arange(1, drift_check_horizon + 1, dtype=float)
        m = params.c_pi / ts ** params.gamma_pi
        h = m / (1.0 - m)
        drift = h[:-1] - h[1:]
        allowed = params.c_p / ts[:-1] ** params.gamma_p
        bad = drift > allowed + 1e-15
        if bad.any():
            t_bad = int(np.argmax(bad)) + 1
            raise ValueError(
                f"measured drift {drift[t_bad - 1]!r} at t={t_bad} exceeds the "
                f"declared bound {allowed[t_bad - 1]!r}")
        super().__init__(3, params, 0.5)
        self.max_measured_drift_ratio = float((drift / allowed).max())

    def min_mass(self, t: int) -> float:
        return self.params.pi_floor(t)

    def _matrix_at(self, t: int) -> TransitionMatrix:
        m = self.min_mass(t)
        h = m / (1.0 - m)
        return TransitionMatrix([[0.5, 0.5, 0.0],
                                 [0.5, 0.5 - h, h],
                                 [0.0, 0.5, 0.5]])

    def to_spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params.to_spec()}


def restart_wrap(p: TransitionMatrix, beta: float, beta_hat: float,
                 x_restart: int) -> TransitionMatrix:
    """Mix p with a deterministic jump to x_restart.

    P~ = (beta/beta_hat) p + (1 - beta/beta_hat) * (all mass to x_restart),
    which forces every row-pair overlap >= 1 - beta/beta_hat and hence an
    ergodicity coefficient <= beta/beta_hat.
    """
    if not 0 < beta < beta_hat < 1:
        raise ValueError(f"need 0 < beta < beta_hat < 1, got beta={beta}, beta_hat={beta_hat}")
    if not 0 <= x_restart < p.n:
        raise ValueError(f"restart state {x_restart} out of range")
    ratio = beta / beta_hat
    rows = ratio * p.rows.copy()
    rows[:, x_restart] += 1.0 - ratio
    return TransitionMatrix(rows)


class RestartWrappedSchedule(Schedule):
    """Applies restart_wrap to every matrix of an inner schedule.

    Row scaling makes the drift shrink by exactly beta/beta_hat, and
    rho_cap = beta/beta_hat holds regardless of the inner family.  The
    stationary floor has no comparably clean transfer, so by default c_pi
    is probed on a short construction scan and certified properly by
    verify_drift.
    """

    kind = "restart-wrapped"

    def __init__(self, inner: Schedule, beta: float, beta_hat: float, x_restart: int,
                 params: DriftParams | None = None, probe_horizon: int = 64):
        if not 0 < beta < beta_hat < 1:
            raise ValueError("need 0 < beta < beta_hat < 1")
        ratio = beta / beta_hat
        self.inner = inner
        self.beta = float(beta)
        self.beta_hat = float(beta_hat)
        self.x_restart = int(x_restart)
        if params is None:
            gamma_pi = inner.params.gamma_pi
            floor = min(
                chains.stationary_distribution(
                    restart_wrap(inner.matrix_at(t), beta, beta_hat, x_restart)
                ).min_prob() * t ** gamma_pi
                for t in range(1, probe_horizon + 1))
            params = DriftParams(c_p=ratio * inner.params.c_p,
                                 gamma_p=inner.params.gamma_p,
                                 c_pi=0.999 * floor, gamma_pi=gamma_pi)
        super().__init__(inner.n, params, ratio)

    def _matrix_at(self, t: int) -> TransitionMatrix:
        return restart_wrap(self.inner.matrix_at(t), self.beta, self.beta_hat,
                            self.x_restart)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "n": self.n, "params": self.params.to_spec(),
                "inner": self.inner.to_spec(), "beta": self.beta,
                "beta_hat": self.beta_hat, "x_restart": self.x_restart}


def interpolation_schedule(p_start, p_end, params) -> InterpolationSchedule:
    return InterpolationSchedule(p_start, p_end, params)


def cyclic_schedule(mats, params) -> CyclicSchedule:
    return CyclicSchedule(mats, params)


def shrinking_state_schedule(params, **kwargs) -> ShrinkingStateSchedule:
    return ShrinkingStateSchedule(params, **kwargs)


@dataclass(frozen=True)
class CertificateViolation:
    bound: str
    t: int
    observed: float
    allowed: float

    def __str__(self):
        return (f"{self.bound} violated at t={self.t}: "
                f"observed {self.observed!r} vs allowed {self.allowed!r}")


@dataclass
class DriftReport:
    """Scan evidence for a schedule's declared certificate."""

    t_max: int
    max_scaled_drift: float
    drift_argmax_t: int
    min_scaled_pi_floor: float
    pi_argmin_t: int
    max_rho: float
    rho_argmax_t: int
    pi_checkpoints_coarsened: bool
    pi_checkpoint_count: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class DriftCertificateError(ValueError):
    def __init__(self, report: DriftReport):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


_CERT_FUZZ = 1e-9


def _log_checkpoints(lo: int, hi: int, per_decade: int = 8):
    if hi <= lo:
        return []
    grid = np.unique(np.round(
        10 ** np.linspace(np.log10(lo), np.log10(hi),
                          max(2, int(per_decade * np.log10(hi / lo)) + 1))).astype(int))
    return [int(t) for t in grid if lo <= t <= hi]


def verify_drift(s: Schedule, t_max: int, pi_dense_limit: int = 10_000) -> DriftReport:
    """Scan-certify a schedule's declared (c_p, gamma_p, c_pi, gamma_pi, rho_cap).

    Checks, for t in [1, t_max]:
      * t**gamma_p * ||P^(t+1) - P^(t)||  <=  c_p   (zero drift when gamma_p=inf)
      * t**gamma_pi * pi^(t)_min          >=  c_pi
      * rho(P^(t))                        <=  rho_cap
    Stationary solves run at every t up to pi_dense_limit and on a
    logarithmic grid beyond (the coarsening is recorded in the report).
    Raises DriftCertificateError naming the first offending t per bound.
    """
    if t_max < 2:
        raise ValueError("t_max must be >= 2")
    params = s.params
    violations = []

    max_scaled_drift, drift_argmax = 0.0, 1
    max_rho, rho_argmax = 0.0, 1
    prev = s.matrix_at(1)
    drift_violation = pi_violation = rho_violation = None
    for t in range(1, t_max + 1):
        rho_t = chains.ergodicity_coefficient(prev)
        if rho_t > max_rho:
            max_rho, rho_argmax = rho_t, t
        if rho_t > s.rho_cap + 1e-12 and rho_violation is None:
            rho_violation = CertificateViolation("rho_cap", t, rho_t, s.rho_cap)
        if t < t_max:
            nxt = s.matrix_at(t + 1)
            drift = matrix_tv_distance(nxt, prev)
            if params.gamma_p == GAMMA_INF:
                scaled = 0.0 if drift <= 1e-15 else math.inf
            else:
                scaled = drift * t ** params.gamma_p
            if scaled > max_scaled_drift:
                max_scaled_drift, drift_argmax = scaled, t
            if scaled > params.c_p + _CERT_FUZZ and drift_violation is None:
                drift_violation = CertificateViolation(
                    "drift c_p", t, drift, params.drift_bound(t))
            prev = nxt

    dense_hi = min(t_max, pi_dense_limit)
    pi_ts = list(range(1, dense_hi + 1))
    coarsened = t_max > pi_dense_limit
    if coarsened:
        pi_ts += _log_checkpoints(dense_hi + 1, t_max)
    min_scaled_pi, pi_argmin = math.inf, 1
    for t in pi_ts:
        pi_min = chains.stationary_distribution(s.matrix_at(t)).min_prob()
        scaled = pi_min * t ** params.gamma_pi
        if scaled < min_scaled_pi:
            min_scaled_pi, pi_argmin = scaled, t
        if scaled < params.c_pi - _CERT_FUZZ and pi_violation is None:
            pi_violation = CertificateViolation("pi floor c_pi", t, pi_min,
                                                params.pi_floor(t))

    violations = [v for v in (drift_violation, pi_violation, rho_violation) if v]
    report = DriftReport(
        t_max=t_max,
        max_scaled_drift=max_scaled_drift, drift_argmax_t=drift_argmax,
        min_scaled_pi_floor=min_scaled_pi, pi_argmin_t=pi_argmin,
        max_rho=max_rho, rho_argmax_t=rho_argmax,
        pi_checkpoints_coarsened=coarsened, pi_checkpoint_count=len(pi_ts),
        violations=violations)
    if violations:
        raise DriftCertificateError(report)
    return report


def schedule_from_spec(doc: dict) -> Schedule:
    """Build a schedule from its JSON spec (see each family's to_spec)."""
    kind = doc["kind"]
    if kind == "constant":
        params = DriftParams.from_spec(doc["params"]) if "params" in doc else None
        return ConstantSchedule(TransitionMatrix(doc["p"]), params)
    if kind not in ("interpolation", "cyclic", "shrinking-state", "restart-wrapped"):
        raise ValueError(f"unknown schedule kind {kind!r}")
    params = DriftParams.from_spec(doc["params"])
    if kind == "interpolation":
        return InterpolationSchedule(TransitionMatrix(doc["p_start"]),
                                     TransitionMatrix(doc["p_end"]), params)
    if kind == "cyclic":
        return CyclicSchedule([TransitionMatrix(m) for m in doc["mats"]], params)
    if kind == "shrinking-state":
        return ShrinkingStateSchedule(params)
    # restart-wrapped
    inner = schedule_from_spec(doc["inner"])
    return RestartWrappedSchedule(inner, float(doc["beta"]), float(doc["beta_hat"]),
                                  int(doc["x_restart"]), params)
