"""Finite-state probability primitives.

Distributions and row-stochastic matrices are validated at construction and
never silently repaired: a row sum off by more than 1e-12 is a bug in the
caller (usually a schedule), not something to renormalize away.  All
probability arithmetic is 64-bit float; the stated tolerances absorb
rounding.

The unsubscripted distance between distributions is total variation,
tv(a, b) = 0.5 * sum |a_x - b_x|, and between matrices the maximum row TV.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-12
ENTRY_TOL = 1e-12

__all__ = [
    "Distribution",
    "TransitionMatrix",
    "ChainPath",
    "InvariantError",
    "tv_distance",
    "matrix_tv_distance",
    "ergodicity_coefficient",
    "stationary_distribution",
    "is_irreducible",
    "second_eigenvalue_2x2",
    "propagate_marginal",
    "simulate",
    "path_rng",
    "sample_from_row",
    "point_mass",
    "uniform_distribution",
    "load_matrix",
]


class InvariantError(ValueError):
    """A probability object violated its construction invariants."""


def _finite_array(values, name):
    arr = np.array(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvariantError(f"{name} contains non-finite entries")
    return arr


class Distribution:
    """Probability vector: entries in [0, 1], summing to 1 within 1e-12."""

    __slots__ = ("probs",)

    def __init__(self, probs):
        arr = _finite_array(probs, "distribution")
        if arr.ndim != 1 or arr.size == 0:
            raise InvariantError("distribution must be a non-empty vector")
        if arr.min() < -ENTRY_TOL or arr.max() > 1.0 + ENTRY_TOL:
            raise InvariantError(f"entries outside [0,1]: min={arr.min()}, max={arr.max()}")
        if abs(arr.sum() - 1.0) > ROW_SUM_TOL:
            raise InvariantError(f"probabilities sum to {arr.sum()!r}, not 1")
        arr.flags.writeable = False
        self.probs = arr

    @property
    def n(self) -> int:
        return self.probs.size

    def min_prob(self) -> float:
        return float(self.probs.min())

    def __repr__(self):
        return f"Distribution({self.probs.tolist()})"


class TransitionMatrix:
    """Row-stochastic n x n matrix: rows are Distributions within 1e-12."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        arr = _finite_array(rows, "transition matrix")
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise InvariantError(f"expected square matrix, got shape {arr.shape}")
        if arr.min() < -ENTRY_TOL or arr.max() > 1.0 + ENTRY_TOL:
            raise InvariantError(f"entries outside [0,1]: min={arr.min()}, max={arr.max()}")
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            x = int(np.argmax(bad))
            raise InvariantError(f"row {x} sums to {sums[x]!r}, not 1")
        arr.flags.writeable = False
        self.rows = arr

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def __repr__(self):
        return f"TransitionMatrix({self.rows.tolist()})"


@dataclass(frozen=True)
class ChainPath:
    """A sampled trajectory: states[t] is the state after t transitions."""

    states: np.ndarray
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.states, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "states", arr)

    def __len__(self):
        return self.states.size


def point_mass(n: int, x: int) -> Distribution:
    probs = np.zeros(n)
    probs[x] = 1.0
    return Distribution(probs)


def uniform_distribution(n: int) -> Distribution:
    return Distribution(np.full(n, 1.0 / n))


def _tv(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(a - b).sum())


def tv_distance(lam: Distribution, mu: Distribution) -> float:
    """Total variation 0.5 * sum |lam_x - mu_x|; symmetric, in [0, 1]."""
    if lam.n != mu.n:
        raise ValueError(f"dimension mismatch: {lam.n} vs {mu.n}")
    return _tv(lam.probs, mu.probs)


def matrix_tv_distance(p: TransitionMatrix, q: TransitionMatrix) -> float:
    """Maximum over rows of the row-wise total variation distance."""
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    return float(0.5 * np.abs(p.rows - q.rows).sum(axis=1).max())


def ergodicity_coefficient(p: TransitionMatrix) -> float:
    """Maximum TV distance between any two rows of p.

    Computed brute-force over row pairs; cross-checked against the
    equivalent overlap form 1 - min_{x1,x2} sum_y min(P[x1,y], P[x2,y]),
    which must agree to 1e-12.
    """
    rows = p.rows
    pair_tv = 0.5 * np.abs(rows[:, None, :] - rows[None, :, :]).sum(axis=2)
    rho = float(pair_tv.max())
    overlap = float(1.0 - np.minimum(rows[:, None, :], rows[None, :, :]).sum(axis=2).min())
    if abs(rho - overlap) > 1e-12:
        raise ArithmeticError(
            f"row-pair TV maximum {rho!r} disagrees with overlap form {overlap!r}")
    return rho


def is_irreducible(p: TransitionMatrix) -> bool:
    """True iff the directed graph on positive entries is strongly connected."""
    adj = p.rows > 0.0
    return _reaches_all(adj) and _reaches_all(adj.T)


def _reaches_all(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        x = stack.pop()
        for y in np.nonzero(adj[x])[0]:
            if not seen[y]:
                seen[y] = True
                stack.append(int(y))
    return bool(seen.all())


def stationary_distribution(p: TransitionMatrix, tol: float = 1e-12) -> Distribution:
    """Unique pi with pi P = pi, by direct linear solve.

    (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1; one
    step of iterative refinement; the TV residual of pi P vs pi must come
    out below tol or this raises.
    """
    if not is_irreducible(p):
        raise ValueError("transition matrix is reducible; no unique stationary distribution")
    n = p.n
    a = p.rows.T - np.eye(n)
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
        pi = pi + np.linalg.solve(a, b - a @ pi)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular stationary system: {exc}") from exc
    resid = _tv(pi @ p.rows, pi)
    if resid > tol:
        raise ValueError(f"stationary residual {resid!r} exceeds tol {tol!r}")
    return Distribution(pi)


def second_eigenvalue_2x2(p: TransitionMatrix) -> float:
    """The non-unit eigenvalue trace(P) - 1 of a 2x2 stochastic matrix."""
    if p.n != 2:
        raise ValueError(f"analytic second eigenvalue needs n=2, got n={p.n}")
    return float(p.rows[0, 0] + p.rows[1, 1] - 1.0)


def propagate_marginal(lam0: Distribution, mats) -> Distribution:
    """Exact left fold lam0 * P1 * ... * PT, renormalized once at the end.

    The float drift |sum - 1| accumulated over the fold must stay below
    1e-9 before renormalization.
    """
    v = lam0.probs.copy()
    for m in mats:
        if m.n != v.size:
            raise ValueError(f"dimension mismatch: {v.size} vs {m.n}")
        v = v @ m.rows
    drift = abs(v.sum() - 1.0)
    if drift >= 1e-9:
        raise ArithmeticError(f"marginal drifted from the simplex by {drift!r}")
    return Distribution(v / v.sum())


def path_rng(seed: int) -> np.random.Generator:
    """The per-path uniform stream; one stream per path, derived from seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), 0])))


def sample_from_row(row_cumsum: np.ndarray, u: float) -> int:
    """Inverse-CDF draw: first index whose cumulative mass exceeds u."""
    i, last = 0, row_cumsum.size - 1
    while i < last and row_cumsum[i] <= u:
        i += 1
    return i


def simulate(schedule, t_max: int, x0: int, seed: int) -> ChainPath:
    """Sample a path of length t_max + 1; transition t uses schedule matrix t.

    One uniform draw per step from the path's own seeded stream, so equal
    (schedule, seed, t_max, x0) reproduce the identical path.
    """
    n = schedule.n
    if not 0 <= x0 < n:
        raise ValueError(f"initial state {x0} out of range for n={n}")
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    states = np.empty(t_max + 1, dtype=np.int64)
    states[0] = x0
    uniforms = path_rng(seed).random(t_max)
    x = x0
    for t in range(1, t_max + 1):
        cum = np.cumsum(schedule.matrix_at(t).rows[x])
        x = sample_from_row(cum, uniforms[t - 1])
        states[t] = x
    return ChainPath(states=states, seed=int(seed))


def load_matrix(path) -> TransitionMatrix:
    """Read a transition matrix from JSON {"n":…, "rows":[[…]]} or CSV."""
    path = str(path)
    if path.endswith(".json"):
        with open(path) as fh:
            doc = json.load(fh)
        rows = doc["rows"]
        if "n" in doc and int(doc["n"]) != len(rows):
            raise InvariantError(f"declared n={doc['n']} but {len(rows)} rows present")
        return TransitionMatrix(rows)
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return TransitionMatrix(rows)
