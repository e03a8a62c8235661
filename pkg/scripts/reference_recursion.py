"""Straight-line reference recursions that fix the tracking-error fixtures.

Deliberately self-contained (no package imports): the thresholds frozen in
tests/fixtures/tracking_reference.json must come from an independent code
path.  Conventions shared with the library, so numbers are comparable:

  * path RNG: numpy Generator(PCG64(SeedSequence([seed, 0]))), uniforms
    pre-drawn as one block, one uniform per transition
  * transition t (t = 1..T) moves x_{t-1} -> x_t using matrix P^(t),
    inverse-CDF over the current row
  * learning rate c_alpha / t**gamma_alpha, tables start at zero
  * seeds for a 20-run batch are base_seed + k

Run:  python scripts/reference_recursion.py [out.json]
"""

import json
import sys
import time

import numpy as np

A = np.array([[0.9, 0.1], [0.2, 0.8]])
B = np.array([[0.1, 0.9], [0.8, 0.2]])
R_VEC = np.array([1.0, 0.0])
BETA = 0.5
C_ALPHA, G_ALPHA = 0.5, 0.6
T_MAX = 100_000
N_SEEDS = 20
TD_BASE_SEED = 101
Q_BASE_SEED = 211


def log_grid(t_max, per_decade=8):
    k = int(round(per_decade * np.log10(t_max)))
    ts = sorted({int(round(10 ** e)) for e in np.linspace(0.0, np.log10(t_max), k + 1)})
    return [t for t in ts if 1 <= t <= t_max]


def matrix_tv(p, q):
    return 0.5 * np.abs(p - q).sum(axis=1).max()


def fixed_point(p, r, beta):
    return np.linalg.solve(np.eye(len(p)) - beta * p, r)


def sample(cum, u):
    i, last = 0, len(cum) - 1
    while i < last and cum[i] <= u:
        i += 1
    return i


def arc_prefix(t_max, c_p, gamma_p):
    # S[k] = sum_{u=1..k} c_p / u**gamma_p, S[0] = 0
    steps = c_p / np.arange(1, t_max + 2, dtype=float) ** gamma_p
    return np.concatenate([[0.0], np.cumsum(steps)])


def interpolation_matrices(t_max, c_p, gamma_p):
    d = matrix_tv(A, B)
    s = arc_prefix(t_max, c_p, gamma_p)
    mats = np.empty((t_max + 2, 2, 2))
    for t in range(1, t_max + 2):
        w = min(1.0, s[t - 1] / d)
        mats[t] = (1 - w) * A + w * B
    return mats


def cyclic_matrices(t_max, c_p, gamma_p):
    leg = matrix_tv(A, B)
    total = 2 * leg
    s = arc_prefix(t_max, c_p, gamma_p)
    mats = np.empty((t_max + 2, 2, 2))
    for t in range(1, t_max + 2):
        pos = s[t - 1] % total
        if pos < leg:
            w = pos / leg
            mats[t] = (1 - w) * A + w * B
        else:
            w = (pos - leg) / leg
            mats[t] = (1 - w) * B + w * A
    return mats


def td_run(mats, r, beta, t_max, seed, cps):
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    uniforms = gen.random(t_max)
    table = np.zeros(len(r))
    x = 0
    errs, k, star_cache = [], 0, {}
    for t in range(1, t_max + 1):
        cum = np.cumsum(mats[t][x])
        xn = sample(cum, uniforms[t - 1])
        a = C_ALPHA / t ** G_ALPHA
        table[x] = table[x] + a * (r[x] + beta * table[xn] - table[x])
        x = xn
        if k < len(cps) and t == cps[k]:
            if t not in star_cache:
                star_cache[t] = fixed_point(mats[t], r, beta)
            errs.append(float(np.abs(table - star_cache[t]).max()))
            k += 1
    return np.array(errs)


def q_star(p, r, beta, n_actions, tol=1e-12):
    nsa = len(r)
    s_of = np.arange(nsa) // n_actions
    q = np.zeros(nsa)
    while True:
        v = q.reshape(-1, n_actions).max(axis=1)
        gq = r + beta * (p @ v[s_of])
        if np.abs(gq - q).max() <= (1 - beta) * tol:
            return gq
        q = gq


def q_run(p, r, beta, n_actions, t_max, seed, cps):
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    uniforms = gen.random(t_max)
    star = q_star(p, r, beta, n_actions)
    cums = np.cumsum(p, axis=1)
    q = np.zeros(len(r))
    x = 0
    errs, k = [], 0
    for t in range(1, t_max + 1):
        xn = sample(cums[x], uniforms[t - 1])
        sp = xn // n_actions
        boot = max(q[sp * n_actions:(sp + 1) * n_actions])
        a = C_ALPHA / t ** G_ALPHA
        q[x] = q[x] + a * (r[x] + beta * boot - q[x])
        x = xn
        if k < len(cps) and t == cps[k]:
            errs.append(float(np.abs(q - star).max()))
            k += 1
    return np.array(errs)


def batch(run_fn, base_seed, cps):
    per_seed = np.array([run_fn(base_seed + k) for k in range(N_SEEDS)])
    return np.median(per_seed, axis=0)


def fit_slope(ts, med, t_lo, t_hi):
    ts = np.asarray(ts, dtype=float)
    mask = (ts >= t_lo) & (ts <= t_hi) & (med > 0)
    coef = np.polyfit(np.log(ts[mask]), np.log(med[mask]), 1)
    return float(coef[0])


def decade_median(ts, med, t_lo, t_hi):
    ts = np.asarray(ts, dtype=float)
    mask = (ts >= t_lo) & (ts <= t_hi)
    return float(np.median(med[mask]))


def main(out_path):
    t0 = time.time()
    cps = log_grid(T_MAX)
    out = {"t_max": T_MAX, "n_seeds": N_SEEDS, "checkpoints": cps,
           "c_alpha": C_ALPHA, "gamma_alpha": G_ALPHA, "beta": BETA}

    const_mats = np.broadcast_to(A, (T_MAX + 2, 2, 2))
    med_static = batch(lambda s: td_run(const_mats, R_VEC, BETA, T_MAX, s, cps),
                       TD_BASE_SEED, cps)
    adjacent = [(cps[i], float(med_static[i]), float(med_static[i + 1]))
                for i in range(len(cps) - 1)
                if cps[i] >= 1000 and med_static[i + 1] > med_static[i]]
    out["static_td"] = {
        "base_seed": TD_BASE_SEED,
        "median_final": float(med_static[-1]),
        "slope_1e3_1e5": fit_slope(cps, med_static, 1e3, T_MAX),
        "checkpoint_medians": [float(v) for v in med_static],
        "monotonicity": {"violations_after_1e3": adjacent,
                         "max_up_ratio": max([b / a for (_, a, b) in adjacent], default=1.0)},
    }
    print(f"static_td: final={out['static_td']['median_final']:.5f} "
          f"slope={out['static_td']['slope_1e3_1e5']:.3f} "
          f"up_ratio={out['static_td']['monotonicity']['max_up_ratio']:.3f} "
          f"[{time.time()-t0:.0f}s]")

    adia_mats = interpolation_matrices(T_MAX, 0.05, 1.0)
    med_adia = batch(lambda s: td_run(adia_mats, R_VEC, BETA, T_MAX, s, cps),
                     TD_BASE_SEED, cps)
    dia_mats = cyclic_matrices(T_MAX, 0.05, 0.3)
    med_dia = batch(lambda s: td_run(dia_mats, R_VEC, BETA, T_MAX, s, cps),
                    TD_BASE_SEED, cps)
    adia_first = decade_median(cps, med_adia, 1, 10)
    adia_last = decade_median(cps, med_adia, T_MAX // 10, T_MAX)
    dia_last = decade_median(cps, med_dia, T_MAX // 10, T_MAX)
    out["adiabatic"] = {"c_p": 0.05, "gamma_p": 1.0, "family": "interpolation",
                        "median_final": float(med_adia[-1]),
                        "first_decade": adia_first, "last_decade": adia_last,
                        "checkpoint_medians": [float(v) for v in med_adia]}
    out["diabatic"] = {"c_p": 0.05, "gamma_p": 0.3, "family": "cyclic",
                       "median_final": float(med_dia[-1]),
                       "last_decade": dia_last,
                       "checkpoint_medians": [float(v) for v in med_dia]}
    out["separation"] = {"final_ratio": float(med_dia[-1] / med_adia[-1]),
                         "last_decade_ratio": dia_last / adia_last}
    print(f"adiabatic: final={med_adia[-1]:.5f} first_dec={adia_first:.4f} last_dec={adia_last:.5f}")
    print(f"diabatic : final={med_dia[-1]:.5f} last_dec={dia_last:.5f}")
    print(f"separation ratios: final={out['separation']['final_ratio']:.2f} "
          f"last_decade={out['separation']['last_decade_ratio']:.2f} [{time.time()-t0:.0f}s]")

    trans = {(0, 0): (0.9, 0.1), (0, 1): (0.2, 0.8), (1, 0): (0.7, 0.3), (1, 1): (0.4, 0.6)}
    p_q = np.zeros((4, 4))
    for (s, a), row in trans.items():
        for sp in range(2):
            for ap in range(2):
                p_q[2 * s + a, 2 * sp + ap] = row[sp] * 0.5
    r_q = np.array([1.0, 0.0, 0.5, 0.25])
    per_seed_q = np.array([q_run(p_q, r_q, BETA, 2, T_MAX, Q_BASE_SEED + k, cps)
                           for k in range(N_SEEDS)])
    med_q = np.median(per_seed_q, axis=0)
    out["static_q"] = {"base_seed": Q_BASE_SEED, "p": p_q.tolist(), "r": r_q.tolist(),
                       "n_actions": 2, "median_final": float(med_q[-1]),
                       "checkpoint_medians": [float(v) for v in med_q]}
    print(f"static_q : final={med_q[-1]:.5f} [{time.time()-t0:.0f}s]")

    with open(out_path, "w") as fh:
        json.dump(out, fh, indent=1)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/tracking_reference.json")
