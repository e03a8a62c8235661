"""Adiabatic vs diabatic separation experiment.

Sweeps the drift exponent at fixed learning rate (gamma_alpha = 0.6,
gamma_pi = 0): a slowly drifting chain (gamma_p = 1.0, interpolation
family) tracks its moving fixed point, while a fast cyclic drift
(gamma_p = 0.3) leaves the learner lagging by a widening factor.

Usage: python3 scripts/run_separation.py [out_dir]
"""

import sys

from adiatrack.harness import ExperimentConfig, run_sweep

BASE = {
    "schedule": {"kind": "interpolation", "n": 2,
                 "params": {"c_p": 0.05, "gamma_p": 1.0,
                            "c_pi": 0.25, "gamma_pi": 0.0},
                 "p_start": [[0.9, 0.1], [0.2, 0.8]],
                 "p_end": [[0.1, 0.9], [0.8, 0.2]]},
    "reward": {"r": [1.0, 0.0], "beta": 0.5},
    "rate": {"c_alpha": 0.5, "gamma_alpha": 0.6},
    "t_max": 100_000,
    "seeds": {"base": 101, "count": 20},
    "checkpoints": {"per_decade": 8},
}
GRID = {"gamma_p": [1.0, 0.3, "inf"], "gamma_alpha": [0.6], "gamma_pi": [0.0]}


def main(out_dir="out/separation"):
    rows = run_sweep(GRID, ExperimentConfig.from_dict(BASE), out_dir)
    width = max(len(r["cell"]) for r in rows)
    for row in rows:
        if row["status"] != "ok":
            print(f"{row['cell']:<{width}}  {row['status']}")
            continue
        print(f"{row['cell']:<{width}}  regime={row['regime']:<9} "
              f"final_median={row['final_median_error']:.5f} "
              f"slope={row['slope']:+.3f}")
    print(f"table: {out_dir}/sweep.csv")


if __name__ == "__main__":
    main(*sys.argv[1:])
