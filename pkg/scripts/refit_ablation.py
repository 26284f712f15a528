"""Compare the stage-2 coefficient refit variants of HF-OMP on one SNR sweep.

All variants see the same trials, so differences are paired.
"""

import argparse
import os

import numpy as np

from hybridfield.experiments import desk_profile, run_snr_sweep


VARIANTS = [
    ("compensated+final", dict(refit="compensated", final_refit=True)),
    ("compensated", dict(refit="compensated", final_refit=False)),
    ("joint", dict(refit="joint", final_refit=False)),
    ("observation", dict(refit="observation", final_refit=False)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=120)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    base = desk_profile(trials=args.trials, seed=args.seed, estimators=("ff_omp", "nf_omp"))
    ref = run_snr_sweep(base, workers=args.workers)
    table = {name: [ref.row(s, name).nmse_db for s in base.snr_grid] for name in ("ff_omp", "nf_omp")}
    for label, kw in VARIANTS:
        res = run_snr_sweep(desk_profile(trials=args.trials, seed=args.seed, estimators=("hf_omp",), **kw),
                            workers=args.workers)
        table["hf " + label] = [res.row(s, "hf_omp").nmse_db for s in base.snr_grid]

    print(f"{'':22s}" + "".join(f"{s:>8g}" for s in base.snr_grid))
    for name, vals in table.items():
        print(f"{name:22s}" + "".join(f"{v:8.2f}" for v in vals))
    best = min(table, key=lambda k: np.mean(table[k]))
    print(f"lowest mean NMSE: {best}")


if __name__ == "__main__":
    main()
