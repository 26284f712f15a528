"""NMSE against the far-field ratio gamma at 5 dB SNR.

    python3 scripts/run_gamma_sweep.py --profile desk --trials 500 --out results/gamma.csv
"""

import argparse
import logging
import os

from hybridfield.experiments import PROFILES, run_gamma_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results/gamma.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    cfg = PROFILES[args.profile](trials=args.trials, seed=args.seed, snr_db=5.0)
    res = run_gamma_sweep(cfg, workers=args.workers)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    res.write_csv(args.out)
    res.write_metadata(args.out + ".meta")

    print("gamma   " + "  ".join(f"{e:>14s}" for e in cfg.estimators))
    for g in cfg.gamma_points:
        cells = [f"{res.row(g, e).nmse_db:7.2f} +-{res.row(g, e).stderr_db:4.2f}" for e in cfg.estimators]
        print(f"{g:6.3f}  " + "  ".join(f"{c:>14s}" for c in cells))


if __name__ == "__main__":
    main()
