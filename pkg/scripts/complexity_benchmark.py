"""Wall-clock time of one HF-OMP estimate as the sparsity budget grows.

A naive per-step refit costs O(N M K_f^3) + O(S M K_n^3). With the
incremental QR used here each step costs one correlation sweep (S M) plus an
O(M K) column update, so growth in K is close to linear until the update
term catches up. No asymptotic constant is asserted; the ratios are printed.
"""

import argparse
import time

import numpy as np

from hybridfield.array_geometry import ArrayConfig
from hybridfield.channel_model import random_channel
from hybridfield.dictionaries import dft_dictionary, polar_dictionary
from hybridfield.estimators import hf_omp_estimate
from hybridfield.measurement import observe, random_pilots


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--antennas", type=int, default=256)
    ap.add_argument("--pilots", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    cfg = ArrayConfig(args.antennas)
    f, w = dft_dictionary(cfg), polar_dictionary(cfg)
    p = random_pilots(args.pilots, args.antennas, 1)
    sensing = (p @ f.matrix, p @ w.matrix)
    rec = observe(p, random_channel(cfg, 6, 0.5, rng_seed=2), 0.3, 3)
    print(f"N={cfg.num_antennas} M={args.pilots} S={w.num_columns}")
    print("kappa     K   seconds")
    prev = None
    for kappa in (1, 2, 4, 8, 16):
        if kappa * 6 > args.pilots:
            break
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            hf_omp_estimate(rec.y, p, f, w, 6, 0.5, kappa, sensing=sensing)
            times.append(time.perf_counter() - t0)
        t = float(np.median(times))
        ratio = "" if prev is None else f"  x{t / prev:.2f}"
        print(f"{kappa:5d} {6 * kappa:5d} {t:9.4f}{ratio}")
        prev = t


if __name__ == "__main__":
    main()
