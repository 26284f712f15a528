"""On-grid noiseless instances whose greedy recovery is guaranteed a priori.

Greedy selection over a coherent dictionary can fail on some on-grid
supports, so instances are drawn and kept only when a sufficient condition
for exact recovery holds. The conditions never run the estimator under test.

* angle domain: F is unitary, so any support is recovered.
* polar domain: exact recovery condition max_{k not in S} ||pinv(W_S) w_k||_1 < 1.
* hybrid 1 far + 1 near with kappa = 1: the far atom dominates the angle
  correlations, and the near atom is the strict maximiser of the polar
  correlation with the far-deflated residual.
"""

from dataclasses import dataclass

import numpy as np

from hybridfield.rng import complex_gaussian


@dataclass
class Instance:
    kind: str  # "far", "near" or "hybrid"
    h: np.ndarray
    basis: np.ndarray  # true support columns, N x L
    far_support: tuple
    near_support: tuple
    gains: np.ndarray


def erc_holds(w, support):
    ws = w[:, list(support)]
    proj = np.linalg.pinv(ws) @ w
    mask = np.ones(w.shape[1], dtype=bool)
    mask[list(support)] = False
    return np.abs(proj[:, mask]).sum(axis=0).max() < 1.0


def far_instance(f, rng, num_paths):
    n = f.shape[0]
    support = tuple(int(i) for i in rng.choice(n, num_paths, replace=False))
    gains = complex_gaussian(rng, num_paths)
    h = f[:, support] @ gains
    return Instance("far", h, f[:, support], support, (), gains)


def near_instance(w, grid, rng, num_paths, max_tries=1000):
    finite = np.array([i for i, g in enumerate(grid) if np.isfinite(g.distance)])
    for _ in range(max_tries):
        support = tuple(int(i) for i in rng.choice(finite, num_paths, replace=False))
        if erc_holds(w, support):
            gains = complex_gaussian(rng, num_paths)
            return Instance("near", w[:, support] @ gains, w[:, support], (), support, gains)
    raise RuntimeError("no near-field support satisfying the recovery condition")


def hybrid_instance(f, w, grid, rng, max_tries=1000):
    finite = np.array([i for i, g in enumerate(grid) if np.isfinite(g.distance)])
    for _ in range(max_tries):
        i = int(rng.integers(f.shape[1]))
        j = int(rng.choice(finite))
        a, b = complex_gaussian(rng, 2)
        # |c_i| + max_{k != i} |c_k| <= sqrt(2) for c = F^H w_j, so this margin
        # makes f_i the first pick
        if abs(a) <= np.sqrt(2) * abs(b):
            continue
        fi, wj = f[:, i], w[:, j]
        u = wj - fi * np.vdot(fi, wj)
        corr = np.abs(w.conj().T @ u)
        others = np.delete(corr, j)
        if corr[j] <= others.max() * (1 + 1e-9):
            continue
        basis = np.column_stack([fi, wj])
        gains = np.array([a, b])
        return Instance("hybrid", basis @ gains, basis, (i,), (j,), gains)
    raise RuntimeError("no hybrid instance satisfying the recovery condition")


def oracle_fit(basis, h):
    """Brute-force LS on the true support (P = I)."""
    coef, *_ = np.linalg.lstsq(basis, h, rcond=None)
    return basis @ coef
