"""Seedable random streams.

Every random quantity in a simulation is drawn from a child stream addressed
by ``(base_seed, *key)``. The key is an explicit tuple of small integers
(purpose tag, trial index, ...), so a trial's draws depend only on its address
and never on execution order. That is what lets serial and process-parallel
sweeps produce identical numbers.

Streams are PCG64 generators seeded through ``numpy.random.SeedSequence``
with the key as ``spawn_key``. Complex Gaussians are built from uniforms with
the polar Box-Muller map rather than numpy's ziggurat sampler, so the
transform is pinned in this module.
"""

from __future__ import annotations

import numpy as np

# purpose tags for the first element of a stream key
TRIAL = 1
TRAINING = 2

# sub-stream tags inside one trial
PATHS = 0
PILOTS = 1
NOISE = 2
BENCH_NOISE = 3


def stream(base_seed: int, *key: int) -> np.random.Generator:
    """Return the generator addressed by ``(base_seed, *key)``."""
    if base_seed < 0:
        raise ValueError(f"seed must be non-negative, got {base_seed}")
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed))


def complex_gaussian(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, CN(0, variance).

    |z|^2 is exponential with mean ``variance`` and the phase is uniform, so
    each real dimension gets variance/2.
    """
    u1 = 1.0 - rng.random(size)  # (0, 1], keeps log finite
    u2 = rng.random(size)
    magnitude = np.sqrt(-variance * np.log(u1))
    return magnitude * np.exp(2j * np.pi * u2)
