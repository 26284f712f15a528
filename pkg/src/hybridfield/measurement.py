"""Pilot matrices and the noisy observation y = P h + n.

Noise convention: ``sigma2`` is the total variance of each complex noise
sample, so the real and imaginary parts each carry ``sigma2 / 2`` and
SNR = 1 / sigma2 for unit-power path gains.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .channel_model import ChannelRealization
from .errors import ConfigurationError, DomainError
from .rng import as_generator, complex_gaussian


def random_pilots(num_pilots: int, num_antennas: int, rng_seed=0, allow_oversampled: bool = False) -> np.ndarray:
    """M x N matrix of equiprobable +-1/sqrt(M) entries."""
    if num_pilots < 1:
        raise ConfigurationError(f"need at least one pilot, got M = {num_pilots}")
    if num_pilots > num_antennas and not allow_oversampled:
        raise ConfigurationError(
            f"M = {num_pilots} exceeds N = {num_antennas}; pass allow_oversampled=True to permit it"
        )
    rng = as_generator(rng_seed)
    signs = rng.integers(0, 2, size=(num_pilots, num_antennas))
    scale = 1.0 / math.sqrt(num_pilots)
    return np.where(signs == 1, scale, -scale)


def identity_pilots(num_antennas: int) -> np.ndarray:
    return np.eye(num_antennas)


def snr_to_sigma2(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    y: np.ndarray
    pilots: np.ndarray
    sigma2: float
    truth: ChannelRealization | np.ndarray
    noise: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.truth.h if isinstance(self.truth, ChannelRealization) else self.truth


def observe(pilots: np.ndarray, h, sigma2: float, rng_seed=0) -> MeasurementRecord:
    """y = P h + n with n ~ CN(0, sigma2 I)."""
    vec = h.h if isinstance(h, ChannelRealization) else np.asarray(h)
    if pilots.ndim != 2 or vec.ndim != 1 or pilots.shape[1] != vec.shape[0]:
        raise DomainError(f"pilot matrix {pilots.shape} does not match channel of length {vec.shape}")
    if not sigma2 >= 0:
        raise DomainError(f"noise power must be non-negative, got {sigma2}")
    clean = pilots @ vec
    if sigma2 == 0:
        noise = np.zeros(pilots.shape[0], dtype=complex)
        y = clean.astype(complex)
    else:
        noise = complex_gaussian(as_generator(rng_seed), pilots.shape[0], sigma2)
        y = clean + noise
    return MeasurementRecord(y, pilots, float(sigma2), h, noise)
