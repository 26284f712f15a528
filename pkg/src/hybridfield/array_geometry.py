"""Uniform linear array geometry and steering vectors.

Phase convention
----------------
Element ``n`` (0-based) sits at offset ``n*d`` from the first element for the
planar-wave model and at ``delta_n*d`` from the array centre for the
spherical-wave model, ``delta_n = (2n - N + 1)/2``. The two vectors are

    a(theta)_n    = exp(+j 2pi/lambda * n d theta) / sqrt(N)
    b(theta, r)_n = exp(-j 2pi/lambda * (r_n - r)) / sqrt(N)

with ``r_n = sqrt(r^2 + delta_n^2 d^2 - 2 r delta_n d theta)``. Since
``r_n - r -> -delta_n d theta`` as r grows, ``b(theta, r)`` tends to
``a(theta)`` times the unit-modulus constant ``exp(-j pi/lambda (N-1) d theta)``.
Dictionaries and channels are all built from these two functions, so the
convention is consistent everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class ArrayConfig:
    """ULA with ``num_antennas`` elements; spacing defaults to half a wavelength."""

    num_antennas: int
    wavelength: float = 0.01
    antenna_spacing: float | None = field(default=None)

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 2:
            raise ConfigurationError(f"num_antennas must be an integer >= 2, got {self.num_antennas}")
        if not self.wavelength > 0:
            raise ConfigurationError(f"wavelength must be positive, got {self.wavelength}")
        if self.antenna_spacing is None:
            object.__setattr__(self, "antenna_spacing", self.wavelength / 2)
        if not self.antenna_spacing > 0:
            raise ConfigurationError(f"antenna_spacing must be positive, got {self.antenna_spacing}")

    @property
    def aperture(self) -> float:
        """End-to-end span (N-1)*d."""
        return (self.num_antennas - 1) * self.antenna_spacing

    @property
    def rayleigh_distance(self) -> float:
        return rayleigh_distance(self)

    @property
    def guard_radius(self) -> float:
        """Smallest admissible scatterer distance, d*N."""
        return self.antenna_spacing * self.num_antennas

    def element_offsets(self) -> np.ndarray:
        """delta_n for n = 0..N-1 (centred, in units of d)."""
        n = np.arange(self.num_antennas)
        return (2 * n - self.num_antennas + 1) / 2


def rayleigh_distance(cfg: ArrayConfig) -> float:
    """2 D^2 / lambda with D = (N-1) d."""
    return 2.0 * cfg.aperture**2 / cfg.wavelength


def _check_angle(theta: float) -> float:
    theta = float(theta)
    if not -1.0 <= theta <= 1.0:
        raise DomainError(f"normalized angle must lie in [-1, 1], got {theta}")
    return theta


def far_steering(cfg: ArrayConfig, theta: float) -> np.ndarray:
    """Planar-wave steering vector a(theta), unit norm."""
    theta = _check_angle(theta)
    n = np.arange(cfg.num_antennas)
    phase = 2 * np.pi / cfg.wavelength * cfg.antenna_spacing * theta * n
    return np.exp(1j * phase) / math.sqrt(cfg.num_antennas)


def element_distances(cfg: ArrayConfig, theta: float, r: float) -> np.ndarray:
    """Distance from a point source at (theta, r) to every element."""
    delta_d = cfg.element_offsets() * cfg.antenna_spacing
    return np.sqrt(r * r + delta_d * delta_d - 2 * r * delta_d * theta)


def near_steering(cfg: ArrayConfig, theta: float, r: float) -> np.ndarray:
    """Spherical-wave steering vector b(theta, r), unit norm.

    Raises DomainError for r <= 0 or r below the guard radius d*N.
    """
    theta = _check_angle(theta)
    r = float(r)
    if not r > 0:
        raise DomainError(f"distance must be positive, got {r}")
    if r < cfg.guard_radius:
        raise DomainError(
            f"distance {r} m is below the guard radius d*N = {cfg.guard_radius} m"
        )
    # r_n - r computed as a difference of squares over a sum to avoid cancellation at large r
    delta_d = cfg.element_offsets() * cfg.antenna_spacing
    rn = element_distances(cfg, theta, r)
    excess = (delta_d * delta_d - 2 * r * delta_d * theta) / (rn + r)
    return np.exp(-2j * np.pi / cfg.wavelength * excess) / math.sqrt(cfg.num_antennas)
