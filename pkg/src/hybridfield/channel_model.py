"""Random path draws and hybrid-field channel synthesis.

A hybrid-field channel with L paths, ``round(gamma*L)`` of them far-field::

    h = sqrt(N/L) * (sum_far alpha a(theta) + sum_near alpha b(theta, r))

``gamma = 1`` is the planar-wave channel and ``gamma = 0`` the spherical-wave
channel.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .array_geometry import ArrayConfig, far_steering, near_steering
from .errors import ConfigurationError, DomainError
from .rng import as_generator, complex_gaussian

FAR = "far"
NEAR = "near"

DEFAULT_ANGLE_RANGE = (-1.0, 1.0)
DEFAULT_DISTANCE_RANGE = (10.0, 80.0)


def split_count(total: int, gamma: float) -> int:
    """round(gamma * total) with exact halves going up (toward the far side).

    A 1e-9 slack absorbs binary round-off, e.g. 0.35 * 10 = 3.4999999999999996.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigurationError(f"gamma must lie in [0, 1], got {gamma}")
    return min(total, int(math.floor(gamma * total + 0.5 + 1e-9)))


def is_integral_split(total: int, gamma: float) -> bool:
    x = gamma * total
    return abs(x - round(x)) < 1e-9


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    angle: float
    distance: float | None = None
    field: str = FAR

    def __post_init__(self):
        if self.field not in (FAR, NEAR):
            raise ConfigurationError(f"field must be 'far' or 'near', got {self.field!r}")
        if self.field == FAR and self.distance is not None:
            raise ConfigurationError("far-field paths carry no distance")
        if self.field == NEAR and self.distance is None:
            raise ConfigurationError("near-field paths need a distance")

    def steering(self, cfg: ArrayConfig) -> np.ndarray:
        if self.field == FAR:
            return far_steering(cfg, self.angle)
        return near_steering(cfg, self.angle, self.distance)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    h: np.ndarray
    paths: tuple[PathComponent, ...]
    gamma: float | None
    num_paths: int

    @property
    def num_far(self) -> int:
        return sum(p.field == FAR for p in self.paths)


def _check_range(rng_range, name):
    lo, hi = rng_range
    if not hi > lo:
        raise ConfigurationError(f"{name} is empty: {rng_range}")
    return float(lo), float(hi)


def sample_paths(
    num_paths: int,
    gamma: float,
    angle_range=DEFAULT_ANGLE_RANGE,
    distance_range=DEFAULT_DISTANCE_RANGE,
    rng_seed=0,
) -> list[PathComponent]:
    """Draw ``num_paths`` paths; the first ``split_count(L, gamma)`` are far-field.

    Draw order is fixed: all gains, then all angles, then the near distances.
    """
    if int(num_paths) != num_paths or num_paths < 1:
        raise ConfigurationError(f"number of paths must be a positive integer, got {num_paths}")
    a_lo, a_hi = _check_range(angle_range, "angle_range")
    r_lo, r_hi = _check_range(distance_range, "distance_range")
    if a_lo < -1 or a_hi > 1:
        raise ConfigurationError(f"angle_range must lie within [-1, 1], got {angle_range}")
    n_far = split_count(num_paths, gamma)
    n_near = num_paths - n_far
    rng = as_generator(rng_seed)

    gains = complex_gaussian(rng, num_paths)
    angles = rng.uniform(a_lo, a_hi, num_paths)
    distances = rng.uniform(r_lo, r_hi, n_near)

    paths = [PathComponent(complex(gains[i]), float(angles[i])) for i in range(n_far)]
    paths += [
        PathComponent(complex(gains[n_far + k]), float(angles[n_far + k]), float(distances[k]), NEAR)
        for k in range(n_near)
    ]
    return paths


def synthesize(cfg: ArrayConfig, paths, num_paths: int | None = None, gamma: float | None = None) -> ChannelRealization:
    """Sum the path steering vectors with the sqrt(N/L) scale."""
    paths = tuple(paths)
    if not paths:
        raise ConfigurationError("synthesize needs at least one path")
    if num_paths is None:
        num_paths = len(paths)
    if num_paths != len(paths):
        raise ConfigurationError(f"L = {num_paths} but {len(paths)} paths were given")
    for p in paths:
        if p.field == NEAR and not p.distance > 0:
            raise DomainError(f"near-field path has invalid distance {p.distance}")
    h = np.zeros(cfg.num_antennas, dtype=complex)
    for p in paths:
        h += p.gain * p.steering(cfg)
    h *= math.sqrt(cfg.num_antennas / num_paths)
    return ChannelRealization(h, paths, gamma, num_paths)


def random_channel(
    cfg: ArrayConfig,
    num_paths: int,
    gamma: float,
    angle_range=DEFAULT_ANGLE_RANGE,
    distance_range=DEFAULT_DISTANCE_RANGE,
    rng_seed=0,
) -> ChannelRealization:
    paths = sample_paths(num_paths, gamma, angle_range, distance_range, rng_seed)
    return synthesize(cfg, paths, num_paths, gamma)


def expected_power_check(
    cfg: ArrayConfig,
    num_paths: int,
    gamma: float,
    trials: int = 10_000,
    rng_seed=0,
    angle_range=DEFAULT_ANGLE_RANGE,
    distance_range=DEFAULT_DISTANCE_RANGE,
) -> float:
    """Monte Carlo mean of ||h||^2 / N; should be close to 1."""
    if trials < 1000:
        raise ConfigurationError(f"expected_power_check needs at least 1000 trials, got {trials}")
    rng = as_generator(rng_seed)
    total = 0.0
    for _ in range(trials):
        h = random_channel(cfg, num_paths, gamma, angle_range, distance_range, rng).h
        total += np.vdot(h, h).real
    return total / trials / cfg.num_antennas
