"""Angle-domain (DFT) and polar-domain transform matrices.

The polar grid keeps the DFT angles ``theta_n = (2n - N - 1)/N`` and samples
distance on an inverse-distance ladder per angle::

    r_n^(s) = (N^2 d^2 (1 - theta_n^2)) / (2 lambda beta^2) / s,   s = 1, 2, ...

keeping samples with ``r >= rho_min``. Each angle optionally also gets one
far-field column (distance ``inf``, realised as ``far_steering``). ``beta``
controls column coherence along the distance axis; smaller beta gives a
denser grid.

Binary file layout (little-endian)::

    b"XLDZ" | version u32 | N u32 | C u32 | kind u8
    N*C complex entries, row-major, as interleaved float64 (re, im)
    C grid records of (float64 angle, float64 distance)   # kinds 0 and 1 only

Channel files (kind 2) store a single column and no grid records.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
import struct

import numpy as np

from .array_geometry import ArrayConfig, far_steering, near_steering
from .errors import ConfigurationError

ANGLE = "angle"
POLAR = "polar"
CHANNEL = "channel"
_KIND_CODES = {ANGLE: 0, POLAR: 1, CHANNEL: 2}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}

MAGIC = b"XLDZ"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIB")


@dataclass(frozen=True)
class GridPoint:
    angle: float
    distance: float  # math.inf marks a far-field column

    @property
    def is_far(self) -> bool:
        return math.isinf(self.distance)


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Columns are steering vectors; ``grid[i]`` describes column ``i``."""

    matrix: np.ndarray
    grid: tuple[GridPoint, ...]
    kind: str

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ConfigurationError("dictionary matrix must be 2-D")
        if len(self.grid) != self.matrix.shape[1]:
            raise ConfigurationError(
                f"grid has {len(self.grid)} entries for {self.matrix.shape[1]} columns"
            )
        if self.kind not in _KIND_CODES:
            raise ConfigurationError(f"unknown dictionary kind {self.kind!r}")
        self.matrix.setflags(write=False)

    @property
    def num_columns(self) -> int:
        return self.matrix.shape[1]

    @property
    def angles(self) -> np.ndarray:
        return np.array([g.angle for g in self.grid])

    @property
    def distances(self) -> np.ndarray:
        return np.array([g.distance for g in self.grid])


def dft_angles(num_antennas: int) -> np.ndarray:
    """theta_n = (2n - N - 1)/N for n = 1..N."""
    n = np.arange(1, num_antennas + 1)
    return (2 * n - num_antennas - 1) / num_antennas


def dft_dictionary(cfg: ArrayConfig) -> Dictionary:
    """N x N angle-domain matrix F, unitary when d = lambda/2."""
    angles = dft_angles(cfg.num_antennas)
    matrix = np.column_stack([far_steering(cfg, t) for t in angles])
    grid = tuple(GridPoint(float(t), math.inf) for t in angles)
    return Dictionary(matrix, grid, ANGLE)


def polar_distances(cfg: ArrayConfig, theta: float, beta: float, rho_min: float) -> list[float]:
    """Finite distance samples at one angle, largest first."""
    n, d, lam = cfg.num_antennas, cfg.antenna_spacing, cfg.wavelength
    base = n * n * d * d * (1 - theta * theta) / (2 * lam * beta * beta)
    out = []
    s = 1
    while base / s >= rho_min:
        out.append(base / s)
        s += 1
    return out


def polar_dictionary(
    cfg: ArrayConfig,
    beta: float = 1.2,
    rho_min: float = 10.0,
    include_far_column: bool = True,
) -> Dictionary:
    """Polar-domain matrix W over the (angle, distance) grid described above."""
    if not beta > 0:
        raise ConfigurationError(f"beta must be positive, got {beta}")
    if rho_min < cfg.guard_radius:
        raise ConfigurationError(
            f"rho_min = {rho_min} m is below the guard radius d*N = {cfg.guard_radius} m"
        )
    columns = []
    grid = []
    finite = 0
    for theta in dft_angles(cfg.num_antennas):
        theta = float(theta)
        if include_far_column:
            columns.append(far_steering(cfg, theta))
            grid.append(GridPoint(theta, math.inf))
        for r in polar_distances(cfg, theta, beta, rho_min):
            columns.append(near_steering(cfg, theta, r))
            grid.append(GridPoint(theta, r))
            finite += 1
    if finite == 0:
        largest = cfg.num_antennas**2 * cfg.antenna_spacing**2 / (2 * cfg.wavelength * beta**2)
        raise ConfigurationError(
            f"rho_min = {rho_min} m exceeds every first distance sample "
            f"(largest is {largest:.6g} m); no finite-distance columns"
        )
    return Dictionary(np.column_stack(columns), tuple(grid), POLAR)


def column_coherence_report(dictionary: Dictionary, bins: int = 20) -> dict:
    """Max and histogram of |<col_i, col_j>| over i != j."""
    c = dictionary.num_columns
    if c < 2:
        raise ConfigurationError("coherence needs at least two columns")
    gram = np.abs(dictionary.matrix.conj().T @ dictionary.matrix)
    off = gram[~np.eye(c, dtype=bool)]
    off = np.minimum(off, 1.0)
    counts, edges = np.histogram(off, bins=bins, range=(0.0, 1.0))
    return {
        "max": float(off.max()),
        "mean": float(off.mean()),
        "counts": counts,
        "edges": edges,
    }


def _write(path, kind: str, matrix: np.ndarray, grid) -> None:
    n, c = matrix.shape
    data = np.ascontiguousarray(matrix, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, n, c, _KIND_CODES[kind]))
        fh.write(data.tobytes(order="C"))
        if grid is not None:
            records = np.array([(g.angle, g.distance) for g in grid], dtype="<f8")
            fh.write(records.tobytes(order="C"))


def _read(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    magic, version, n, c, code = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ConfigurationError(f"{path}: unsupported version {version}")
    if code not in _CODE_KINDS:
        raise ConfigurationError(f"{path}: unknown kind code {code}")
    kind = _CODE_KINDS[code]
    offset = _HEADER.size
    body = n * c * 16
    expected = offset + body + (0 if kind == CHANNEL else c * 16)
    if len(raw) != expected:
        raise ConfigurationError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", count=n * c * 2, offset=offset).reshape(n, c, 2)
    matrix = data.view("<c16")[..., 0].astype(complex)
    grid = None
    if kind != CHANNEL:
        rec = np.frombuffer(raw, dtype="<f8", count=2 * c, offset=offset + body).reshape(c, 2)
        grid = tuple(GridPoint(float(a), float(r)) for a, r in rec)
    return kind, matrix, grid


def save_dictionary(dictionary: Dictionary, path) -> None:
    _write(path, dictionary.kind, dictionary.matrix, dictionary.grid)


def load_dictionary(path) -> Dictionary:
    kind, matrix, grid = _read(path)
    if kind == CHANNEL:
        raise ConfigurationError(f"{path}: holds a channel, not a dictionary")
    return Dictionary(matrix, grid, kind)


def save_channel(h: np.ndarray, path) -> None:
    _write(path, CHANNEL, np.asarray(h, dtype=complex).reshape(-1, 1), None)


def load_channel(path) -> np.ndarray:
    kind, matrix, _ = _read(path)
    if kind != CHANNEL:
        raise ConfigurationError(f"{path}: holds a {kind} dictionary, not a channel")
    return matrix[:, 0]
