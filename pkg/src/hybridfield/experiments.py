"""NMSE Monte Carlo sweeps over SNR and over the far-field ratio gamma.

Trial ``t`` draws its channel, pilot matrix and noise from streams addressed
by ``(seed, TRIAL, t, ...)`` only. The same trial index therefore sees the
same pilots and the same noise shape at every SNR point (noise is scaled by
sqrt(sigma2)), and the same gains, angles and distances at every gamma
point. Those common random numbers make curve-to-curve comparisons far less
noisy than independent draws would.

Within a trial every sparse estimator reads one shared measurement. The
MMSE benchmark follows its own protocol by default: identity pilots (M = N)
with an independent noise draw at the same sigma2, and a sample covariance
built from ``mmse_train_factor * N`` channels on a training stream that the
evaluation trials never touch.

Trials are grouped trial-major (one task = one trial over all sweep points)
and reduced in trial order, so ``workers=1`` and ``workers>1`` give
identical results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
import functools
import hashlib
import json
import logging
import math
import multiprocessing

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from . import rng as streams
from .array_geometry import ArrayConfig
from .channel_model import is_integral_split, random_channel, split_count
from .dictionaries import dft_dictionary, polar_dictionary
from .errors import ConfigurationError, DomainError
from .estimators import (
    REFIT_MODES,
    ff_omp_estimate,
    hf_omp_estimate,
    ls_estimate,
    mmse_filter,
    nf_omp_estimate,
    sparsity_split,
    training_covariance,
)
from .measurement import identity_pilots, observe, random_pilots, snr_to_sigma2

log = logging.getLogger(__name__)

ESTIMATORS = ("ff_omp", "nf_omp", "hf_omp", "mmse", "ls")
CSV_HEADER = "sweep_value,estimator,nmse_linear,nmse_db,trials,stderr_db"


def nmse(h_true, h_hat) -> float:
    """||h - h_hat||^2 / ||h||^2."""
    h_true = np.asarray(h_true)
    power = float(np.vdot(h_true, h_true).real)
    if power == 0:
        raise DomainError("NMSE is undefined for an all-zero true channel")
    err = h_true - np.asarray(h_hat)
    return float(np.vdot(err, err).real) / power


@dataclass(frozen=True)
class ExperimentConfig:
    num_antennas: int = 256
    wavelength: float = 0.01
    antenna_spacing: float | None = None
    num_paths: int = 6
    gamma: float = 0.5
    snr_db: float = 5.0
    snr_grid: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    gamma_grid: tuple[float, ...] | None = None  # None: multiples of 1/L
    num_pilots: int = 128
    pilot_kind: str = "random"
    estimators: tuple[str, ...] = ("ff_omp", "nf_omp", "hf_omp", "mmse")
    kappa: int = 12
    trials: int = 500
    seed: int = 0
    beta: float = 1.2
    rho_min: float = 10.0
    include_far_column: bool = True
    angle_range: tuple[float, float] = (-1.0, 1.0)
    distance_range: tuple[float, float] = (10.0, 80.0)
    refit: str = "compensated"
    final_refit: bool = True
    mmse_pilots: str = "identity"
    mmse_train_factor: int = 10

    def __post_init__(self):
        # normalise list-ish fields so configs stay hashable
        for name in ("snr_grid", "estimators", "angle_range", "distance_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.gamma_grid is not None:
            object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        self.validate()

    def validate(self):
        self.array  # ArrayConfig checks N, wavelength, spacing
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.num_paths < 1:
            raise ConfigurationError(f"num_paths must be >= 1, got {self.num_paths}")
        if self.kappa < 1:
            raise ConfigurationError(f"kappa must be >= 1, got {self.kappa}")
        if not 0 <= self.gamma <= 1:
            raise ConfigurationError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.snr_grid:
            raise ConfigurationError("snr_grid is empty")
        if self.gamma_grid is not None:
            if not self.gamma_grid:
                raise ConfigurationError("gamma_grid is empty")
            bad = [g for g in self.gamma_grid if not 0 <= g <= 1]
            if bad:
                raise ConfigurationError(f"gamma_grid values outside [0, 1]: {bad}")
        if not self.estimators:
            raise ConfigurationError("estimator list is empty")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ConfigurationError(f"unknown estimators {unknown}; choose from {ESTIMATORS}")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigurationError("estimator list has duplicates")
        if self.pilot_kind not in ("random", "identity"):
            raise ConfigurationError(f"pilot_kind must be 'random' or 'identity', got {self.pilot_kind!r}")
        if self.mmse_pilots not in ("identity", "shared"):
            raise ConfigurationError(f"mmse_pilots must be 'identity' or 'shared', got {self.mmse_pilots!r}")
        if self.pilot_kind == "identity" and self.num_pilots != self.num_antennas:
            raise ConfigurationError("identity pilots need num_pilots == num_antennas")
        if not 1 <= self.num_pilots <= self.num_antennas:
            raise ConfigurationError(f"num_pilots must lie in [1, N], got {self.num_pilots}")
        if self.refit not in REFIT_MODES:
            raise ConfigurationError(f"refit must be one of {REFIT_MODES}, got {self.refit!r}")
        if self.mmse_train_factor < 1:
            raise ConfigurationError("mmse_train_factor must be >= 1")
        if self.kappa * self.num_paths > self.num_antennas:
            raise ConfigurationError(
                f"sparsity kappa*L = {self.kappa * self.num_paths} exceeds N = {self.num_antennas}"
            )
        for name in ("angle_range", "distance_range"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise ConfigurationError(f"{name} is empty: {(lo, hi)}")

    @property
    def array(self) -> ArrayConfig:
        return ArrayConfig(self.num_antennas, self.wavelength, self.antenna_spacing)

    @property
    def gamma_points(self) -> tuple[float, ...]:
        if self.gamma_grid is not None:
            return self.gamma_grid
        return tuple(i / self.num_paths for i in range(self.num_paths + 1))

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def desk_profile(**overrides) -> ExperimentConfig:
    """N=256, M=128: the scale the acceptance suite runs at."""
    return replace(ExperimentConfig(), **overrides)


def paper_profile(**overrides) -> ExperimentConfig:
    """N=512, M=256; beta=2.5 gives S=2068 polar columns."""
    base = ExperimentConfig(num_antennas=512, num_pilots=256, beta=2.5)
    return replace(base, **overrides)


PROFILES = {"desk": desk_profile, "paper": paper_profile}


# -- shared, read-only per-process state -------------------------------------

@functools.lru_cache(maxsize=4)
def dictionaries_for(config: ExperimentConfig):
    cfg = config.array
    return dft_dictionary(cfg), polar_dictionary(cfg, config.beta, config.rho_min, config.include_far_column)


@functools.lru_cache(maxsize=32)
def covariance_for(config: ExperimentConfig, gamma: float) -> np.ndarray:
    key = int(round(gamma * 2**32))
    with threadpool_limits(1):
        return training_covariance(
            config.array, config.num_paths, gamma, config.mmse_train_factor * config.num_antennas,
            streams.stream(config.seed, streams.TRAINING, key),
            config.angle_range, config.distance_range,
        )


@functools.lru_cache(maxsize=64)
def _identity_mmse_filter(config: ExperimentConfig, gamma: float, sigma2: float) -> np.ndarray:
    return mmse_filter(identity_pilots(config.num_antennas), covariance_for(config, gamma), sigma2)


# -- trials -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    value: float  # the swept variable
    gamma: float
    snr_db: float


@dataclass
class TrialRecord:
    trial: int
    point: SweepPoint
    nmse: dict
    errors: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)


def _trial_pilots(config, trial):
    if config.pilot_kind == "identity":
        return identity_pilots(config.num_antennas)
    return random_pilots(config.num_pilots, config.num_antennas, streams.stream(config.seed, streams.TRIAL, trial, streams.PILOTS))


def _run_trial_points(config: ExperimentConfig, points, trial: int, keep_reports: bool = False):
    """One trial index evaluated at every sweep point; shares sensing matrices across points."""
    f_dict, w_dict = dictionaries_for(config)
    f, w = f_dict.matrix, w_dict.matrix
    pilots = _trial_pilots(config, trial)
    sparse_names = [e for e in config.estimators if e.endswith("omp")]
    a_f = pilots @ f if {"ff_omp", "hf_omp"} & set(sparse_names) else None
    a_n = pilots @ w if {"nf_omp", "hf_omp"} & set(sparse_names) else None
    k_total = config.kappa * config.num_paths

    channels = {}
    out = []
    for point in points:
        if point.gamma not in channels:
            channels[point.gamma] = random_channel(
                config.array, config.num_paths, point.gamma, config.angle_range, config.distance_range,
                streams.stream(config.seed, streams.TRIAL, trial, streams.PATHS),
            )
        channel = channels[point.gamma]
        sigma2 = snr_to_sigma2(point.snr_db)
        rec = observe(pilots, channel, sigma2, streams.stream(config.seed, streams.TRIAL, trial, streams.NOISE))
        record = TrialRecord(trial, point, {})
        for name in config.estimators:
            try:
                report = None
                if name == "ff_omp":
                    report = ff_omp_estimate(rec.y, pilots, f, k_total, sensing=a_f)
                    h_hat = report.h_hat
                elif name == "nf_omp":
                    report = nf_omp_estimate(rec.y, pilots, w, k_total, sensing=a_n)
                    h_hat = report.h_hat
                elif name == "hf_omp":
                    report = hf_omp_estimate(
                        rec.y, pilots, f, w, config.num_paths, point.gamma, config.kappa,
                        sensing=(a_f, a_n), refit=config.refit, final_refit=config.final_refit,
                    )
                    h_hat = report.h_hat
                elif name == "ls":
                    h_hat = ls_estimate(rec.y, pilots)
                else:  # mmse
                    if config.mmse_pilots == "identity":
                        bench = observe(
                            identity_pilots(config.num_antennas), channel, sigma2,
                            streams.stream(config.seed, streams.TRIAL, trial, streams.BENCH_NOISE),
                        )
                        h_hat = _identity_mmse_filter(config, point.gamma, sigma2) @ bench.y
                    else:
                        h_hat = mmse_filter(pilots, covariance_for(config, point.gamma), sigma2) @ rec.y
                record.nmse[name] = nmse(channel.h, h_hat)
                if keep_reports and report is not None:
                    record.reports.append(report.to_record(record.nmse[name]))
            except Exception as exc:  # recorded per row; the trial goes on
                record.nmse[name] = math.nan
                record.errors[name] = f"{type(exc).__name__}: {exc}"
        out.append(record)
    return out


def run_trial(config: ExperimentConfig, point: SweepPoint, trial: int) -> TrialRecord:
    """Every configured estimator on one trial at one sweep point."""
    with threadpool_limits(1):
        return _run_trial_points(config, [point], trial)[0]


# -- sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    sweep_value: float
    estimator: str
    nmse_linear: float
    nmse_db: float
    trials: int
    stderr_db: float


@dataclass
class SweepResult:
    kind: str
    rows: list
    metadata: dict
    per_trial: dict  # (point index, estimator) -> array of trial NMSE, nan on failure
    points: tuple
    errors: list = field(default_factory=list)
    trial_log: list = field(default_factory=list)

    def row(self, sweep_value: float, estimator: str) -> SweepRow:
        for r in self.rows:
            if r.estimator == estimator and r.sweep_value == sweep_value:
                return r
        raise KeyError((sweep_value, estimator))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.sweep_value!r},{r.estimator},{r.nmse_linear!r},{r.nmse_db!r},{r.trials},{r.stderr_db!r}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())

    def write_metadata(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            for key, value in self.metadata.items():
                fh.write(f"{key}={value}\n")


def _init_worker():
    threadpool_limits(1)


def _task(args):
    config, points, trial, keep = args
    return _run_trial_points(config, points, trial, keep)


def _execute(config, points, workers, keep_reports):
    tasks = [(config, points, t, keep_reports) for t in range(config.trials)]
    if workers and workers > 1:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx, initializer=_init_worker) as pool:
            return list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    with threadpool_limits(1):
        return [_task(t) for t in tasks]


def _aggregate(config, kind, points, results) -> SweepResult:
    rows, per_trial, errors, trial_log = [], {}, [], []
    for i, point in enumerate(points):
        for name in config.estimators:
            vals = np.array([results[t][i].nmse[name] for t in range(config.trials)])
            per_trial[i, name] = vals
            ok = vals[~np.isnan(vals)]
            n = ok.size
            if n:
                mean = float(np.mean(ok))
                db = 10 * math.log10(mean) if mean > 0 else -math.inf
                se = 10 / math.log(10) * float(np.std(ok, ddof=1)) / math.sqrt(n) / mean if n > 1 and mean > 0 else math.nan
            else:
                mean = db = se = math.nan
            rows.append(SweepRow(point.value, name, mean, db, int(n), se))
        for t in range(config.trials):
            rec = results[t][i]
            for name, msg in rec.errors.items():
                errors.append(f"{kind}={point.value!r} trial={t} estimator={name} {msg}")
            for line in rec.reports:
                trial_log.append(f"{kind}={point.value!r} trial={t} {line}")

    f_dict, w_dict = dictionaries_for(config)
    meta = {
        "library_version": __version__,
        "sweep": kind,
        "config_hash": config.config_hash(),
        "base_seed": config.seed,
        "trials_per_point": config.trials,
        "achieved_S": w_dict.num_columns,
        "angle_columns": f_dict.num_columns,
        "failed_estimates": len(errors),
        "rng": "PCG64/SeedSequence spawn_key=(TRIAL, trial, sub); Box-Muller complex normals",
        "gamma_rounding": "round half toward far",
        "stderr": "delta-method standard error of the mean NMSE, in dB",
    }
    for i, point in enumerate(points):
        k_f, k_n = sparsity_split(config.num_paths, point.gamma, config.kappa)
        meta[f"point.{i}"] = (
            f"value={point.value!r} gamma={point.gamma!r} snr_db={point.snr_db!r} K_f={k_f} K_n={k_n} "
            f"integral_path_split={int(is_integral_split(config.num_paths, point.gamma))}"
        )
    for key, value in config.to_dict().items():
        meta[f"config.{key}"] = value
    return SweepResult(kind, rows, meta, per_trial, tuple(points), errors, trial_log)


def run_snr_sweep(config: ExperimentConfig, workers: int = 1, keep_reports: bool = False) -> SweepResult:
    points = tuple(SweepPoint(float(s), config.gamma, float(s)) for s in config.snr_grid)
    return _aggregate(config, "snr_db", points, _execute(config, points, workers, keep_reports))


def run_gamma_sweep(config: ExperimentConfig, workers: int = 1, keep_reports: bool = False) -> SweepResult:
    points = tuple(SweepPoint(float(g), float(g), config.snr_db) for g in config.gamma_points)
    for p in points:
        if not is_integral_split(config.num_paths, p.gamma):
            n_far = split_count(config.num_paths, p.gamma)
            log.warning(
                "gamma=%g gives gamma*L=%g; using %d far / %d near paths (halves round toward far)",
                p.gamma, p.gamma * config.num_paths, n_far, config.num_paths - n_far,
            )
    return _aggregate(config, "gamma", points, _execute(config, points, workers, keep_reports))


def config_fields() -> dict:
    return {f.name: f for f in fields(ExperimentConfig)}
