"""Command-line driver.

    hybridfield sweep-snr   [--config F] --out sweep.csv [overrides]
    hybridfield sweep-gamma [--config F] --out sweep.csv [overrides]
    hybridfield export-dict --kind {angle,polar} [--config F] --out dict.bin
    hybridfield plotdata sweep.csv --out DIR

Config files are flat ``key = value`` text with dotted keys, ``#`` comments.
Defaults come from the chosen profile (``profile = desk|paper``), then the
file, then command-line flags. Exit codes: 0 ok, 2 configuration or I/O
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .dictionaries import dft_dictionary, polar_dictionary, save_dictionary
from .errors import ConfigurationError, NumericalError
from .experiments import CSV_HEADER, PROFILES, ExperimentConfig, run_gamma_sweep, run_snr_sweep

log = logging.getLogger("hybridfield")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# dotted config key -> ExperimentConfig field
CONFIG_KEYS = {
    "array.num_antennas": "num_antennas",
    "array.wavelength": "wavelength",
    "array.antenna_spacing": "antenna_spacing",
    "channel.num_paths": "num_paths",
    "channel.gamma": "gamma",
    "channel.angle_range": "angle_range",
    "channel.distance_range": "distance_range",
    "dictionary.beta": "beta",
    "dictionary.rho_min": "rho_min",
    "dictionary.include_far_column": "include_far_column",
    "measurement.num_pilots": "num_pilots",
    "measurement.pilot_kind": "pilot_kind",
    "measurement.snr_db": "snr_db",
    "sweep.snr_grid": "snr_grid",
    "sweep.gamma_grid": "gamma_grid",
    "sweep.trials": "trials",
    "sweep.seed": "seed",
    "estimator.list": "estimators",
    "estimator.kappa": "kappa",
    "estimator.refit": "refit",
    "estimator.final_refit": "final_refit",
    "estimator.mmse_pilots": "mmse_pilots",
    "estimator.mmse_train_factor": "mmse_train_factor",
}
FIELD_KEYS = {v: k for k, v in CONFIG_KEYS.items()}

_FLOAT_TUPLES = {"snr_grid", "gamma_grid", "angle_range", "distance_range"}
_INTS = {"num_antennas", "num_paths", "num_pilots", "kappa", "trials", "seed", "mmse_train_factor"}
_FLOATS = {"wavelength", "antenna_spacing", "gamma", "snr_db", "beta", "rho_min"}
_BOOLS = {"include_far_column", "final_refit"}


def _parse_value(name: str, text: str):
    text = text.strip()
    if name in ("antenna_spacing", "gamma_grid") and text.lower() in ("", "none", "auto"):
        return None
    try:
        if name in _FLOAT_TUPLES:
            return tuple(float(eval_fraction(t)) for t in text.split(",") if t.strip())
        if name == "estimators":
            return tuple(t.strip() for t in text.split(",") if t.strip())
        if name in _INTS:
            return int(text)
        if name in _FLOATS:
            return float(eval_fraction(text))
        if name in _BOOLS:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
    except ValueError:
        raise ConfigurationError(f"cannot parse value {text!r} for {FIELD_KEYS.get(name, name)}") from None
    return text


def eval_fraction(text: str) -> float:
    """'1/6' -> 0.1666..., '0.25' -> 0.25."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def read_config_file(path) -> tuple[str | None, dict]:
    """Return (profile or None, {field: value}) from a key = value file."""
    if not os.path.isfile(path):
        raise ConfigurationError(f"config file not found: {path}")
    profile, values = None, {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "profile":
                profile = value
                continue
            if key not in CONFIG_KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
            values[CONFIG_KEYS[key]] = _parse_value(CONFIG_KEYS[key], value)
    return profile, values


def format_config(config: ExperimentConfig, profile: str) -> str:
    """Effective configuration in config-file syntax (feed it back with --config)."""
    lines = [f"profile = {profile}"]
    for key, name in CONFIG_KEYS.items():
        value = getattr(config, name)
        if value is None:
            text = "none"
        elif isinstance(value, tuple):
            text = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value).lower() if isinstance(value, bool) else str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines)


def build_config(args) -> tuple[ExperimentConfig, str]:
    file_profile, values = (None, {})
    if args.config:
        file_profile, values = read_config_file(args.config)
    profile = args.profile or file_profile or "desk"
    if profile not in PROFILES:
        raise ConfigurationError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    overrides = {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "kappa": getattr(args, "kappa", None),
        "gamma_grid": _cli_list(getattr(args, "gamma_grid", None), "gamma_grid"),
        "snr_grid": _cli_list(getattr(args, "snr_grid", None), "snr_grid"),
        "estimators": _cli_list(getattr(args, "estimators", None), "estimators"),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = PROFILES[profile](**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    return config, profile


def _cli_list(text, name):
    return None if text is None else _parse_value(name, text)


def _add_common(p, sweep=True):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--profile", choices=sorted(PROFILES), help="default set (desk: N=256, paper: N=512)")
    if sweep:
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--kappa", type=int)
        p.add_argument("--snr-grid", help="comma-separated dB values")
        p.add_argument("--gamma-grid", help="comma-separated values in [0, 1]; fractions like 1/6 allowed")
        p.add_argument("--estimators", help="comma-separated subset of ff_omp,nf_omp,hf_omp,mmse,ls")
        p.add_argument("--workers", type=int, default=1, help="worker processes (1 = serial)")
        p.add_argument("--trial-log", help="also write per-trial estimator records here")


def _parser():
    parser = argparse.ArgumentParser(prog="hybridfield", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("sweep-snr", help="NMSE against SNR at fixed gamma"))
    _add_common(sub.add_parser("sweep-gamma", help="NMSE against gamma at fixed SNR"))
    p = sub.add_parser("export-dict", help="write the angle or polar dictionary as a binary file")
    _add_common(p, sweep=False)
    p.add_argument("--kind", choices=("angle", "polar"), required=True)
    p = sub.add_parser("plotdata", help="split a sweep CSV into per-estimator (x, nmse_db) series")
    p.add_argument("csv_path")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _check_writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise ConfigurationError(f"cannot write to {path}")


def cmd_sweep(args, kind: str) -> int:
    config, profile = build_config(args)
    _check_writable(args.out)
    log.info("effective configuration (base seed %d):\n%s", config.seed, format_config(config, profile))
    run = run_snr_sweep if kind == "snr" else run_gamma_sweep
    result = run(config, workers=args.workers, keep_reports=bool(args.trial_log))
    result.metadata["profile"] = profile
    result.write_csv(args.out)
    result.write_metadata(args.out + ".meta")
    if args.trial_log:
        with open(args.trial_log, "w") as fh:
            fh.writelines(line + "\n" for line in result.trial_log)
    for line in result.errors:
        print(f"warning: {line}", file=sys.stderr)
    if result.errors:
        print(f"warning: {len(result.errors)} estimates failed", file=sys.stderr)
    print(f"wrote {len(result.rows)} rows to {args.out} (S = {result.metadata['achieved_S']})")
    return EXIT_OK


def cmd_export_dict(args) -> int:
    args.seed = args.trials = args.kappa = args.gamma_grid = args.snr_grid = args.estimators = None
    config, _ = build_config(args)
    _check_writable(args.out)
    if args.kind == "angle":
        d = dft_dictionary(config.array)
    else:
        d = polar_dictionary(config.array, config.beta, config.rho_min, config.include_far_column)
    try:
        save_dictionary(d, args.out)
    except OSError as exc:
        raise ConfigurationError(f"cannot write {args.out}: {exc}") from None
    if args.kind == "polar":
        print(f"S = {d.num_columns}")
    else:
        print(f"columns = {d.num_columns}")
    return EXIT_OK


def cmd_plotdata(args) -> int:
    if not os.path.isfile(args.csv_path):
        raise ConfigurationError(f"sweep CSV not found: {args.csv_path}")
    series: dict[str, list[tuple[float, float]]] = {}
    with open(args.csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ConfigurationError(f"{args.csv_path}:1: expected header {CSV_HEADER!r}")
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            if len(row) != 6:
                raise ConfigurationError(f"{args.csv_path}:{lineno}: expected 6 fields, got {len(row)}")
            try:
                x, db = float(row[0]), float(row[3])
            except ValueError:
                raise ConfigurationError(f"{args.csv_path}:{lineno}: non-numeric field") from None
            series.setdefault(row[1], []).append((x, db))
    if not series:
        raise ConfigurationError(f"{args.csv_path}: no data rows")
    os.makedirs(args.out, exist_ok=True)
    for name in sorted(series):
        path = os.path.join(args.out, f"{name}.dat")
        with open(path, "w", newline="\n") as fh:
            for x, db in sorted(series[name]):
                fh.write(f"{x!r} {db!r}\n")
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = _parser().parse_args(argv)
    try:
        if args.command == "sweep-snr":
            return cmd_sweep(args, "snr")
        if args.command == "sweep-gamma":
            return cmd_sweep(args, "gamma")
        if args.command == "export-dict":
            return cmd_export_dict(args)
        return cmd_plotdata(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
