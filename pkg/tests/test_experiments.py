import math

import numpy as np
import pytest

from hybridfield import experiments as ex
from hybridfield.channel_model import PathComponent, synthesize
from hybridfield.errors import ConfigurationError, DomainError
from hybridfield.experiments import (
    CSV_HEADER,
    ExperimentConfig,
    SweepPoint,
    desk_profile,
    nmse,
    paper_profile,
    run_gamma_sweep,
    run_snr_sweep,
    run_trial,
)


def small(**kw):
    base = dict(num_antennas=64, num_pilots=32, num_paths=3, kappa=2, trials=6, rho_min=1.0,
                snr_grid=(0.0, 5.0, 10.0), estimators=("ff_omp", "nf_omp", "hf_omp", "mmse", "ls"))
    base.update(kw)
    return ExperimentConfig(**base)


# --- nmse -------------------------------------------------------------------------

def test_nmse_examples():
    h = np.array([1 + 1j, -2, 0.5j])
    assert nmse(h, h) == 0
    assert nmse(h, np.zeros(3)) == 1
    assert nmse(h, 2 * h) == 1
    with pytest.raises(DomainError):
        nmse(np.zeros(3), h)


# --- config ---------------------------------------------------------------------

def test_profiles():
    d, p = desk_profile(), paper_profile()
    assert (d.num_antennas, d.num_pilots, d.num_paths, d.kappa, d.trials) == (256, 128, 6, 12, 500)
    assert (p.num_antennas, p.num_pilots, p.beta) == (512, 256, 2.5)
    assert d.snr_grid == (0, 2, 4, 6, 8, 10)
    assert d.gamma_points == tuple(i / 6 for i in range(7))
    assert desk_profile(seed=5).seed == 5


@pytest.mark.parametrize(
    "bad",
    [dict(trials=0), dict(gamma=1.2), dict(snr_grid=()), dict(gamma_grid=(0.5, 2.0)), dict(estimators=("omp",)),
     dict(estimators=("ls", "ls")), dict(pilot_kind="gauss"), dict(num_pilots=300), dict(refit="x"),
     dict(kappa=50), dict(distance_range=(20, 10)), dict(pilot_kind="identity")],
)
def test_config_validation(bad):
    with pytest.raises(ConfigurationError):
        desk_profile(**bad)


def test_config_hash_tracks_content():
    assert desk_profile().config_hash() == desk_profile().config_hash()
    assert desk_profile().config_hash() != desk_profile(seed=1).config_hash()
    assert desk_profile(snr_grid=[0, 2]) == desk_profile(snr_grid=(0, 2))


# --- trials ------------------------------------------------------------------------

def test_run_trial_is_deterministic():
    cfg = small()
    pt = SweepPoint(5.0, 0.5, 5.0)
    a, b = run_trial(cfg, pt, 3), run_trial(cfg, pt, 3)
    assert a.nmse == b.nmse
    assert a.nmse != run_trial(cfg, pt, 4).nmse
    assert set(a.nmse) == set(cfg.estimators)
    assert all(v >= 0 for v in a.nmse.values())


def test_estimators_share_one_measurement(monkeypatch):
    seen = []
    real = ex.ff_omp_estimate, ex.nf_omp_estimate

    def spy(idx):
        def wrapped(y, pilots, *args, **kw):
            seen.append((y.copy(), pilots.copy()))
            return real[idx](y, pilots, *args, **kw)
        return wrapped

    monkeypatch.setattr(ex, "ff_omp_estimate", spy(0))
    monkeypatch.setattr(ex, "nf_omp_estimate", spy(1))
    run_trial(small(estimators=("ff_omp", "nf_omp")), SweepPoint(5.0, 0.5, 5.0), 0)
    (y1, p1), (y2, p2) = seen
    assert y1.tobytes() == y2.tobytes() and p1.tobytes() == p2.tobytes()


def test_noiseless_on_grid_trial_is_exact(monkeypatch):
    cfg = small(pilot_kind="identity", num_pilots=64, estimators=("ff_omp", "nf_omp", "hf_omp"), num_paths=1, kappa=1)
    f, w = ex.dictionaries_for(cfg)
    theta = f.grid[11].angle

    def on_grid(array, num_paths, gamma, *args):
        return synthesize(array, [PathComponent(0.3 - 1.1j, theta)], 1, gamma)

    monkeypatch.setattr(ex, "random_channel", on_grid)
    for gamma in (0.0, 1.0):
        rec = run_trial(cfg, SweepPoint(math.inf, gamma, math.inf), 0)
        assert not rec.errors
        assert all(v < 1e-18 for v in rec.nmse.values()), rec.nmse


def test_estimator_failure_is_recorded(monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(ex, "ls_estimate", boom)
    rec = run_trial(small(), SweepPoint(5.0, 0.5, 5.0), 0)
    assert math.isnan(rec.nmse["ls"]) and "synthetic" in rec.errors["ls"]
    assert not math.isnan(rec.nmse["hf_omp"])


# --- sweeps ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def snr_result():
    return run_snr_sweep(small())


def test_snr_sweep_shape_and_rows(snr_result):
    cfg = small()
    assert len(snr_result.rows) == 3 * 5
    for r in snr_result.rows:
        assert r.trials == cfg.trials
        assert r.nmse_linear >= 0
        assert r.nmse_db == 10 * math.log10(r.nmse_linear)
        assert r.stderr_db > 0
    lines = snr_result.to_csv().splitlines()
    assert lines[0] == CSV_HEADER and len(lines) == 16


def test_snr_sweep_metadata(snr_result):
    meta = snr_result.metadata
    assert meta["achieved_S"] == ex.dictionaries_for(small())[1].num_columns
    assert meta["config_hash"] == small().config_hash()
    assert meta["base_seed"] == 0
    assert "K_f=3 K_n=3" in meta["point.0"]


def test_stderr_matches_delta_method(snr_result):
    vals = snr_result.per_trial[1, "hf_omp"]
    row = snr_result.row(5.0, "hf_omp")
    expected = 10 / math.log(10) * np.std(vals, ddof=1) / math.sqrt(len(vals)) / np.mean(vals)
    assert row.stderr_db == pytest.approx(expected, rel=1e-12)


def test_single_trial_sweep():
    res = run_snr_sweep(small(trials=1, estimators=("hf_omp", "ls")))
    assert len(res.rows) == 6
    assert all(r.trials == 1 and math.isnan(r.stderr_db) for r in res.rows)


def test_gamma_sweep_endpoints_and_shape():
    cfg = small(gamma_grid=(0.0, 0.5, 1.0), estimators=("ff_omp", "nf_omp", "hf_omp"))
    res = run_gamma_sweep(cfg)
    assert len(res.rows) == 9
    np.testing.assert_array_equal(res.per_trial[0, "hf_omp"], res.per_trial[0, "nf_omp"])
    np.testing.assert_array_equal(res.per_trial[2, "hf_omp"], res.per_trial[2, "ff_omp"])
    assert res.row(0.0, "hf_omp").nmse_linear == res.row(0.0, "nf_omp").nmse_linear
    assert res.row(1.0, "hf_omp").nmse_linear == res.row(1.0, "ff_omp").nmse_linear


def test_gamma_sweep_two_estimators_three_points():
    res = run_gamma_sweep(small(gamma_grid=(0.0, 0.5, 1.0), estimators=("hf_omp", "mmse"), trials=2))
    assert len(res.rows) == 6


def test_gamma_rounding_is_logged(caplog):
    with caplog.at_level("WARNING"):
        run_gamma_sweep(small(gamma_grid=(0.0, 0.5), num_paths=3, trials=1, estimators=("ls",)))
    assert "gamma=0.5" in caplog.text and "2 far / 1 near" in caplog.text


def test_serial_equals_parallel():
    cfg = small(trials=5)
    a = run_snr_sweep(cfg, workers=1)
    b = run_snr_sweep(cfg, workers=3)
    assert a.to_csv() == b.to_csv()
    assert a.metadata == b.metadata


def test_trial_log_lines():
    res = run_snr_sweep(small(trials=2, estimators=("hf_omp",)), keep_reports=True)
    assert len(res.trial_log) == 2 * 3
    assert all(line.startswith("snr_db=") and "estimator=hf_omp" in line for line in res.trial_log)


def test_common_random_numbers_across_snr(snr_result):
    # same pilots and noise shape at every SNR, so only the noise scale differs between points
    ls0, ls10 = snr_result.per_trial[0, "ls"], snr_result.per_trial[2, "ls"]
    assert np.all(ls10 < ls0)


@pytest.mark.slow
def test_statistical_stability():
    cfg = small(trials=60, estimators=("hf_omp", "ff_omp"), snr_grid=(5.0,))
    half = run_snr_sweep(cfg)
    full = run_snr_sweep(small(trials=120, estimators=("hf_omp", "ff_omp"), snr_grid=(5.0,)))
    for name in ("hf_omp", "ff_omp"):
        a, b = half.row(5.0, name), full.row(5.0, name)
        assert abs(a.nmse_db - b.nmse_db) < 3 * a.stderr_db
