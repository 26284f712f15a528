import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridfield.array_geometry import ArrayConfig, far_steering
from hybridfield.dictionaries import (
    column_coherence_report,
    dft_dictionary,
    load_channel,
    load_dictionary,
    polar_dictionary,
    save_channel,
    save_dictionary,
)
from hybridfield.errors import ConfigurationError
from oracles import enumerate_polar_grid


def test_dft_angle_grid_n4():
    f = dft_dictionary(ArrayConfig(4))
    np.testing.assert_allclose(f.angles, [-0.75, -0.25, 0.25, 0.75])


def test_dft_n2_columns_orthogonal():
    f = dft_dictionary(ArrayConfig(2)).matrix
    assert abs(np.vdot(f[:, 0], f[:, 1])) < 1e-12


@pytest.mark.parametrize("n", [16, 64, 256, 512, 1024])
def test_dft_unitary(n):
    f = dft_dictionary(ArrayConfig(n)).matrix
    err = np.abs(f.conj().T @ f - np.eye(n)).max()
    assert err < 1e-10


def test_dft_columns_are_far_steering():
    cfg = ArrayConfig(8)
    f = dft_dictionary(cfg)
    for i, g in enumerate(f.grid):
        assert g.is_far
        np.testing.assert_array_equal(f.matrix[:, i], far_steering(cfg, g.angle))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=32, max_size=32))
def test_dft_round_trip(coefs):
    f = dft_dictionary(ArrayConfig(32)).matrix
    x = np.array(coefs)
    np.testing.assert_allclose(f.conj().T @ (f @ x), x, atol=1e-10)


@pytest.mark.parametrize(
    "n, beta, rho_min",
    [(16, 1.2, 0.08), (64, 1.2, 0.32), (64, 1.2, 1.0), (128, 1.2, 10.0), (128, 0.8, 5.0), (256, 1.2, 10.0)],
)
def test_polar_column_count_matches_enumeration(n, beta, rho_min):
    w = polar_dictionary(ArrayConfig(n), beta, rho_min)
    assert w.num_columns == enumerate_polar_grid(n, 0.01, beta, rho_min)


def test_polar_count_without_far_column():
    w = polar_dictionary(ArrayConfig(128), 1.2, 10.0, include_far_column=False)
    assert w.num_columns == enumerate_polar_grid(128, 0.01, 1.2, 10.0, far_column=False)
    assert not any(g.is_far for g in w.grid)


def test_polar_n64_at_ten_metres_has_no_finite_samples():
    # the largest first sample at N=64, beta=1.2 is 3.56 m, so rho_min=10 leaves nothing
    assert enumerate_polar_grid(64, 0.01, 1.2, 10.0) == 64
    with pytest.raises(ConfigurationError, match="rho_min"):
        polar_dictionary(ArrayConfig(64), 1.2, 10.0)


def test_polar_full_size_column_count():
    w = polar_dictionary(ArrayConfig(512), beta=2.5, rho_min=10.0)
    assert 1500 <= w.num_columns <= 2600
    assert w.num_columns == enumerate_polar_grid(512, 0.01, 2.5, 10.0) == 2068


def test_polar_columns_unit_norm(small_dicts):
    _, w = small_dicts
    norms = np.linalg.norm(w.matrix, axis=0)
    assert np.abs(norms - 1).max() < 1e-12


def test_polar_grid_structure(small_dicts):
    _, w = small_dicts
    by_angle = {}
    for g in w.grid:
        by_angle.setdefault(g.angle, []).append(g.distance)
    assert len(by_angle) == 64
    for dists in by_angle.values():
        assert sum(math.isinf(r) for r in dists) == 1
        finite = [r for r in dists if not math.isinf(r)]
        assert all(r >= 1.0 for r in finite)
        assert all(a > b for a, b in zip(finite, finite[1:]))


def test_polar_rejects_bad_parameters():
    with pytest.raises(ConfigurationError):
        polar_dictionary(ArrayConfig(64), beta=0.0, rho_min=1.0)
    with pytest.raises(ConfigurationError, match="guard"):
        polar_dictionary(ArrayConfig(64), beta=1.2, rho_min=0.1)


def test_coherence_angle_vs_polar(small_dicts):
    f, w = small_dicts
    rf = column_coherence_report(f)
    rw = column_coherence_report(w)
    assert rf["max"] < 1e-10
    assert rw["max"] > rf["max"]
    assert 0 <= rw["max"] <= 1
    assert rw["counts"].sum() == w.num_columns * (w.num_columns - 1)


def test_coherence_full_size_worse_than_dft():
    cfg = ArrayConfig(512)
    assert column_coherence_report(polar_dictionary(cfg, 2.5, 10.0))["max"] > column_coherence_report(dft_dictionary(cfg))["max"]


def test_coherence_needs_two_columns():
    from hybridfield.dictionaries import Dictionary, GridPoint

    single = Dictionary(np.ones((4, 1), dtype=complex) / 2, (GridPoint(0.0, math.inf),), "angle")
    with pytest.raises(ConfigurationError):
        column_coherence_report(single)


def test_binary_round_trip(tmp_path, small_dicts):
    for d in small_dicts:
        path = tmp_path / f"{d.kind}.bin"
        save_dictionary(d, path)
        back = load_dictionary(path)
        assert back.kind == d.kind
        assert back.matrix.tobytes() == d.matrix.tobytes()
        assert back.grid == d.grid
        save_dictionary(back, tmp_path / "again.bin")
        assert (tmp_path / "again.bin").read_bytes() == path.read_bytes()


def test_binary_layout(tmp_path):
    import struct

    f = dft_dictionary(ArrayConfig(4))
    path = tmp_path / "f.bin"
    save_dictionary(f, path)
    raw = path.read_bytes()
    assert raw[:4] == b"XLDZ"
    version, n, c, kind = struct.unpack_from("<IIIB", raw, 4)
    assert (version, n, c, kind) == (1, 4, 4, 0)
    re, im = struct.unpack_from("<dd", raw, 17 + 16 * 1)  # row 0, column 1
    assert complex(re, im) == f.matrix[0, 1]
    angle, dist = struct.unpack_from("<dd", raw, 17 + 16 * 16)
    assert angle == -0.75 and math.isinf(dist)


def test_binary_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + bytes(13))
    with pytest.raises(ConfigurationError, match="magic"):
        load_dictionary(path)


def test_channel_file_round_trip(tmp_path):
    h = np.array([1 + 2j, -0.0 + 3j, np.pi - 1e-300j])
    path = tmp_path / "h.bin"
    save_channel(h, path)
    assert load_channel(path).tobytes() == h.tobytes()
    with pytest.raises(ConfigurationError):
        load_dictionary(path)
