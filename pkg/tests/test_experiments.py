"""Random ensembles, the noise-ratio sweep, and CSV plumbing."""

import json
import math
import os
import time

import numpy as np
import pytest

from sensor_select import (
    ExperimentConfig,
    ModelFormatError,
    SweepRecord,
    SystemModel,
    build_stacked,
    compute_bounds,
    random_stable_system,
    read_sweep_csv,
    run_sweep,
    write_sweep_csv,
)
from sensor_select.experiments import (
    CSV_HEADER,
    RECIPE_NAME,
    isotropic_spectra,
    load_config,
    write_sweep_metadata,
)
from sensor_select.model import build_phi, sensor_info_matrix

ONE_MINUS_E_HALF = 0.3934693402873665763962005


def test_random_system_scalar_is_signed_radius():
    A = random_stable_system(1, 0.7, 3)
    assert A.shape == (1, 1)
    assert abs(A[0, 0]) == pytest.approx(0.7, abs=1e-12)


@pytest.mark.parametrize("seed", [0, 5, 9])
def test_random_system_hits_target_radius(seed):
    A = random_stable_system(6, 0.85, seed)
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    assert rho == pytest.approx(0.85, abs=1e-8)


def test_random_system_deterministic():
    assert np.array_equal(random_stable_system(5, 0.9, 123), random_stable_system(5, 0.9, 123))
    assert not np.array_equal(random_stable_system(5, 0.9, 123), random_stable_system(5, 0.9, 124))


@pytest.mark.parametrize("radius", [0.0, 1.0, -0.2, 1.5])
def test_random_system_radius_domain(radius):
    with pytest.raises(ModelFormatError):
        random_stable_system(3, radius, 0)


def test_spectra_match_dense_information_matrices():
    A = random_stable_system(3, 0.8, 31)
    ell = 3
    lam_phi, traces, lam_mins = isotropic_spectra(A, ell)
    phi = build_phi(A, ell)
    assert lam_phi == pytest.approx(
        float(np.linalg.eigvalsh(phi.T @ phi)[-1]), rel=1e-10
    )
    model = SystemModel(
        n=3, p=3, ell=ell, A=A, C=np.eye(3),
        X0=np.eye(3), W=np.eye(3), v_diag=np.ones(3),
    )
    for w in range(3):
        U = sensor_info_matrix(model, phi, w + 1)
        assert traces[w] == pytest.approx(float(np.trace(U)), rel=1e-12)
        dense_min = float(np.linalg.eigvalsh(U)[0])
        # rank deficiency for n > 1: the true minimum eigenvalue is zero
        assert lam_mins[w] == 0.0
        assert abs(dense_min) <= 1e-10 * (1.0 + float(np.trace(U)))


def test_spectra_scalar_state_has_positive_min():
    A = np.array([[0.5]])
    _, traces, lam_mins = isotropic_spectra(A, 3)
    phi = build_phi(A, 3)
    M = phi.T @ phi
    assert lam_mins[0] == pytest.approx(float(np.linalg.eigvalsh(M)[0]), rel=1e-10)
    assert lam_mins[0] > 0.0
    assert traces[0] == pytest.approx(float(np.trace(M)), rel=1e-12)


def test_config_defaults_are_desk_scale():
    config = ExperimentConfig()
    assert (config.n, config.ell, config.trials) == (20, 10, 200)
    assert len(config.ratio_db_grid) == 41
    assert config.ratio_db_grid[0] == -30.0
    assert config.ratio_db_grid[-1] == 10.0
    assert config.sigma_v_sq == 1.0
    assert 0.0 < config.spectral_radius < 1.0


@pytest.mark.parametrize("bad", [
    dict(trials=0),
    dict(spectral_radius=0.0),
    dict(spectral_radius=1.0),
    dict(ratio_db_grid=()),
    dict(ratio_db_grid=(0.0, -1.0)),
    dict(ratio_db_grid=(0.0, 0.0)),
    dict(sigma_v_sq=0.0),
    dict(n=0),
    dict(seed=-1),
    dict(seed=2 ** 64),
])
def test_config_validation(bad):
    with pytest.raises(ModelFormatError):
        ExperimentConfig(**bad)


def test_sweep_trivial_point_closed_form():
    config = ExperimentConfig(n=1, ell=1, trials=1, ratio_db_grid=(0.0,), seed=1)
    records = run_sweep(config)
    assert len(records) == 1
    r = records[0]
    # Phi = I regardless of A, so gamma = 1/2 and everything is deterministic
    assert r.chamon_mean == pytest.approx(ONE_MINUS_E_HALF, abs=1e-15)
    assert r.ours_mean == pytest.approx((1.0 - math.exp(-3.0 / 8.0)) / 0.75, abs=1e-14)
    assert r.summers_mean == 1.0
    assert r.ours_std == 0.0 and r.chamon_std == 0.0 and r.summers_std == 0.0


def test_sweep_low_ratio_limit():
    config = ExperimentConfig(n=3, ell=2, trials=3, ratio_db_grid=(-60.0,), seed=4)
    (record,) = run_sweep(config)
    assert record.ours_mean > 0.99


def _small_config(**kw):
    base = dict(
        n=4, ell=3, trials=8,
        ratio_db_grid=tuple(float(x) for x in range(-30, 11, 5)),
        seed=77,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_sweep_matches_general_bounds_path():
    config = _small_config(trials=2)
    records = run_sweep(config)
    # rebuild the first trial's instance densely at one grid point and compare
    child = np.random.SeedSequence(entropy=77, spawn_key=(0,))
    A = random_stable_system(4, config.spectral_radius, child)
    db = config.ratio_db_grid[0]
    sigma_z_sq = 10.0 ** (db / 10.0)
    model = SystemModel(
        n=4, p=4, ell=3, A=A, C=np.eye(4),
        X0=sigma_z_sq * np.eye(4), W=sigma_z_sq * np.eye(4), v_diag=np.ones(4),
    )
    dense = compute_bounds(build_stacked(model))
    child1 = np.random.SeedSequence(entropy=77, spawn_key=(1,))
    A1 = random_stable_system(4, config.spectral_radius, child1)
    model1 = SystemModel(
        n=4, p=4, ell=3, A=A1, C=np.eye(4),
        X0=sigma_z_sq * np.eye(4), W=sigma_z_sq * np.eye(4), v_diag=np.ones(4),
    )
    dense1 = compute_bounds(build_stacked(model1))
    expected_mean = 0.5 * (dense.coeff_ours + dense1.coeff_ours)
    assert records[0].ours_mean == pytest.approx(expected_mean, rel=1e-9)


def test_sweep_monotone_and_dominant():
    records = run_sweep(_small_config())
    ours = [r.ours_mean for r in records]
    assert all(b <= a + 1e-9 for a, b in zip(ours, ours[1:]))
    for r in records:
        assert r.ours_mean >= r.chamon_mean - 1e-12
        assert r.ours_mean >= r.summers_mean - 1e-12  # n > 1 ensemble
        assert r.chamon_mean <= 1.0 - math.exp(-1.0) + 1e-9
        assert 0.0 <= r.ours_mean <= 1.0
        assert r.ours_std >= 0.0


def test_sweep_thread_count_does_not_change_output(tmp_path):
    config = _small_config(trials=6)
    serial = run_sweep(config, threads=1)
    threaded = run_sweep(config, threads=4)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(serial, str(a))
    write_sweep_csv(threaded, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_sweep_deterministic_bytes(tmp_path):
    config = _small_config(trials=4)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_sweep_csv(run_sweep(config), str(a))
    write_sweep_csv(run_sweep(config), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_single_trial_smoke_is_fast():
    # full default grid at n=10 with one trial stays well under 10 s
    start = time.monotonic()
    records = run_sweep(ExperimentConfig(n=10, trials=1, seed=3))
    assert time.monotonic() - start < 10.0
    assert len(records) == 41
    assert all(r.ours_std == 0.0 for r in records)


def test_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_sweep_csv([], str(path))
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"
    assert read_sweep_csv(str(path)) == []


def test_csv_round_trip(tmp_path):
    records = run_sweep(_small_config(trials=2))
    path = tmp_path / "r.csv"
    write_sweep_csv(records, str(path))
    assert read_sweep_csv(str(path)) == records


def test_csv_exact_formatting(tmp_path):
    record = SweepRecord(0.5, 0.25, 0.0, 0.125, 0.0, 1.0, 0.0)
    path = tmp_path / "one.csv"
    write_sweep_csv([record], str(path))
    lines = path.read_text().split("\n")
    assert lines[1] == "0.5,0.25,0,0.125,0,1,0"
    assert lines[2] == ""


def test_csv_parse_errors(tmp_path):
    path = tmp_path / "bad.csv"
    with pytest.raises(ModelFormatError, match="cannot read"):
        read_sweep_csv(str(path))
    path.write_text("")
    with pytest.raises(ModelFormatError, match="header"):
        read_sweep_csv(str(path))
    path.write_text("wrong,header\n")
    with pytest.raises(ModelFormatError, match="bad header"):
        read_sweep_csv(str(path))
    path.write_text(",".join(CSV_HEADER) + "\n1,2,3\n")
    with pytest.raises(ModelFormatError, match="line 2"):
        read_sweep_csv(str(path))
    path.write_text(",".join(CSV_HEADER) + "\n1,2,3,4,5,6,oops\n")
    with pytest.raises(ModelFormatError, match="line 2"):
        read_sweep_csv(str(path))


def test_metadata_sidecar(tmp_path):
    config = _small_config(trials=1)
    csv_path = tmp_path / "out.csv"
    write_sweep_csv([], str(csv_path))
    sidecar = write_sweep_metadata(config, str(csv_path))
    assert sidecar == str(csv_path) + ".meta.json"
    meta = json.loads(open(sidecar).read())
    assert meta["recipe"] == RECIPE_NAME
    assert meta["seed"] == 77
    assert meta["config"]["n"] == 4
    assert meta["config"]["spectral_radius"] == config.spectral_radius
    assert meta["rng"]
    assert meta["version"]


def test_load_config(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"n": 2, "ell": 2, "trials": 3, "ratio_db_grid": [0, 5]}))
    config = load_config(str(path))
    assert (config.n, config.ell, config.trials) == (2, 2, 3)
    assert config.ratio_db_grid == (0.0, 5.0)
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ModelFormatError, match="unknown keys"):
        load_config(str(path))
    path.write_text("not json")
    with pytest.raises(ModelFormatError, match="invalid JSON"):
        load_config(str(path))
    path.write_text(json.dumps({"ratio_db_grid": 5}))
    with pytest.raises(ModelFormatError, match="array"):
        load_config(str(path))
    with pytest.raises(ModelFormatError, match="cannot read"):
        load_config(str(tmp_path / "absent.json"))


def test_no_partial_csv_on_failed_write(tmp_path, monkeypatch):
    # force the final rename to fail and confirm nothing is left behind
    import sensor_select._files as files

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(files.os, "replace", boom)
    target = tmp_path / "out.csv"
    with pytest.raises(OSError):
        write_sweep_csv([], str(target))
    assert not target.exists()
    assert os.listdir(tmp_path) == []
