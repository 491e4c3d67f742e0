import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridgrip.errors import DomainError, InfeasibleError, IngestionError
from hybridgrip.joint import (
    DEFAULT_MODEL,
    PROTOCOL_ALPHAS,
    PROTOCOL_PRESSURES,
    JointCalibrationGrid,
    JointStiffnessModel,
    fit_model,
    forces_for_torque,
    ingest_calibration_log,
    load_model,
    read_calibration_log,
    required_pressure,
    ring_torque,
    ring_torque_grid,
    save_json,
    torque_from_forces,
    write_calibration_log,
)

finite = st.floats(-100, 100)


def synthetic_rows(k0, k1, trials=1, a1=50.0, noise=None, rng=None):
    model = JointStiffnessModel(k0, k1)
    rows = []
    for a in PROTOCOL_ALPHAS:
        for p in PROTOCOL_PRESSURES:
            for _ in range(trials):
                tau = ring_torque(model, a, p)
                if noise:
                    tau = max(0.0, tau + rng.normal(0, noise))
                rows.append((a, p, *forces_for_torque(tau, a, a1)))
    return rows


# lever-arm torque -------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(finite, finite, finite, finite, st.floats(0, 90), st.floats(1, 100))
def test_torque_superposition(fy1, fz1, fy2, fz2, alpha, a1):
    lhs = torque_from_forces(fy1 + fy2, fz1 + fz2, alpha, a1)
    rhs = torque_from_forces(fy1, fz1, alpha, a1) + torque_from_forces(fy2, fz2, alpha, a1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(finite, finite, st.floats(1, 100))
def test_torque_null_directions(fy, fz, a1):
    assert torque_from_forces(0.0, fz, 0.0, a1) == 0.0
    assert torque_from_forces(fy, 0.0, 90.0, a1) == pytest.approx(0.0, abs=1e-12 * max(1.0, abs(fy) * a1))


def test_torque_worked_example():
    # 45 deg, a1 = 50: tau = 50 * (fz - fy) / sqrt(2)
    assert torque_from_forces(-1.0, 1.0, 45.0, 50.0) == pytest.approx(100 / math.sqrt(2), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1000), st.floats(0, 90))
def test_forces_for_torque_roundtrip(tau, alpha):
    fy, fz = forces_for_torque(tau, alpha, 50.0)
    assert torque_from_forces(fy, fz, alpha, 50.0) == pytest.approx(tau, rel=1e-12, abs=1e-9)


def test_torque_alpha_range():
    with pytest.raises(DomainError):
        torque_from_forces(1.0, 1.0, 91.0, 50.0)


# grid and interpolation -------------------------------------------------

def random_grid(rng):
    na, np_ = rng.integers(2, 10, size=2)
    alphas = np.sort(rng.choice(np.arange(0, 81), size=na, replace=False)).astype(float)
    pressures = np.sort(rng.choice(np.arange(0, 151), size=np_, replace=False)).astype(float)
    torques = rng.uniform(0, 500, size=(na, np_))
    return JointCalibrationGrid(alphas, pressures, torques, np.ones((na, np_), dtype=int))


def test_node_exact_on_random_grids():
    rng = np.random.default_rng(1)
    for _ in range(100):
        g = random_grid(rng)
        for i, a in enumerate(g.alphas):
            for j, p in enumerate(g.pressures):
                assert ring_torque_grid(g, a, p) == g.torques[i, j]


def test_bilinear_against_scipy():
    from scipy.interpolate import RegularGridInterpolator

    rng = np.random.default_rng(2)
    for _ in range(20):
        g = random_grid(rng)
        ref = RegularGridInterpolator((g.alphas, g.pressures), g.torques, method="linear")
        for a, p in zip(rng.uniform(g.alphas[0], g.alphas[-1], 20), rng.uniform(g.pressures[0], g.pressures[-1], 20)):
            assert ring_torque_grid(g, a, p) == pytest.approx(float(ref([a, p])[0]), rel=1e-12, abs=1e-9)


def test_grid_rejects_extrapolation():
    g = JointCalibrationGrid.from_model(200, 4)
    with pytest.raises(DomainError):
        ring_torque_grid(g, 81.0, 10.0)
    with pytest.raises(DomainError):
        ring_torque_grid(g, 10.0, -1.0)


def test_grid_is_read_only():
    g = JointCalibrationGrid.from_model(200, 4)
    with pytest.raises(ValueError):
        g.torques[0, 0] = 1.0


@pytest.mark.parametrize(
    "alphas,pressures,torques",
    [
        ([0, 0], [0, 10], [[0, 0], [0, 0]]),
        ([0, 90], [0, 10], [[0, 0], [0, 0]]),
        ([0, 10], [0, 200], [[0, 0], [0, 0]]),
        ([0, 10], [0, 10], [[0, 0], [0, -1]]),
        ([0, 10], [0, 10], [[0, 0]]),
    ],
)
def test_grid_invariants(alphas, pressures, torques):
    t = np.asarray(torques, dtype=float)
    with pytest.raises(DomainError):
        JointCalibrationGrid(alphas, pressures, t, np.ones(t.shape, dtype=int))


def test_grid_dict_roundtrip():
    g = JointCalibrationGrid.from_model(123, 2.5)
    back = JointCalibrationGrid.from_dict(json.loads(json.dumps(g.to_dict())))
    assert np.array_equal(back.torques, g.torques)
    assert np.array_equal(back.alphas, g.alphas)


# fit ---------------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1000), st.floats(0, 20))
def test_fit_recovers_noiseless_model(k0, k1):
    model = fit_model(JointCalibrationGrid.from_model(k0, k1))
    scale = max(k0, 1.0)
    assert model.k0 == pytest.approx(k0, rel=1e-6, abs=1e-6 * scale)
    assert model.k1 == pytest.approx(k1, rel=1e-6, abs=1e-6 * max(k1, 1e-3))


def test_fit_matches_lstsq_oracle_on_noisy_grid():
    rng = np.random.default_rng(3)
    rows = synthetic_rows(200, 4, trials=5, noise=5.0, rng=rng)
    grid = ingest_calibration_log(rows)
    model = fit_model(grid)
    a_rad, p = np.meshgrid(np.radians(grid.alphas), grid.pressures, indexing="ij")
    A = np.column_stack([a_rad.ravel(), (a_rad * p).ravel()])
    coef, *_ = np.linalg.lstsq(A, grid.torques.ravel(), rcond=None)
    assert (model.k0, model.k1) == pytest.approx(tuple(coef), rel=1e-9)
    resid = A @ coef - grid.torques.ravel()
    assert model.residual_rmse == pytest.approx(math.sqrt(np.mean(resid**2)), rel=1e-9)


def test_fit_clamps_negative_coefficient():
    # torque falling with pressure would need k1 < 0
    a = np.array(PROTOCOL_ALPHAS)
    p = np.array(PROTOCOL_PRESSURES)
    t = np.outer(np.radians(a), 600 - 2 * p)
    grid = JointCalibrationGrid(a, p, t, np.ones_like(t, dtype=int))
    model = fit_model(grid)
    assert model.k1 == 0.0 and model.k0 > 0


def test_fit_all_zero_grid_is_degenerate(caplog):
    model = fit_model(JointCalibrationGrid.from_model(0, 0))
    assert model.degenerate and model.k0 == 0 and model.k1 == 0
    assert "all zero" in caplog.text


def test_fit_needs_two_by_two():
    g = JointCalibrationGrid([10.0], [0.0, 10.0], [[1.0, 2.0]], [[1, 1]])
    with pytest.raises(DomainError):
        fit_model(g)


# model and inverse -------------------------------------------------------

def test_default_model_examples():
    assert ring_torque(DEFAULT_MODEL, 0.0, 150.0) == 0.0
    assert ring_torque(DEFAULT_MODEL, 45.0, 100.0) == pytest.approx(600 * math.pi / 4, rel=1e-14)


def test_monotone_on_fine_grid():
    alphas = np.linspace(0, 80, 161)
    pressures = np.linspace(0, 150, 151)
    grid = JointCalibrationGrid.from_model(200, 4)
    tau = np.array([[ring_torque(DEFAULT_MODEL, a, p) for p in pressures] for a in alphas])
    interp = np.array([[ring_torque_grid(grid, a, p) for p in pressures] for a in alphas])
    for t in (tau, interp):
        assert np.all(np.diff(t, axis=0) >= 0)
        assert np.all(np.diff(t, axis=1) >= 0)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.5, 80), st.floats(0, 150))
def test_required_pressure_roundtrip(alpha, p):
    tau = ring_torque(DEFAULT_MODEL, alpha, p)
    assert abs(required_pressure(DEFAULT_MODEL, alpha, tau) - p) < 1e-9


def test_required_pressure_infeasible():
    with pytest.raises(InfeasibleError):
        required_pressure(DEFAULT_MODEL, 45.0, 1.0)
    flat = JointStiffnessModel(200, 0)
    with pytest.raises(InfeasibleError):
        required_pressure(flat, 45.0, 500.0)
    assert required_pressure(flat, 45.0, ring_torque(flat, 45.0, 0.0)) == 0.0
    with pytest.raises(DomainError):
        required_pressure(DEFAULT_MODEL, 0.0, 1.0)


def test_model_json_roundtrip(tmp_path):
    m = JointStiffnessModel(1.5, 2.5, 0.1, "x.csv")
    save_json(m.to_dict(), tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == m
    assert set(m.to_dict()) == {
        "k0_nmm_per_rad", "k1_nmm_per_rad_per_kpa", "residual_rmse_nmm", "source_grid", "degenerate",
    }


def test_model_rejects_negative():
    with pytest.raises(DomainError):
        JointStiffnessModel(-1, 0)


# log ingestion -----------------------------------------------------------

def test_log_roundtrip_recovers_generator(tmp_path):
    path = tmp_path / "log.csv"
    write_calibration_log(synthetic_rows(150, 3, trials=2), path)
    grid = ingest_calibration_log(read_calibration_log(path))
    assert grid.torques.shape == (17, 16)
    assert np.all(grid.trials_per_cell == 2)
    model = fit_model(grid)
    assert model.k0 == pytest.approx(150, rel=1e-6)
    assert model.k1 == pytest.approx(3, rel=1e-6)


def test_ingest_averages_trials():
    rows = [(10.0, 0.0, *forces_for_torque(t, 10.0, 50.0)) for t in (1.0, 2.0, 6.0)]
    rows += [(a, p, 0.0, 0.0) for a, p in ((10.0, 10.0), (20.0, 0.0), (20.0, 10.0))]
    grid = ingest_calibration_log(rows)
    assert grid.torques[0, 0] == pytest.approx(3.0)
    assert grid.trials_per_cell[0, 0] == 3


def test_ingest_names_empty_cell():
    rows = [r for r in synthetic_rows(200, 4) if not (r[0] == 5.0 and r[1] == 20.0)]
    with pytest.raises(IngestionError, match=r"alpha=5 deg, pressure=20 kPa"):
        ingest_calibration_log(rows)


def test_ingest_rejects_negative_mean():
    rows = [(a, p, 1.0, 0.0) for a in (10.0, 20.0) for p in (0.0, 10.0)]
    with pytest.raises(IngestionError, match="negative mean"):
        ingest_calibration_log(rows)


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "no rows"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n", "no rows"),
        ("a,b,c,d\n1,2,3,4\n", "line 1"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n1,2,3\n", "line 2: expected 4 fields"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n1,2,3,4\n1,x,3,4\n", "line 3: non-numeric"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n95,2,3,4\n", "line 2: alpha"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n5,151,3,4\n", "line 2: pressure"),
        ("alpha_deg,pressure_kpa,fy_n,fz_n\n5,10,nan,4\n", "line 2: non-finite"),
    ],
)
def test_log_parse_errors(tmp_path, text, match):
    path = tmp_path / "log.csv"
    path.write_text(text)
    with pytest.raises(IngestionError, match=match):
        read_calibration_log(path)


def test_documented_torque_examples():
    assert torque_from_forces(0.0, 1.0, 30.0, 50.0) == pytest.approx(25.0, rel=1e-12)
    assert torque_from_forces(1.0, 0.0, 0.0, 50.0) == -50.0
    assert torque_from_forces(0.5, 2.0, 45.0, 50.0) == pytest.approx(53.03, abs=5e-3)
    assert ring_torque(DEFAULT_MODEL, 45.0, 0.0) == pytest.approx(157.08, abs=1e-2)
    assert required_pressure(DEFAULT_MODEL, 45.0, 471.2) == pytest.approx(100.0, abs=0.05)


def test_documented_grid_examples():
    one_axis = JointCalibrationGrid([0.0, 10.0], [0.0, 10.0], [[10.0, 10.0], [20.0, 20.0]], [[1, 1], [1, 1]])
    assert ring_torque_grid(one_axis, 5.0, 5.0) == pytest.approx(15.0)
    four = JointCalibrationGrid([0.0, 10.0], [0.0, 10.0], [[0.0, 10.0], [20.0, 30.0]], [[1, 1], [1, 1]])
    assert ring_torque_grid(four, 5.0, 5.0) == pytest.approx(15.0)
    rows = [(45.0, 100.0, -0.2, 1.0)] * 10
    grid = ingest_calibration_log(rows)
    assert grid.torques.shape == (1, 1)
    assert grid.torques[0, 0] == pytest.approx(torque_from_forces(-0.2, 1.0, 45.0, 50.0))


def test_fit_with_uniform_noise_within_five_percent():
    rng = np.random.default_rng(4)
    grid = JointCalibrationGrid.from_model(200, 4)
    noisy = np.clip(grid.torques + rng.uniform(-5, 5, grid.torques.shape), 0, None)
    model = fit_model(JointCalibrationGrid(grid.alphas, grid.pressures, noisy, grid.trials_per_cell))
    assert model.k0 == pytest.approx(200, rel=0.05)
    assert model.k1 == pytest.approx(4, rel=0.05)
