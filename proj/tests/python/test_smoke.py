"""Smoke tests for the Python bindings."""

import math

import pytest

import magsim


def test_geometric_factor_value():
    assert magsim.geometric_factor(0.006, 0.01) == pytest.approx(21444.5677, rel=1e-7)
    assert magsim.geometric_factor(0.01, 0.0) == 0.0


def test_force_law_is_odd_and_restoring():
    p = magsim.PhysicalParams()
    f = magsim.lateral_magnetic_force(0.302, 0.300, p)
    assert f > 0.0
    assert magsim.lateral_magnetic_force(0.298, 0.300, p) == -f


def test_rmse_matches_hand_value():
    assert magsim.rmse([2.0, 2.0], [0.0, 2.0]) == pytest.approx(math.sqrt(2.0), abs=1e-12)
    with pytest.raises(ValueError):
        magsim.rmse([1.0], [1.0, 2.0])


def test_plant_step_advances_time_and_stays_put_at_equilibrium():
    p = magsim.PhysicalParams()
    state = magsim.PlantState(0.3, 0.0, 0.3, 0.0)
    nxt = magsim.step(state, 0.0, 1e-3, p)
    assert nxt.time == pytest.approx(1e-3)
    assert nxt.bottom_pos == 0.3
    assert nxt.top_vel == 0.0


def test_ekf_predict_update_cycle():
    p = magsim.PhysicalParams()
    noise = magsim.NoiseConfig()
    import numpy as np

    noise.x0 = np.array([0.3, 0.0, 0.3, 0.0])
    ekf = magsim.Ekf(p, noise, magsim.MeasureMode.FULL)
    ekf.predict(0.5, 1e-3)
    z = magsim.Measurement()
    z.mode = magsim.MeasureMode.FULL
    z.z = np.array([0.3001, 0.2999])
    z.t = 1e-3
    ekf.update(z)
    assert ekf.state.shape == (4,)
    assert ekf.max_symmetry_defect <= 1e-12
    assert ekf.min_eigenvalue_seen >= -1e-10


def test_observability_ranks():
    p = magsim.PhysicalParams()
    import numpy as np

    x = np.array([0.30, 0.02, 0.2985, 0.018])
    full = magsim.observability_rank(x, 0.5, 1e-3, p, magsim.MeasureMode.FULL)
    assert full.rank == 4
    p_decoupled = magsim.PhysicalParams()
    p_decoupled.coupling_Kd = 0.0
    partial = magsim.observability_rank(
        x, 0.5, 1e-3, p_decoupled, magsim.MeasureMode.PARTIAL
    )
    assert partial.rank == 2


def test_calibrate_and_static_trial(tmp_path):
    cfg = magsim.default_config(magsim.ScenarioKind.CALIBRATE)
    cfg.out_dir = str(tmp_path)
    calibration = magsim.run_calibrate(cfg)
    assert calibration.predicted_detach_kg == pytest.approx(1.45, rel=1e-6)

    static_cfg = magsim.default_config(magsim.ScenarioKind.STATIC)
    static_cfg.out_dir = str(tmp_path)
    static_cfg.physics.coupling_Kd = calibration.coupling_Kd
    static_cfg.weights = [0.0, 1.0, 1.7]
    report = magsim.run_static_trial(static_cfg)
    assert report.rows[1].state == magsim.Attachment.ATTACHED
    assert report.detach_weight_kg == pytest.approx(1.7)


def test_recovery_law():
    rc = magsim.RecoveryConfig()
    rc.offset_threshold = 2e-3
    rc.proportional_gain = 2.0
    rc.max_recovery_speed = 0.05
    assert magsim.offset_recovery(0.0, 0.022, rc) == 0.022
    assert magsim.offset_recovery(0.012, 0.022, rc) == pytest.approx(0.002)
