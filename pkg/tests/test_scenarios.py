"""Closed-loop scenario harness tests.

Oracles: the braking-onset algebra for where deceleration may start, a
Monte Carlo sweep of the seeded noise model, step-metric recomputation
from raw rows, and cross-checks of every summary field against its own
trajectory.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from pedbrake.control import PdGains, braking_gains
from pedbrake.dynamics import LateralParams
from pedbrake.errors import ConfigurationError
from pedbrake.scenarios import (
    BRAKE_CSV_HEADER,
    DETECTION_CSV_HEADER,
    LATERAL_CSV_HEADER,
    LateralScenarioConfig,
    ScenarioConfig,
    default_sweep_base,
    run_braking_scenario,
    run_detection_characterization,
    run_kp_sweep,
    run_lateral_scenario,
    write_detection_csv,
    write_lateral_csv,
    write_trajectory_csv,
)
from pedbrake.sensing import DetectionNoiseModel, noise_free


def _columns(log):
    return {
        name: getattr(log, name)
        for name in ("t", "x", "v", "ped_true", "ped_meas", "r", "e1",
                     "r_v", "e2", "u", "brake_cmd")
    }


# ── braking scenario ─────────────────────────────────────────────────────────

def test_noise_free_defaults_stop_at_safe_offset():
    log = run_braking_scenario(ScenarioConfig())
    assert log.converged
    assert log.final_gap == pytest.approx(5.0, abs=0.1)
    assert log.v[-1] < 0.01
    assert log.final_gap == log.ped_true[-1]
    assert not math.isnan(log.stop_time)
    # vehicle is brake-only: speed never increases and never goes negative
    assert (np.diff(log.v) <= 1e-12).all()
    assert (log.v >= 0.0).all()
    # and it never crosses the stop point by more than a hair
    assert log.x.max() <= 25.0 - 5.0 + 0.01


def test_time_grid_and_summary_recompute_from_rows():
    cfg = ScenarioConfig()
    log = run_braking_scenario(cfg)
    assert log.t[0] == 0.0
    assert np.allclose(np.diff(log.t), cfg.dt, rtol=0.0, atol=1e-12)
    assert (np.diff(log.t) > 0).all()
    peak_oracle = float(np.max((log.v[:-1] - log.v[1:]) / cfg.dt))
    assert log.peak_decel == peak_oracle
    assert log.stop_time == log.t[-1]


def test_stationary_vehicle_never_moves():
    cfg = ScenarioConfig(initial_speed=0.0)
    log = run_braking_scenario(cfg)
    assert log.converged
    assert (log.x == 0.0).all()
    assert log.final_gap == cfg.initial_ped_distance
    assert (log.brake_cmd == 0.0).all()


def test_identical_config_is_bit_identical():
    cfg = ScenarioConfig(noise=DetectionNoiseModel(), seed=17)
    a = run_braking_scenario(cfg)
    b = run_braking_scenario(cfg)
    for name, col in _columns(a).items():
        assert np.array_equal(col, getattr(b, name), equal_nan=True), name
    assert a.final_gap == b.final_gap and a.stop_time == b.stop_time


def test_seed_changes_noisy_trajectory():
    cfg = ScenarioConfig(noise=DetectionNoiseModel(), seed=1)
    a = run_braking_scenario(cfg)
    b = run_braking_scenario(replace(cfg, seed=2))
    assert not np.array_equal(a.ped_meas, b.ped_meas, equal_nan=True)


def test_noisy_runs_stop_short_of_pedestrian():
    for seed in range(10):
        log = run_braking_scenario(ScenarioConfig(noise=DetectionNoiseModel(), seed=seed))
        assert log.converged
        assert log.final_gap > 0.0
        assert (log.v >= 0.0).all()  # brake pulses never reverse the vehicle


def test_safety_margin_across_speeds():
    # start at the braking-onset distance + 5 m: position must never pass
    # the stop point by more than 0.5 m
    gains = braking_gains()
    for v0 in (2.0, 4.0, 6.0, 8.0, 10.0, 12.0):
        onset_e1 = (1.0 + gains.k_d) * v0 / gains.k_p  # onset algebra oracle
        for extra in (5.0, 12.0):
            d0 = onset_e1 + 5.0 + extra
            cfg = ScenarioConfig(initial_speed=v0, initial_ped_distance=d0,
                                 horizon=60.0)
            log = run_braking_scenario(cfg)
            assert log.converged, (v0, extra)
            assert log.x.max() <= (d0 - 5.0) + 0.5, (v0, extra)


def test_horizon_hit_is_flagged_not_raised():
    log = run_braking_scenario(ScenarioConfig(horizon=2.0))
    assert not log.converged
    assert math.isnan(log.stop_time)
    assert log.v[-1] > 0.01


def test_dt_halving_barely_moves_final_gap():
    gap = run_braking_scenario(ScenarioConfig(dt=0.01)).final_gap
    gap_half = run_braking_scenario(ScenarioConfig(dt=0.005)).final_gap
    assert abs(gap - gap_half) < 0.01


def test_detection_decimation_holds_between_samples():
    cfg = ScenarioConfig(noise=DetectionNoiseModel(), seed=5, detection_every=4)
    log = run_braking_scenario(cfg)
    present = ~np.isnan(log.ped_meas)
    idx = np.nonzero(present)[0]
    assert (idx % 4 == 0).all()
    # reference columns still defined between samples (zero-order hold)
    assert not np.isnan(log.e1[idx[0]:]).any()


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ScenarioConfig(dt=0.0)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(dt=0.2)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(initial_ped_distance=4.0, safe_offset=5.0)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(initial_speed=-1.0)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(horizon=0.001)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(detection_every=0)


# ── comfort sweep ────────────────────────────────────────────────────────────

def test_sweep_orders_peak_deceleration_and_agrees_on_final_position():
    logs = run_kp_sweep(default_sweep_base(), [0.4, 0.6, 0.8])
    peaks = [log.peak_decel for log in logs]
    assert peaks[0] < peaks[1] < peaks[2]
    finals = [log.x[-1] for log in logs]
    assert max(finals) - min(finals) < 0.1
    assert all(log.converged for log in logs)


def test_peak_decel_non_decreasing_over_grid():
    logs = run_kp_sweep(default_sweep_base(), [0.4, 0.55, 0.7, 0.85, 1.0])
    peaks = [log.peak_decel for log in logs]
    assert all(b >= a - 1e-9 for a, b in zip(peaks, peaks[1:]))


def test_single_value_sweep_equals_plain_run():
    base = default_sweep_base()
    sweep_log = run_kp_sweep(base, [0.8])[0]
    direct = run_braking_scenario(
        replace(base, gains=PdGains(0.8, base.gains.k_d, base.gains.k_inner),
                label=sweep_log.label)
    )
    for name, col in _columns(sweep_log).items():
        assert np.array_equal(col, getattr(direct, name), equal_nan=True), name


def test_soft_gain_brakes_on_first_step():
    # onset algebra: e1_0 = 35 < (1 + k_d) v0 / k_p for k_p = 0.2
    base = default_sweep_base()
    assert 35.0 < 1.1 * base.initial_speed / 0.2
    log = run_kp_sweep(base, [0.2])[0]
    assert log.brake_cmd[0] > 0.0


def test_empty_sweep():
    assert run_kp_sweep(default_sweep_base(), []) == []


# ── lateral scenario ─────────────────────────────────────────────────────────

def test_lateral_equilibrium_stays_at_zero():
    log = run_lateral_scenario(LateralScenarioConfig(initial_offset=0.0, y_ref=0.0))
    assert (log.y == 0.0).all()
    assert (log.delta_f == 0.0).all()
    assert not log.diverged
    assert log.overshoot == 0.0


def test_lateral_unit_step_converges_with_small_overshoot():
    log = run_lateral_scenario(LateralScenarioConfig(y_ref=1.0))
    assert not log.diverged
    assert log.overshoot < 0.2
    assert log.settling_time < log.t[-1]
    assert log.final_y == pytest.approx(1.0, abs=0.02)
    # overshoot recomputable from rows
    assert log.overshoot == pytest.approx(max(0.0, float(log.y.max()) - 1.0), abs=1e-12)
    # steering stays within the saturation bound
    assert (np.abs(log.delta_f) <= 0.5).all()


def test_lateral_robust_to_doubled_stiffness():
    params = LateralParams(c_f=160000.0, c_r=160000.0)
    log = run_lateral_scenario(LateralScenarioConfig(y_ref=1.0, params=params))
    assert not log.diverged
    assert log.final_y == pytest.approx(1.0, abs=0.05)


def test_lateral_piecewise_reference():
    log = run_lateral_scenario(
        LateralScenarioConfig(y_ref=[(0.0, 1.0), (8.0, -1.0)], horizon=16.0)
    )
    assert not log.diverged
    # metrics follow the final segment
    assert log.final_y == pytest.approx(-1.0, abs=0.05)
    assert log.settling_time >= 8.0


def test_lateral_divergence_flagged():
    # sampled-data instability: huge discrete derivative gain at a coarse
    # control step, saturation effectively disabled
    cfg = LateralScenarioConfig(y_ref=1.0, gains=PdGains(1.0, 50.0, 1.0),
                                dt=0.1, horizon=30.0, steering_limit=1e6)
    log = run_lateral_scenario(cfg)
    assert log.diverged
    assert abs(log.y[-1]) > cfg.diverge_limit
    assert len(log) < 3001  # aborted early, not run to horizon


# ── detection characterization ───────────────────────────────────────────────

def test_characterization_std_increases_with_range():
    log = run_detection_characterization(
        [5.0, 10.0, 15.0, 20.0, 25.0], dwell=5.0, model=DetectionNoiseModel(seed=3)
    )
    stds = [s.std for s in log.summaries]
    assert all(b > a for a, b in zip(stds, stds[1:]))
    means = [s.mean for s in log.summaries]
    for mean, true_range in zip(means, (5.0, 10.0, 15.0, 20.0, 25.0)):
        assert mean == pytest.approx(true_range, abs=0.5)


def test_characterization_zero_noise_exact():
    log = run_detection_characterization([5.0, 10.0], dwell=1.0, model=noise_free())
    values = [m.value for m in log.measurements]
    assert values == [5.0] * 100 + [10.0] * 100
    assert [s.std for s in log.summaries] == [0.0, 0.0]


def test_characterization_deterministic():
    model = DetectionNoiseModel(seed=44)
    a = run_detection_characterization([5.0, 25.0], 2.0, model)
    b = run_detection_characterization([5.0, 25.0], 2.0, model)
    assert [m.value for m in a.measurements] == [m.value for m in b.measurements]
    assert [m.timestamp for m in a.measurements] == [m.timestamp for m in b.measurements]


def test_characterization_validation():
    with pytest.raises(ConfigurationError):
        run_detection_characterization([0.0], 1.0, noise_free())
    with pytest.raises(ConfigurationError):
        run_detection_characterization([5.0], 0.0, noise_free())


# ── CSV round trips ──────────────────────────────────────────────────────────

def test_trajectory_csv_schema_and_roundtrip(tmp_path):
    log = run_braking_scenario(ScenarioConfig(noise=DetectionNoiseModel(), seed=9))
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(log, path)
    lines = path.read_text().splitlines()
    assert lines[0] == BRAKE_CSV_HEADER
    assert len(lines) == len(log) + 1

    body = [line.split(",") for line in lines[1:]]
    dropped = [i for i, row in enumerate(body) if row[4] == ""]
    assert dropped == list(np.nonzero(np.isnan(log.ped_meas))[0])
    # >= 9 significant digits round-trip
    parsed_v = np.array([float(row[2]) for row in body])
    assert np.allclose(parsed_v, log.v, rtol=1e-11, atol=1e-300)


def test_lateral_csv_schema(tmp_path):
    log = run_lateral_scenario(LateralScenarioConfig())
    path = tmp_path / "lateral.csv"
    write_lateral_csv(log, path)
    lines = path.read_text().splitlines()
    assert lines[0] == LATERAL_CSV_HEADER
    assert len(lines) == len(log) + 1


def test_detection_csv_schema(tmp_path):
    log = run_detection_characterization([5.0], 0.5, DetectionNoiseModel(seed=2))
    path = tmp_path / "detection.csv"
    write_detection_csv(log, path)
    lines = path.read_text().splitlines()
    assert lines[0] == DETECTION_CSV_HEADER
    assert len(lines) == 51
