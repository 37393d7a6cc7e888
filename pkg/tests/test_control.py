"""Cascaded-controller tests.

Oracles: chained hand evaluation of the two loop laws with the
experiment gains, an algebraic solve of the braking-onset threshold, and
randomized sweeps for the clamp/monotonicity/scaling properties.
"""

import math

import numpy as np
import pytest

from pedbrake.control import (
    LongitudinalConfig,
    PdGains,
    braking_force,
    force_to_brake_command,
    lateral_step,
    longitudinal_step,
    braking_gains,
    reference_velocity,
)
from pedbrake.errors import InvalidInputError, InvalidParameterError

GAINS = braking_gains()  # (0.8, 0.1, 10000)
CONFIG = LongitudinalConfig()


# ── outer loop: reference velocity ───────────────────────────────────────────

def test_reference_velocity_hand_evaluation():
    # 0.8*20 + 0.1*(-8.13) = 15.187
    expected = 0.8 * 20.0 + 0.1 * (-8.13)
    assert reference_velocity(20.0, -8.13, GAINS) == pytest.approx(expected, rel=1e-12)
    assert reference_velocity(20.0, -8.13, GAINS) == pytest.approx(15.187, abs=1e-9)


def test_reference_velocity_at_stop_point():
    assert reference_velocity(0.0, 0.0, GAINS) == 0.0


def test_reference_velocity_floors_at_zero():
    # raw value 0.8*(-2) = -1.6, floored: never command reverse
    assert reference_velocity(-2.0, 0.0, GAINS) == 0.0


def test_reference_velocity_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        reference_velocity(math.nan, 0.0, GAINS)


# ── inner loop: braking force ────────────────────────────────────────────────

@pytest.mark.parametrize("e2, expected", [(-0.5, -5000.0), (0.0, 0.0), (-2.0, -20000.0)])
def test_braking_force_is_linear_in_error(e2, expected):
    assert braking_force(e2, 10000.0) == expected


def test_braking_force_scale_property():
    # doubling the inner gain doubles the (pre-clamp) force, exactly
    rng = np.random.default_rng(11)
    for e2 in rng.uniform(-20, 20, size=200):
        assert braking_force(e2, 20000.0) == 2.0 * braking_force(e2, 10000.0)


# ── force to brake command ───────────────────────────────────────────────────

def test_force_to_brake_command_values():
    assert force_to_brake_command(-5000.0, 8000.0) == 0.625
    assert force_to_brake_command(3000.0, 8000.0) == 0.0  # brake-only
    assert force_to_brake_command(-20000.0, 8000.0) == 1.0


def test_brake_command_clamp_totality():
    rng = np.random.default_rng(12)
    for u in np.concatenate([rng.uniform(-1e9, 1e9, 500), [0.0, -0.0, 1e300, -1e300]]):
        cmd = force_to_brake_command(float(u), 8000.0)
        assert 0.0 <= cmd <= 1.0


def test_brake_command_requires_positive_max_force():
    with pytest.raises(InvalidParameterError):
        force_to_brake_command(-1.0, 0.0)


# ── composed longitudinal step ───────────────────────────────────────────────

def test_far_pedestrian_keeps_controller_idle():
    # chained oracle: e1 = 25-5, r_v = 0.8*20 - 0.1*8.13, e2 = r_v - v > 0
    rec = longitudinal_step(25.0, 8.13, CONFIG)
    assert rec.e1 == 20.0
    assert rec.r == 20.0
    assert rec.r_v == pytest.approx(15.187, abs=1e-9)
    assert rec.e2 == pytest.approx(15.187 - 8.13, abs=1e-9)
    assert rec.u > 0  # would-be throttle
    assert rec.brake_cmd == 0.0


def test_stopped_at_stop_point_is_quiescent():
    rec = longitudinal_step(5.0, 0.0, CONFIG)
    assert (rec.e1, rec.r_v, rec.e2, rec.u, rec.brake_cmd) == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_braking_onset_threshold():
    # algebraic solve of r_v(e1, v) = v: e1* = (1 + k_d) v / k_p
    v = 8.13
    onset_e1 = (1.0 + GAINS.k_d) * v / GAINS.k_p
    assert onset_e1 == pytest.approx(1.375 * v, rel=1e-12)
    assert onset_e1 == pytest.approx(11.18, abs=5e-3)

    eps = 1e-6
    offset = CONFIG.safe_offset
    assert longitudinal_step(offset + onset_e1 + eps, v, CONFIG).brake_cmd == 0.0
    assert longitudinal_step(offset + onset_e1 - eps, v, CONFIG).brake_cmd > 0.0


def test_negative_distance_commands_full_stop_while_moving():
    rec = longitudinal_step(-3.0, 8.0, CONFIG)
    assert rec.e1 == -CONFIG.safe_offset  # treated as distance zero
    assert rec.r_v == 0.0
    assert rec.brake_cmd == 1.0


def test_brake_monotone_in_distance():
    # closer pedestrian never brakes less, v fixed
    rng = np.random.default_rng(13)
    for v in rng.uniform(0.0, 15.0, size=20):
        distances = np.sort(rng.uniform(-5.0, 60.0, size=80))
        cmds = [longitudinal_step(float(d), float(v), CONFIG).brake_cmd for d in distances]
        assert all(a >= b for a, b in zip(cmds, cmds[1:]))


def test_brake_onset_identity_while_moving():
    # brake_cmd > 0  <=>  k_p e1 - k_d v < v, for v > 0 (at rest the brake
    # is always released: the floored reference velocity cannot undershoot v=0)
    rng = np.random.default_rng(14)
    for _ in range(500):
        v = float(rng.uniform(1e-3, 15.0))
        distance = float(rng.uniform(-5.0, 60.0))
        rec = longitudinal_step(distance, v, CONFIG)
        e1 = rec.e1
        assert (rec.brake_cmd > 0.0) == (GAINS.k_p * e1 - GAINS.k_d * v < v)


def test_longitudinal_step_input_validation():
    with pytest.raises(InvalidInputError):
        longitudinal_step(math.inf, 1.0, CONFIG)
    with pytest.raises(InvalidInputError):
        longitudinal_step(10.0, -1.0, CONFIG)


def test_gains_invariants():
    with pytest.raises(InvalidParameterError):
        PdGains(0.0, 0.1, 1.0)
    with pytest.raises(InvalidParameterError):
        PdGains(0.8, -0.1, 1.0)
    with pytest.raises(InvalidParameterError):
        PdGains(0.8, 0.1, 0.0)
    PdGains(0.8, 0.0, 1.0)  # k_d = 0 is allowed


# ── lateral steering step ────────────────────────────────────────────────────

LAT = PdGains(0.15, 0.05, 0.6)  # explicit gains from the worked examples


def test_lateral_on_path_is_zero():
    assert lateral_step(0.0, 0.0, LAT, prev_error=0.0, dt=0.01) == 0.0


def test_lateral_two_loop_hand_evaluation():
    # constant 1 m offset: derivative term 0, r = 0.15, delta = 0.6*0.15
    delta = lateral_step(1.0, 0.0, LAT, prev_error=1.0, dt=0.01)
    assert delta == pytest.approx(0.6 * (0.15 * 1.0), rel=1e-12)
    assert delta == pytest.approx(0.09, abs=1e-12)


def test_lateral_counter_steers_against_yaw_rate():
    delta = lateral_step(0.0, 0.2, LAT, prev_error=0.0, dt=0.01)
    assert delta == pytest.approx(-0.12, abs=1e-12)


def test_lateral_saturates_at_steering_limit():
    rng = np.random.default_rng(15)
    for _ in range(300):
        delta = lateral_step(
            float(rng.uniform(-50, 50)),
            float(rng.uniform(-5, 5)),
            LAT,
            prev_error=float(rng.uniform(-50, 50)),
            dt=0.01,
        )
        assert -0.5 <= delta <= 0.5
    assert lateral_step(100.0, 0.0, LAT, prev_error=100.0, dt=0.01) == 0.5
    assert lateral_step(-100.0, 0.0, LAT, prev_error=-100.0, dt=0.01) == -0.5
