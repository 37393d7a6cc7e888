"""Cascaded PD controllers for braking and steering.

Both follow the same two-loop structure: an outer PD loop on position
error produces a rate reference (velocity, or yaw rate), and an inner
proportional loop tracks that reference. The braking side maps the inner
loop's force output onto a normalized brake command; it is brake-only,
so a would-be throttle demand is discarded.
"""

import math
from dataclasses import dataclass, field

from .dynamics import DEFAULT_STEERING_LIMIT
from .errors import InvalidInputError, InvalidParameterError

# Longitudinal gains used throughout the braking experiments.
BRAKING_KP = 0.8
BRAKING_KD = 0.1  # s
BRAKING_K_INNER = 10000.0  # N per (m/s)

# Lateral defaults, tuned for a well-damped 1 m step response of the
# default single-track plant at 8 m/s (small overshoot, ~5 s settling,
# robust to doubled cornering stiffness).
LATERAL_KP = 0.15
LATERAL_KD = 0.3  # s
LATERAL_K_INNER = 0.6  # rad per (rad/s)


@dataclass
class PdGains:
    k_p: float  # outer proportional gain (1/s against position error)
    k_d: float  # outer derivative gain (s)
    k_inner: float  # inner proportional gain

    def __post_init__(self):
        if self.k_p <= 0:
            raise InvalidParameterError(f"k_p must be positive, got {self.k_p}")
        if self.k_d < 0:
            raise InvalidParameterError(f"k_d must be non-negative, got {self.k_d}")
        if self.k_inner <= 0:
            raise InvalidParameterError(f"k_inner must be positive, got {self.k_inner}")


def braking_gains() -> PdGains:
    return PdGains(BRAKING_KP, BRAKING_KD, BRAKING_K_INNER)


def lateral_gains() -> PdGains:
    return PdGains(LATERAL_KP, LATERAL_KD, LATERAL_K_INNER)


@dataclass
class LongitudinalConfig:
    gains: PdGains = field(default_factory=braking_gains)
    safe_offset: float = 5.0  # m subtracted from pedestrian distance
    f_brake_max: float = 8000.0  # N at brake command 1.0
    dt: float = 0.01  # s, controller/plant step
    m: float = 1725.0  # kg, shared with plant

    def __post_init__(self):
        if self.safe_offset <= 0:
            raise InvalidParameterError("safe_offset must be positive")
        if self.f_brake_max <= 0:
            raise InvalidParameterError("f_brake_max must be positive")


@dataclass
class ControllerStepRecord:
    """Every signal of one braking-controller step, vehicle frame."""

    r: float  # reference stop position ahead of the vehicle (m)
    e1: float  # position error (m)
    r_v: float  # reference velocity (m/s)
    e2: float  # velocity error (m/s)
    u: float  # commanded force (N), negative decelerates
    brake_cmd: float  # normalized brake command in [0, 1]


def reference_velocity(e1: float, e1_dot: float, gains: PdGains) -> float:
    """Outer-loop PD law, floored at zero (never commands reverse)."""
    if not (math.isfinite(e1) and math.isfinite(e1_dot)):
        raise InvalidInputError("position error inputs must be finite")
    r_v = gains.k_p * e1 + gains.k_d * e1_dot
    return r_v if r_v > 0.0 else 0.0


def braking_force(e2: float, k_inner: float) -> float:
    """Inner-loop proportional law; negative output means decelerate."""
    if not math.isfinite(e2):
        raise InvalidInputError("velocity error must be finite")
    return k_inner * e2


def force_to_brake_command(u: float, f_brake_max: float) -> float:
    """Map a force demand onto [0, 1]; positive (throttle) demands give 0."""
    if f_brake_max <= 0:
        raise InvalidParameterError("f_brake_max must be positive")
    cmd = -u / f_brake_max
    if cmd < 0.0:
        return 0.0
    if cmd > 1.0:
        return 1.0
    return cmd


def longitudinal_step(
    measured_ped_distance: float, v: float, config: LongitudinalConfig
) -> ControllerStepRecord:
    """One braking-controller step from a (possibly noisy) range measurement.

    The derivative of the position error is taken from the speed sensor
    (e1_dot = -v, stationary pedestrian) rather than by differentiating
    the noisy range signal. A negative measured distance means the
    vehicle is past the pedestrian plane and is treated as distance zero,
    which commands a full stop while moving.
    """
    if not math.isfinite(measured_ped_distance):
        raise InvalidInputError("measured distance must be finite")
    if not math.isfinite(v) or v < 0:
        raise InvalidInputError(f"speed must be finite and non-negative, got {v}")
    distance = measured_ped_distance if measured_ped_distance >= 0.0 else 0.0
    r = distance - config.safe_offset
    e1 = r
    r_v = reference_velocity(e1, -v, config.gains)
    e2 = r_v - v
    u = braking_force(e2, config.gains.k_inner)
    brake_cmd = force_to_brake_command(u, config.f_brake_max)
    return ControllerStepRecord(r=r, e1=e1, r_v=r_v, e2=e2, u=u, brake_cmd=brake_cmd)


def lateral_reference_yaw_rate(
    e1: float, prev_error: float, dt: float, gains: PdGains
) -> float:
    """Outer-loop PD law of the steering controller (no floor; signed)."""
    if dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    return gains.k_p * e1 + gains.k_d * (e1 - prev_error) / dt


def lateral_step(
    lateral_offset_error: float,
    psi_dot: float,
    gains: PdGains,
    prev_error: float,
    dt: float,
    steering_limit: float = DEFAULT_STEERING_LIMIT,
) -> float:
    """One steering-controller step: saturated front wheel angle (rad)."""
    if not (math.isfinite(lateral_offset_error) and math.isfinite(psi_dot)):
        raise InvalidInputError("lateral controller inputs must be finite")
    r_psidot = lateral_reference_yaw_rate(lateral_offset_error, prev_error, dt, gains)
    delta_f = gains.k_inner * (r_psidot - psi_dot)
    if delta_f > steering_limit:
        return steering_limit
    if delta_f < -steering_limit:
        return -steering_limit
    return delta_f
