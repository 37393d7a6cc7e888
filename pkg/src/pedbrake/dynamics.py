"""Continuous-time plant models and the fixed-step integrator.

Longitudinal: point mass driven by a (braking) force, optional quadratic
aerodynamic drag. Lateral: linear single-track yaw-plane model in
(v_y, psi_dot) extended with planar kinematics for heading and lateral
position.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ConfigurationError, InvalidInputError, InvalidParameterError

MAX_STEP = 0.1  # s, guard against grossly under-resolved integration
DEFAULT_STEERING_LIMIT = 0.5  # rad


@dataclass
class LongitudinalState:
    x: float  # position along travel axis (m)
    v: float  # forward speed (m/s)

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.v)):
            raise InvalidInputError("longitudinal state must be finite")


@dataclass
class LongitudinalParams:
    m: float = 1725.0  # vehicle mass (kg)
    drag_enabled: bool = True
    rho: float = 1.225  # air density (kg/m^3)
    c_d: float = 0.3  # drag coefficient
    area: float = 2.2  # frontal area (m^2)

    def __post_init__(self):
        if self.m <= 0:
            raise InvalidParameterError(f"mass must be positive, got {self.m}")
        if self.rho < 0 or self.c_d < 0 or self.area < 0:
            raise InvalidParameterError("drag parameters must be non-negative")


@dataclass
class LateralState:
    v_y: float = 0.0  # lateral velocity (m/s)
    psi_dot: float = 0.0  # yaw rate (rad/s)
    psi: float = 0.0  # heading angle (rad)
    y: float = 0.0  # lateral position (m)

    def __post_init__(self):
        vals = (self.v_y, self.psi_dot, self.psi, self.y)
        if not all(math.isfinite(f) for f in vals):
            raise InvalidInputError("lateral state must be finite")


@dataclass
class LateralParams:
    """Single-track yaw-plane parameters.

    The cornering stiffnesses and geometry default to typical mid-size
    sedan values consistent with the 1725 kg mass; all are configurable.
    Construction rejects parameter sets whose open-loop yaw plane is not
    strictly stable (trace/determinant test on the 2x2 system matrix).
    """

    c_f: float = 80000.0  # front axle cornering stiffness (N/rad)
    c_r: float = 80000.0  # rear axle cornering stiffness (N/rad)
    l_f: float = 1.2  # front axle to center of mass (m)
    l_r: float = 1.6  # rear axle to center of mass (m)
    m: float = 1725.0  # mass (kg)
    i_z: float = 2500.0  # yaw inertia (kg m^2)
    v_x: float = 8.0  # longitudinal speed (m/s)
    m_z: float = 0.0  # external yaw torque (N m)

    def __post_init__(self):
        positive = {
            "c_f": self.c_f, "c_r": self.c_r, "l_f": self.l_f,
            "l_r": self.l_r, "m": self.m, "i_z": self.i_z,
        }
        for name, val in positive.items():
            if val <= 0:
                raise InvalidParameterError(f"{name} must be positive, got {val}")
        if self.v_x <= 0:
            raise InvalidParameterError(
                f"v_x must be positive (model divides by it), got {self.v_x}"
            )
        a11, a12, a21, a22 = self.yaw_plane_matrix()
        trace = a11 + a22
        det = a11 * a22 - a12 * a21
        if not (trace < 0 and det > 0):
            raise InvalidParameterError(
                "open-loop yaw plane is not stable for these parameters "
                f"(trace={trace:.4g}, det={det:.4g})"
            )

    def yaw_plane_matrix(self) -> tuple[float, float, float, float]:
        """Row-major entries of the 2x2 system matrix acting on (v_y, psi_dot)."""
        a11 = -(self.c_r + self.c_f) / (self.m * self.v_x)
        a12 = (self.c_r * self.l_r - self.c_f * self.l_f) / (self.m * self.v_x) - self.v_x
        a21 = (self.c_r * self.l_r - self.c_f * self.l_f) / (self.i_z * self.v_x)
        a22 = -(self.c_r * self.l_r ** 2 + self.c_f * self.l_f ** 2) / (self.i_z * self.v_x)
        return a11, a12, a21, a22

    def steering_input_column(self) -> tuple[float, float]:
        return self.c_f / self.m, self.c_f * self.l_f / self.i_z


def drag_force(v: float, params: LongitudinalParams) -> float:
    """Quadratic aerodynamic drag, always opposing motion."""
    if not params.drag_enabled:
        return 0.0
    return -0.5 * params.rho * params.c_d * params.area * v * abs(v)


def longitudinal_derivative(
    state: LongitudinalState, force: float, params: LongitudinalParams
) -> tuple[float, float]:
    """(dx/dt, dv/dt) for the point-mass plant; force < 0 is braking."""
    if not math.isfinite(force):
        raise InvalidInputError(f"force must be finite, got {force}")
    return state.v, (force + drag_force(state.v, params)) / params.m


def lateral_derivative(
    state: LateralState,
    delta_f: float,
    params: LateralParams,
    steering_limit: float = DEFAULT_STEERING_LIMIT,
) -> tuple[float, float, float, float]:
    """(dv_y/dt, dpsi_dot/dt, dpsi/dt, dy/dt) of the extended single-track model."""
    if not math.isfinite(delta_f):
        raise InvalidInputError(f"steering angle must be finite, got {delta_f}")
    if abs(delta_f) > steering_limit:
        raise InvalidInputError(
            f"steering angle {delta_f} exceeds limit {steering_limit}"
        )
    a11, a12, a21, a22 = params.yaw_plane_matrix()
    b1, b2 = params.steering_input_column()
    dv_y = a11 * state.v_y + a12 * state.psi_dot + b1 * delta_f
    dpsi_dot = a21 * state.v_y + a22 * state.psi_dot + b2 * delta_f + params.m_z / params.i_z
    dpsi = state.psi_dot
    dy = params.v_x * math.sin(state.psi) + state.v_y * math.cos(state.psi)
    return dv_y, dpsi_dot, dpsi, dy


def integrate_step(
    state: Sequence[float],
    dt: float,
    derivative: Callable[[Sequence[float]], Sequence[float]],
) -> tuple[float, ...]:
    """One classical 4th-order Runge-Kutta step of an autonomous system."""
    if not 0.0 < dt <= MAX_STEP:
        raise ConfigurationError(f"dt must be in (0, {MAX_STEP}] s, got {dt}")
    return _rk4(tuple(state), dt, derivative)


def _rk4(state, dt, derivative):
    k1 = derivative(state)
    k2 = derivative(tuple(s + 0.5 * dt * k for s, k in zip(state, k1)))
    k3 = derivative(tuple(s + 0.5 * dt * k for s, k in zip(state, k2)))
    k4 = derivative(tuple(s + dt * k for s, k in zip(state, k3)))
    return tuple(
        s + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        for s, a, b, c, d in zip(state, k1, k2, k3, k4)
    )


def step_longitudinal(
    state: LongitudinalState,
    force: float,
    params: LongitudinalParams,
    dt: float,
) -> LongitudinalState:
    """Advance the longitudinal plant one step under a constant force.

    Brake-only semantics: if the step would carry the speed below zero,
    the state is re-integrated up to the zero crossing and held at rest
    there (braking cannot reverse the vehicle).
    """

    def deriv(s):
        return longitudinal_derivative(LongitudinalState(s[0], s[1]), force, params)

    x1, v1 = integrate_step((state.x, state.v), dt, deriv)
    if v1 < 0.0:
        # Linear-in-time crossing estimate; exact under constant acceleration,
        # where RK4 itself is exact.
        tau = dt * state.v / (state.v - v1)
        if tau > 0.0:
            x1, _ = _rk4((state.x, state.v), tau, deriv)
        else:
            x1 = state.x
        v1 = 0.0
    return LongitudinalState(x1, v1)


def step_lateral(
    state: LateralState,
    delta_f: float,
    params: LateralParams,
    dt: float,
    steering_limit: float = DEFAULT_STEERING_LIMIT,
) -> LateralState:
    """Advance the lateral plant one step under a constant steering angle."""

    def deriv(s):
        return lateral_derivative(
            LateralState(s[0], s[1], s[2], s[3]), delta_f, params, steering_limit
        )

    nxt = integrate_step((state.v_y, state.psi_dot, state.psi, state.y), dt, deriv)
    return LateralState(*nxt)
