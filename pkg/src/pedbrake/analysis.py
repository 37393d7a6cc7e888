"""Closed-form stability and tracking analysis of the braking loop.

Everything here works on the drag-free linear model: second-order
closed-loop denominator, Routh-Hurwitz verdict, pole locations, and the
final-value-theorem bound on the inner velocity loop's ramp error. The
clamped/brake-only nonlinearities are validated in simulation instead.
"""

import cmath
import math
from dataclasses import dataclass

from .control import PdGains
from .errors import DegenerateSystemError, InvalidParameterError


@dataclass
class SecondOrderPolynomial:
    """a2 s^2 + a1 s + a0."""

    a2: float
    a1: float
    a0: float

    def __post_init__(self):
        if self.a2 == 0:
            raise DegenerateSystemError("a2 must be nonzero for a second-order system")


@dataclass
class StabilityReport:
    coefficients: SecondOrderPolynomial
    stable: bool
    poles: tuple[complex, complex]  # 1/s
    natural_frequency: float  # rad/s
    damping_ratio: float


def closed_loop_denominator(gains: PdGains, m: float) -> SecondOrderPolynomial:
    """Denominator of the reference-to-position closed-loop transfer function.

    m s^2 + K K_d s + K (1 + K_p), with K the inner gain.
    """
    if m <= 0:
        raise InvalidParameterError(f"mass must be positive, got {m}")
    k = gains.k_inner
    return SecondOrderPolynomial(m, k * gains.k_d, k * (1.0 + gains.k_p))


def routh_hurwitz_stable(p: SecondOrderPolynomial) -> bool:
    """Second-order criterion: stable iff all coefficients strictly positive.

    Marginal systems (a zero coefficient) are reported not stable.
    """
    a2, a1, a0 = p.a2, p.a1, p.a0
    if a2 < 0:  # normalize sign so the strict-positivity test applies
        a2, a1, a0 = -a2, -a1, -a0
    return a1 > 0 and a0 > 0


def closed_loop_poles(p: SecondOrderPolynomial) -> tuple[complex, complex]:
    """Roots of the quadratic, returned as complex numbers."""
    disc = cmath.sqrt(complex(p.a1 * p.a1 - 4.0 * p.a2 * p.a0))
    return (
        (-p.a1 - disc) / (2.0 * p.a2),
        (-p.a1 + disc) / (2.0 * p.a2),
    )


def stability_report(p: SecondOrderPolynomial) -> StabilityReport:
    poles = closed_loop_poles(p)
    stable = routh_hurwitz_stable(p)
    # Verdict and pole signs must agree; keep the equivalence hard.
    assert stable == (max(pole.real for pole in poles) < 0), (p, poles)
    omega_n = math.sqrt(abs(p.a0 / p.a2))
    zeta = p.a1 / (2.0 * math.sqrt(p.a0 * p.a2)) if p.a0 * p.a2 > 0 else math.nan
    return StabilityReport(p, stable, poles, omega_n, zeta)


def analyze_gains(gains: PdGains, m: float) -> StabilityReport:
    return stability_report(closed_loop_denominator(gains, m))


def ramp_error_bound(m: float, k_inner: float, ramp_slope: float) -> float:
    """Steady-state velocity error of the inner loop under a ramp reference.

    Final value theorem on the velocity-loop sensitivity ms/(ms + K)
    driven by slope/s^2: e2_ss = slope * m / K.
    """
    if m <= 0 or k_inner <= 0:
        raise InvalidParameterError("mass and inner gain must be positive")
    return ramp_slope * m / k_inner


def simulate_inner_loop_ramp(
    m: float, k_inner: float, ramp_slope: float, dt: float = 0.001, horizon: float = 30.0
) -> float:
    """Time-domain velocity error of the inner loop at the end of a ramp run.

    Integrates m v' = K (slope*t - v) with RK4, evaluating the reference
    inside the stages, and returns e2(horizon). Used to confirm the
    final-value-theorem bound against the actual loop.
    """
    if m <= 0 or k_inner <= 0:
        raise InvalidParameterError("mass and inner gain must be positive")
    n = int(round(horizon / dt))
    v = 0.0
    for i in range(n):
        t = i * dt

        def dv(vv, tt):
            return k_inner * (ramp_slope * tt - vv) / m

        k1 = dv(v, t)
        k2 = dv(v + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = dv(v + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = dv(v + dt * k3, t + dt)
        v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return ramp_slope * (n * dt) - v
