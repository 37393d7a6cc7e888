# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirrors loop_py.py operation-for-operation; together with
-ffp-contract=off this keeps the two backends bit-identical. Any change
here must be made in loop_py.py as well (and vice versa).
"""

from libc.math cimport fabs, sin, cos, NAN

BACKEND_NAME = "compiled"


def run_braking_loop(
    double ped_distance, double v0, double dt, int n_steps,
    double m, double drag_c,
    double kp, double kd, double k_inner, double safe_offset, double f_brake_max,
    double stop_speed_eps, double stop_brake_eps,
    bint noise_enabled, double dropout_prob, double outlier_prob, double outlier_sigma,
    double sigma0, double sigma_slope, double min_range, int detection_every,
    double[::1] u_drop, double[::1] u_out, double[::1] z,
    double[::1] out_t, double[::1] out_x, double[::1] out_v,
    double[::1] out_ped_true, double[::1] out_ped_meas,
    double[::1] out_r, double[::1] out_e1, double[::1] out_rv,
    double[::1] out_e2, double[::1] out_u, double[::1] out_brake,
):
    """Closed-loop braking simulation; see loop_py.run_braking_loop."""
    cdef double x = 0.0
    cdef double v = v0
    cdef double held = NAN
    cdef bint converged = False
    cdef int n_rows = 0
    cdef int k
    cdef double true_d, meas, value, distance, e1, rv, e2, u, brake, force

    for k in range(n_steps + 1):
        true_d = ped_distance - x

        meas = NAN
        if k % detection_every == 0:
            if noise_enabled:
                if u_drop[k] >= dropout_prob:
                    if u_out[k] < outlier_prob:
                        value = true_d + z[k] * outlier_sigma
                    else:
                        value = true_d + z[k] * (sigma0 + sigma_slope * true_d)
                    meas = value if value > min_range else min_range
            else:
                meas = true_d
        if meas == meas:
            held = meas

        if held == held:
            distance = held if held >= 0.0 else 0.0
            e1 = distance - safe_offset
            rv = kp * e1 + kd * (-v)
            if rv <= 0.0:
                rv = 0.0
            e2 = rv - v
            u = k_inner * e2
            brake = -u / f_brake_max
            if brake < 0.0:
                brake = 0.0
            elif brake > 1.0:
                brake = 1.0
        else:
            e1 = NAN
            rv = NAN
            e2 = NAN
            u = 0.0
            brake = 0.0

        out_t[k] = k * dt
        out_x[k] = x
        out_v[k] = v
        out_ped_true[k] = true_d
        out_ped_meas[k] = meas
        out_r[k] = x + e1
        out_e1[k] = e1
        out_rv[k] = rv
        out_e2[k] = e2
        out_u[k] = u
        out_brake[k] = brake
        n_rows = k + 1

        if v <= stop_speed_eps and brake <= stop_brake_eps:
            converged = True
            break
        if k == n_steps:
            break

        force = -brake * f_brake_max
        x, v = _step_long(x, v, force, m, drag_c, dt)

    return n_rows, converged


cdef inline double _long_accel(double v, double force, double m, double drag_c):
    return (force + -drag_c * v * fabs(v)) / m


cdef (double, double) _rk4_long(double x, double v, double force,
                                double m, double drag_c, double dt):
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v, x1, v1
    k1x = v
    k1v = _long_accel(v, force, m, drag_c)
    k2x = v + 0.5 * dt * k1v
    k2v = _long_accel(v + 0.5 * dt * k1v, force, m, drag_c)
    k3x = v + 0.5 * dt * k2v
    k3v = _long_accel(v + 0.5 * dt * k2v, force, m, drag_c)
    k4x = v + dt * k3v
    k4v = _long_accel(v + dt * k3v, force, m, drag_c)
    x1 = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v1 = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return x1, v1


cdef (double, double) _step_long(double x, double v, double force,
                                 double m, double drag_c, double dt):
    cdef double x1, v1, tau
    x1, v1 = _rk4_long(x, v, force, m, drag_c, dt)
    if v1 < 0.0:
        tau = dt * v / (v - v1)
        if tau > 0.0:
            x1, v1 = _rk4_long(x, v, force, m, drag_c, tau)
        else:
            x1 = x
        v1 = 0.0
    return x1, v1


def run_lateral_loop(
    double vy0, double r0, double psi0, double y0, double dt, int n_steps,
    double a11, double a12, double a21, double a22,
    double b1, double b2, double mz_term, double v_x,
    double kp, double kd, double k_inner, double steer_limit,
    double[::1] y_ref,
    double diverge_limit,
    double[::1] out_t, double[::1] out_y, double[::1] out_psi,
    double[::1] out_psidot, double[::1] out_vy,
    double[::1] out_rref, double[::1] out_delta,
):
    """Closed-loop lateral simulation; see loop_py.run_lateral_loop."""
    cdef double v_y = vy0
    cdef double psi_dot = r0
    cdef double psi = psi0
    cdef double y = y0
    cdef double prev_e = y_ref[0] - y0
    cdef bint diverged = False
    cdef int n_rows = 0
    cdef int k
    cdef double e1, rref, delta

    for k in range(n_steps + 1):
        e1 = y_ref[k] - y
        rref = kp * e1 + kd * (e1 - prev_e) / dt
        prev_e = e1
        delta = k_inner * (rref - psi_dot)
        if delta > steer_limit:
            delta = steer_limit
        elif delta < -steer_limit:
            delta = -steer_limit

        out_t[k] = k * dt
        out_y[k] = y
        out_psi[k] = psi
        out_psidot[k] = psi_dot
        out_vy[k] = v_y
        out_rref[k] = rref
        out_delta[k] = delta
        n_rows = k + 1

        if fabs(y) > diverge_limit:
            diverged = True
            break
        if k == n_steps:
            break

        v_y, psi_dot, psi, y = _rk4_lat(
            v_y, psi_dot, psi, y, delta,
            a11, a12, a21, a22, b1, b2, mz_term, v_x, dt,
        )

    return n_rows, diverged


cdef (double, double, double, double) _lat_deriv(
        double v_y, double psi_dot, double psi, double delta,
        double a11, double a12, double a21, double a22,
        double b1, double b2, double mz_term, double v_x):
    cdef double dvy = a11 * v_y + a12 * psi_dot + b1 * delta
    cdef double dr = a21 * v_y + a22 * psi_dot + b2 * delta + mz_term
    cdef double dpsi = psi_dot
    cdef double dy = v_x * sin(psi) + v_y * cos(psi)
    return dvy, dr, dpsi, dy


cdef (double, double, double, double) _rk4_lat(
        double v_y, double psi_dot, double psi, double y, double delta,
        double a11, double a12, double a21, double a22,
        double b1, double b2, double mz_term, double v_x, double dt):
    cdef (double, double, double, double) k1, k2, k3, k4
    cdef double v_y1, psi_dot1, psi1, y1
    k1 = _lat_deriv(v_y, psi_dot, psi, delta,
                    a11, a12, a21, a22, b1, b2, mz_term, v_x)
    k2 = _lat_deriv(v_y + 0.5 * dt * k1[0], psi_dot + 0.5 * dt * k1[1],
                    psi + 0.5 * dt * k1[2], delta,
                    a11, a12, a21, a22, b1, b2, mz_term, v_x)
    k3 = _lat_deriv(v_y + 0.5 * dt * k2[0], psi_dot + 0.5 * dt * k2[1],
                    psi + 0.5 * dt * k2[2], delta,
                    a11, a12, a21, a22, b1, b2, mz_term, v_x)
    k4 = _lat_deriv(v_y + dt * k3[0], psi_dot + dt * k3[1],
                    psi + dt * k3[2], delta,
                    a11, a12, a21, a22, b1, b2, mz_term, v_x)
    v_y1 = v_y + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    psi_dot1 = psi_dot + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    psi1 = psi + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    y1 = y + dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    return v_y1, psi_dot1, psi1, y1
