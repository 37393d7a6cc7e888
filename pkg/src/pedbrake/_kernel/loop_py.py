"""Pure-Python simulation kernels (fallback backend).

These loops are the reference implementation of the closed-loop steppers.
The compiled backend (_loop_cy) mirrors them operation-for-operation so
both produce bit-identical trajectories; keep the arithmetic in the two
files in sync.

All randomness is pre-drawn by the caller: the kernels are deterministic
functions of their argument arrays.
"""

import math

BACKEND_NAME = "python"


def run_braking_loop(
    ped_distance, v0, dt, n_steps,
    m, drag_c,
    kp, kd, k_inner, safe_offset, f_brake_max,
    stop_speed_eps, stop_brake_eps,
    noise_enabled, dropout_prob, outlier_prob, outlier_sigma,
    sigma0, sigma_slope, min_range, detection_every,
    u_drop, u_out, z,
    out_t, out_x, out_v, out_ped_true, out_ped_meas,
    out_r, out_e1, out_rv, out_e2, out_u, out_brake,
):
    """Closed-loop braking simulation; fills the row arrays.

    Row k holds the state at t = k*dt and the controller signals computed
    from it. Terminates once the vehicle is at rest with the brake
    released (within the eps thresholds), or at the horizon.

    Returns (n_rows, converged).
    """
    nan = math.nan
    x = 0.0
    v = v0
    held = nan  # last successful range measurement (zero-order hold)
    converged = False
    n_rows = 0

    for k in range(n_steps + 1):
        true_d = ped_distance - x

        meas = nan
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
        if meas == meas:  # not NaN
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
            e1 = nan
            rv = nan
            e2 = nan
            u = 0.0
            brake = 0.0

        out_t[k] = k * dt
        out_x[k] = x
        out_v[k] = v
        out_ped_true[k] = true_d
        out_ped_meas[k] = meas
        out_r[k] = x + e1  # stop point in world frame (NaN before first detection)
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


def _long_accel(v, force, m, drag_c):
    return (force + -drag_c * v * abs(v)) / m


def _rk4_long(x, v, force, m, drag_c, dt):
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


def _step_long(x, v, force, m, drag_c, dt):
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
    vy0, r0, psi0, y0, dt, n_steps,
    a11, a12, a21, a22, b1, b2, mz_term, v_x,
    kp, kd, k_inner, steer_limit,
    y_ref,
    diverge_limit,
    out_t, out_y, out_psi, out_psidot, out_vy, out_rref, out_delta,
):
    """Closed-loop lateral step/tracking simulation; fills the row arrays.

    Returns (n_rows, diverged).
    """
    v_y = vy0
    psi_dot = r0
    psi = psi0
    y = y0
    prev_e = y_ref[0] - y0  # derivative term starts at zero
    diverged = False
    n_rows = 0

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

        if abs(y) > diverge_limit:
            diverged = True
            break
        if k == n_steps:
            break

        v_y, psi_dot, psi, y = _rk4_lat(
            v_y, psi_dot, psi, y, delta,
            a11, a12, a21, a22, b1, b2, mz_term, v_x, dt,
        )

    return n_rows, diverged


def _lat_deriv(v_y, psi_dot, psi, delta, a11, a12, a21, a22, b1, b2, mz_term, v_x):
    dvy = a11 * v_y + a12 * psi_dot + b1 * delta
    dr = a21 * v_y + a22 * psi_dot + b2 * delta + mz_term
    dpsi = psi_dot
    dy = v_x * math.sin(psi) + v_y * math.cos(psi)
    return dvy, dr, dpsi, dy


def _rk4_lat(v_y, psi_dot, psi, y, delta,
             a11, a12, a21, a22, b1, b2, mz_term, v_x, dt):
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
