"""Scalar/array kernels shared by the whole package.

Everything numeric that runs inside the per-step simulation loop lives
here: arc-tip geometry, the four-tendon allocation and its least-squares
decode, the motor servo update and encoder rounding. The public modules
(:mod:`tjsim.kinematics`, :mod:`tjsim.tendon`, :mod:`tjsim.actuation`,
:mod:`tjsim.sim`) are thin wrappers over these functions, so the library
surface and the stepped loop always agree bit-for-bit.

All functions are valid plain Python and compile unchanged under numba
(see :mod:`tjsim._accel`).
"""

import math

import numpy as np

from ._accel import njit

TWO_PI = 2.0 * math.pi

# Series branch for (1 - cos t)/t and sin t/t; keeps the arc map C1 through
# the straight configuration.
SMALL_THETA = 1e-7


@njit
def wrap_angle(phi):
    w = phi % TWO_PI
    if w < 0.0:
        w += TWO_PI
    if w >= TWO_PI:
        w -= TWO_PI
    return w


@njit
def arc_coeffs(theta):
    """A = (1 - cos t)/t and B = sin t/t, series-expanded near t = 0."""
    if abs(theta) < SMALL_THETA:
        a = 0.5 * theta - theta * theta * theta / 24.0
        b = 1.0 - theta * theta / 6.0
    else:
        a = (1.0 - math.cos(theta)) / theta
        b = math.sin(theta) / theta
    return a, b


@njit
def tip_position(theta, phi, arc_length):
    """Tip of a constant-curvature arc, base frame, mm."""
    a, b = arc_coeffs(theta)
    r = arc_length * a
    return r * math.cos(phi), r * math.sin(phi), arc_length * b


@njit
def tip_jacobian_cols(theta, phi, arc_length):
    """Partials of the tip position w.r.t. (theta, phi), as two 3-vectors
    packed into a flat (6,) array: [dp/dtheta, dp/dphi]."""
    if abs(theta) < SMALL_THETA:
        a = 0.5 * theta - theta * theta * theta / 24.0
        ap = 0.5 - theta * theta / 8.0
        bp = -theta / 3.0 + theta * theta * theta / 30.0
    else:
        a = (1.0 - math.cos(theta)) / theta
        ap = (theta * math.sin(theta) - (1.0 - math.cos(theta))) / (theta * theta)
        bp = (theta * math.cos(theta) - math.sin(theta)) / (theta * theta)
    cp = math.cos(phi)
    sp = math.sin(phi)
    out = np.empty(6)
    out[0] = arc_length * ap * cp
    out[1] = arc_length * ap * sp
    out[2] = arc_length * bp
    out[3] = -arc_length * a * sp
    out[4] = arc_length * a * cp
    out[5] = 0.0
    return out


@njit
def allocate4(theta, phi, pitch_radius, beta, out):
    """Paired-tendon displacements for a bend command, negative = pulled."""
    for i in range(4):
        out[i] = -pitch_radius * theta * math.cos(beta[i] - phi)


@njit
def deallocate4(dl, pitch_radius):
    """Least-squares bend decode of four displacements.

    Returns (theta, phi, residual_mm); phi = 0 below the straightness
    threshold, residual is the per-pair coupling violation.
    """
    a = (dl[2] - dl[0]) / (2.0 * pitch_radius)
    b = (dl[3] - dl[1]) / (2.0 * pitch_radius)
    theta = math.hypot(a, b)
    if theta < 1e-9:
        phi = 0.0
    else:
        phi = wrap_angle(math.atan2(b, a))
    r0 = abs(dl[0] + dl[2])
    r1 = abs(dl[1] + dl[3])
    resid = (r0 if r0 > r1 else r1) / 2.0
    return theta, phi, resid


@njit
def motor_update(actual, integ, target, kp, ki, kd, vmax, dt):
    """One servo step: PID on spool-angle error -> saturated velocity ->
    explicit-Euler position update. Returns (actual, integ, velocity).

    The derivative term acts on the measured spool rate and is folded in
    implicitly (backward Euler), which keeps the default gains stable for
    every dt in (0, 0.1]; an explicit one-step derivative is divergent
    there.
    """
    err = target - actual
    integ = integ + err * dt
    v = (kp * err + ki * integ) / (1.0 + kd)
    if v > vmax:
        v = vmax
    elif v < -vmax:
        v = -vmax
    actual = actual + v * dt
    return actual, integ, v


@njit
def encoder_counts(angle, counts_per_rev):
    """Quantize a spool angle to encoder counts (round half to even)."""
    return np.rint(angle / TWO_PI * counts_per_rev)


@njit
def run_steps(
    theta_cmd,
    phi_cmd,
    dt,
    actual,
    integ,
    vel,
    pitch_radius,
    beta,
    spool_radius,
    counts_per_rev,
    kp,
    ki,
    kd,
    vmax,
    arc_length,
    frozen,
    frozen_targets,
    out_theta_cmd,
    out_phi_cmd,
    out_dl_cmd,
    out_targets,
    out_actual,
    out_vel,
    out_integ,
    out_enc,
    out_dl_act,
    out_theta_act,
    out_phi_act,
    out_resid,
    out_tip,
):
    """Advance the joint len(theta_cmd) steps.

    The motor state arrays (actual, integ, vel) are updated in place;
    everything else is written per step into the out_* arrays. When
    ``frozen`` is set (e-stop latch) the commanded trajectory is ignored
    and the supplied spool targets are held, so the motors sit still and
    the reported command stays constant.
    """
    n = theta_cmd.shape[0]
    for k in range(n):
        if frozen:
            for i in range(4):
                tgt = frozen_targets[i]
                out_targets[k, i] = tgt
                out_dl_cmd[k, i] = tgt * spool_radius
            th_c, ph_c, _ = deallocate4(out_dl_cmd[k], pitch_radius)
            out_theta_cmd[k] = th_c
            out_phi_cmd[k] = ph_c
        else:
            for i in range(4):
                dl = -pitch_radius * theta_cmd[k] * math.cos(beta[i] - phi_cmd[k])
                out_dl_cmd[k, i] = dl
                out_targets[k, i] = dl / spool_radius
            out_theta_cmd[k] = theta_cmd[k]
            out_phi_cmd[k] = phi_cmd[k]
        for i in range(4):
            a, integ_i, v = motor_update(
                actual[i], integ[i], out_targets[k, i], kp, ki, kd, vmax, dt
            )
            actual[i] = a
            integ[i] = integ_i
            vel[i] = v
            out_actual[k, i] = a
            out_vel[k, i] = v
            out_integ[k, i] = integ_i
            cnt = encoder_counts(a, counts_per_rev)
            out_enc[k, i] = cnt
            out_dl_act[k, i] = cnt / counts_per_rev * TWO_PI * spool_radius
        th, ph, res = deallocate4(out_dl_act[k], pitch_radius)
        out_theta_act[k] = th
        out_phi_act[k] = ph
        out_resid[k] = res
        x, y, z = tip_position(th, ph, arc_length)
        out_tip[k, 0] = x
        out_tip[k, 1] = y
        out_tip[k, 2] = z
