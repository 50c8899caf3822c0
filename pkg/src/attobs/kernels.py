"""Hot inner loops: truth integration and observer integration.

Everything here is written against the numba-compatible numpy subset and
compiled with ``@njit`` unless ATTOBS_DISABLE_NUMBA is set, in which case
the same code runs interpreted (see benchmarks/bench_kernels.py for the
speed difference). State layouts follow the rest of the package:

* truth state  x = (q[4], omega[3]), quaternion scalar-first
* observer state X = (b_hat[3], l_hat[3], q_hat[4])

Status codes returned by the run kernels: 0 ok, 1 non-finite state,
2 degenerate (near-zero) noisy direction measurement.
"""

import math

import numpy as np

from ._jit import jit_kernel

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_DEGENERATE = 2

TORQUE_SINUSOID = 0
TORQUE_ZERO = 1
TORQUE_CONSTANT = 2

# observer variants (CLI numbering)
VARIANT_MOMENTUM = 1
VARIANT_COMPLEMENTARY = 2
VARIANT_FUSED_TRUE_ATTITUDE = 3
VARIANT_FUSED = 4


@jit_kernel
def _cross(a, b):
    out = np.empty(3)
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]
    return out


@jit_kernel
def _mat_vec(m, v):
    out = np.empty(3)
    for i in range(3):
        out[i] = m[i, 0] * v[0] + m[i, 1] * v[1] + m[i, 2] * v[2]
    return out


@jit_kernel
def _mat_t_vec(m, v):
    out = np.empty(3)
    for i in range(3):
        out[i] = m[0, i] * v[0] + m[1, i] * v[1] + m[2, i] * v[2]
    return out


@jit_kernel
def _mat_mat(a, b):
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j] + a[i, 2] * b[2, j]
    return out


@jit_kernel
def _quat_to_rot(q):
    w, x, y, z = q[0], q[1], q[2], q[3]
    out = np.empty((3, 3))
    out[0, 0] = w * w + x * x - y * y - z * z
    out[0, 1] = 2.0 * (x * y - w * z)
    out[0, 2] = 2.0 * (x * z + w * y)
    out[1, 0] = 2.0 * (x * y + w * z)
    out[1, 1] = w * w - x * x + y * y - z * z
    out[1, 2] = 2.0 * (y * z - w * x)
    out[2, 0] = 2.0 * (x * z - w * y)
    out[2, 1] = 2.0 * (y * z + w * x)
    out[2, 2] = w * w - x * x - y * y + z * z
    return out


@jit_kernel
def _quat_rate(q, w):
    # 0.5 * Q(q) @ (0, w)
    out = np.empty(4)
    out[0] = 0.5 * (-q[1] * w[0] - q[2] * w[1] - q[3] * w[2])
    out[1] = 0.5 * (q[0] * w[0] + q[2] * w[2] - q[3] * w[1])
    out[2] = 0.5 * (q[0] * w[1] - q[1] * w[2] + q[3] * w[0])
    out[3] = 0.5 * (q[0] * w[2] + q[1] * w[1] - q[2] * w[0])
    return out


@jit_kernel
def _torque_at(kind, const, t):
    out = np.empty(3)
    if kind == TORQUE_SINUSOID:
        out[0] = math.sin(t + 1.0)
        out[1] = math.sin(2.0 * t + 2.0)
        out[2] = math.sin(3.0 * t + 3.0)
    elif kind == TORQUE_ZERO:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
    else:
        out[0] = const[0]
        out[1] = const[1]
        out[2] = const[2]
    return out


@jit_kernel
def _rigid_deriv(x, tau, j, jinv):
    q = x[:4]
    w = x[4:]
    out = np.empty(7)
    out[:4] = _quat_rate(q, w)
    jw = _mat_vec(j, w)
    out[4:] = _mat_vec(jinv, _cross(jw, w) + tau)
    return out


@jit_kernel
def truth_rk4(x0, j, jinv, tau_kind, tau_const, h, n_steps):
    """Integrate the rigid body; returns ((n_steps+1, 7) states, bad_step)."""
    out = np.empty((n_steps + 1, 7))
    out[0] = x0
    x = x0.copy()
    for i in range(n_steps):
        t = i * h
        k1 = _rigid_deriv(x, _torque_at(tau_kind, tau_const, t), j, jinv)
        k2 = _rigid_deriv(x + 0.5 * h * k1, _torque_at(tau_kind, tau_const, t + 0.5 * h), j, jinv)
        k3 = _rigid_deriv(x + 0.5 * h * k2, _torque_at(tau_kind, tau_const, t + 0.5 * h), j, jinv)
        k4 = _rigid_deriv(x + h * k3, _torque_at(tau_kind, tau_const, t + h), j, jinv)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        qn = math.sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
        x[:4] /= qn
        s = 0.0
        for c in range(7):
            s += x[c]
        if not math.isfinite(s):
            return out, i
        out[i + 1] = x
    return out, -1


@jit_kernel
def observer_ode(variant, x, y0, ys, tau, vs, ks, minv, j, jinv, k_r, k_l, k_a, k_b, alpha, r_true):
    """Continuous-time derivative of one observer variant.

    ``r_true`` is only read by variant 3 (analysis observer that keeps
    access to the true attitude); the other variants reconstruct the
    attitude from the direction measurements where they need it.
    """
    bh = x[:3]
    lh = x[3:6]
    qh = x[6:]
    e = _quat_to_rot(qh)
    n = vs.shape[0]

    rt = np.zeros(3)
    for i in range(n):
        rt += ks[i] * _cross(_mat_t_vec(e, vs[i]), ys[i])

    # algebraic attitude reconstruction from the direction measurements
    acc = np.zeros((3, 3))
    for i in range(n):
        for a in range(3):
            for c in range(3):
                acc[a, c] += ks[i] * vs[i][a] * ys[i][c]
    if variant == VARIANT_FUSED_TRUE_ATTITUDE:
        rbar = r_true
    else:
        rbar = _mat_mat(minv, acc)

    out = np.empty(10)
    if variant == VARIANT_MOMENTUM:
        out[:3] = 0.0
        u = _mat_vec(jinv, _mat_t_vec(rbar, lh)) - k_r * rt
        out[3:6] = _mat_vec(rbar, tau) - k_l * _mat_vec(rbar, _mat_vec(jinv, rt))
    elif variant == VARIANT_COMPLEMENTARY:
        out[:3] = k_b * rt
        u = y0 - bh - k_r * rt
        out[3:6] = 0.0
    else:
        dl = _mat_t_vec(rbar, lh) - _mat_vec(j, y0 - bh)
        out[:3] = k_b * rt - (alpha * k_b * k_a) * _mat_vec(j, dl)
        u = alpha * _mat_vec(jinv, dl) + y0 - bh - k_r * rt
        out[3:6] = _mat_vec(rbar, tau - k_l * _mat_vec(jinv, rt) - ((1.0 - alpha) * k_l * k_a) * dl)
    out[6:] = _quat_rate(qh, u)
    return out


@jit_kernel
def _observer_rk4(variant, x, h, y0_a, ys_a, y0_m, ys_m, y0_b, ys_b, tau_a, tau_m, tau_b,
                  vs, ks, minv, j, jinv, k_r, k_l, k_a, k_b, alpha, r_a, r_m, r_b):
    k1 = observer_ode(variant, x, y0_a, ys_a, tau_a, vs, ks, minv, j, jinv,
                      k_r, k_l, k_a, k_b, alpha, r_a)
    k2 = observer_ode(variant, x + 0.5 * h * k1, y0_m, ys_m, tau_m, vs, ks, minv, j, jinv,
                      k_r, k_l, k_a, k_b, alpha, r_m)
    k3 = observer_ode(variant, x + 0.5 * h * k2, y0_m, ys_m, tau_m, vs, ks, minv, j, jinv,
                      k_r, k_l, k_a, k_b, alpha, r_m)
    k4 = observer_ode(variant, x + h * k3, y0_b, ys_b, tau_b, vs, ks, minv, j, jinv,
                      k_r, k_l, k_a, k_b, alpha, r_b)
    xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    qn = math.sqrt(xn[6] * xn[6] + xn[7] * xn[7] + xn[8] * xn[8] + xn[9] * xn[9])
    xn[6:] /= qn
    return xn


@jit_kernel
def _exact_outputs(truth_row, b, vs):
    """Noise-free outputs (y0, y_i) at one truth sample."""
    q = truth_row[:4]
    w = truth_row[4:]
    r = _quat_to_rot(q)
    y0 = w + b
    n = vs.shape[0]
    ys = np.empty((n, 3))
    for i in range(n):
        ys[i] = _mat_t_vec(r, vs[i])
    return y0, ys, r


@jit_kernel
def observer_run(variant, x0, truth_half, tau_half, b, vs, ks, minv, j, jinv,
                 k_r, k_l, k_a, k_b, alpha, h, continuous, meas_every,
                 noise_on, noise_y0, noise_dirs):
    """Integrate an observer along a precomputed truth trajectory.

    ``truth_half``/``tau_half`` hold truth states and torques on the
    half-step grid (2N+1 samples for N observer steps) so the RK4 stages
    of the continuous-sampling mode can read exact outputs at substep
    times. In held (zero-order-hold) mode the outputs are refreshed every
    ``meas_every`` steps, optionally with the pre-drawn noise applied, and
    stay frozen across the RK4 stages exactly like the torque.

    Returns (states (N+1, 10), y0_used (N+1, 3), ys_used (N+1, n, 3),
    bad_step, status).
    """
    n_steps = (truth_half.shape[0] - 1) // 2
    n = vs.shape[0]
    out = np.empty((n_steps + 1, 10))
    y0_used = np.empty((n_steps + 1, 3))
    ys_used = np.empty((n_steps + 1, n, 3))
    out[0] = x0
    x = x0.copy()

    # held-measurement buffers
    y0_h = np.zeros(3)
    ys_h = np.zeros((n, 3))
    r_h = np.eye(3)

    for k in range(n_steps + 1):
        final = k == n_steps
        if continuous:
            y0_a, ys_a, r_a = _exact_outputs(truth_half[2 * k], b, vs)
            y0_used[k] = y0_a
            ys_used[k] = ys_a
            if final:
                break
            y0_m, ys_m, r_m = _exact_outputs(truth_half[2 * k + 1], b, vs)
            y0_b, ys_b, r_b = _exact_outputs(truth_half[2 * k + 2], b, vs)
            x = _observer_rk4(variant, x, h, y0_a, ys_a, y0_m, ys_m, y0_b, ys_b,
                              tau_half[2 * k], tau_half[2 * k + 1], tau_half[2 * k + 2],
                              vs, ks, minv, j, jinv, k_r, k_l, k_a, k_b, alpha,
                              r_a, r_m, r_b)
        else:
            if k % meas_every == 0:
                mi = k // meas_every
                y0_e, ys_e, r_h = _exact_outputs(truth_half[2 * k], b, vs)
                if noise_on:
                    y0_h = y0_e + noise_y0[mi]
                    for i in range(n):
                        yi = ys_e[i] + noise_dirs[mi, i]
                        nn = math.sqrt(yi[0] * yi[0] + yi[1] * yi[1] + yi[2] * yi[2])
                        if nn < 1e-9:
                            return out, y0_used, ys_used, k, STATUS_DEGENERATE
                        ys_h[i] = yi / nn
                else:
                    y0_h = y0_e
                    ys_h = ys_e
            y0_used[k] = y0_h
            ys_used[k] = ys_h
            if final:
                break
            tau_k = tau_half[2 * k]
            x = _observer_rk4(variant, x, h, y0_h, ys_h, y0_h, ys_h, y0_h, ys_h,
                              tau_k, tau_k, tau_k,
                              vs, ks, minv, j, jinv, k_r, k_l, k_a, k_b, alpha,
                              r_h, r_h, r_h)
        s = 0.0
        for c in range(10):
            s += x[c]
        if not math.isfinite(s):
            return out, y0_used, ys_used, k, STATUS_NONFINITE
        out[k + 1] = x
    return out, y0_used, ys_used, -1, STATUS_OK
