"""Error and Lyapunov evaluation along trajectories.

Includes the single-sample operations (error state, Lyapunov candidates,
distance to the four attitude equilibria) and vectorized per-trajectory
diagnostics shared by the CLI and the Monte Carlo harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import so3
from .observers import ObserverGains, ObserverRun, ObserverState, omega_estimate
from .rigidbody import RigidBodyState, TruthTrajectory
from .sensing import DirectionSet

EQUILIBRIUM_SIGNS = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
)


@dataclass(frozen=True)
class ErrorState:
    """Estimation errors: attitude error R_hat R^T, rate / bias / momentum
    errors (estimate minus truth)."""

    r_tilde: np.ndarray
    omega_tilde: np.ndarray
    b_tilde: np.ndarray
    l_tilde: np.ndarray


def error_state(truth: RigidBodyState, est: ObserverState, b, j) -> ErrorState:
    r = truth.rotation
    r_tilde = so3.check_rotation(est.rotation @ r.T, tol=1e-8)
    l_truth = r @ (np.asarray(j, float) @ truth.omega)
    return ErrorState(
        r_tilde=r_tilde,
        omega_tilde=omega_estimate(est, j) - truth.omega,
        b_tilde=est.b_hat - np.asarray(b, float),
        l_tilde=est.l_hat - l_truth,
    )


def _attitude_term(r_tilde, dirs: DirectionSet) -> float:
    vs = dirs.vectors
    rows = vs @ np.asarray(r_tilde, float).T - vs     # rows R~ v_i - v_i
    return float(np.einsum("i,ij,ij->", 0.5 * dirs.weights, rows, rows))


def lyapunov_value(variant: int, err: ErrorState, gains: ObserverGains) -> float:
    """Lyapunov candidate of the given observer variant (3 covers 4 too)."""
    att = _attitude_term(err.r_tilde, gains.dirs)
    if variant == 1:
        return gains.k_l * att + 0.5 * float(err.l_tilde @ err.l_tilde)
    if variant == 2:
        return gains.k_b * att + 0.5 * float(err.b_tilde @ err.b_tilde)
    if variant in (3, 4):
        return (
            gains.k_l * gains.k_b * att
            + 0.5 * gains.k_l * (1.0 - gains.alpha) * float(err.b_tilde @ err.b_tilde)
            + 0.5 * gains.k_b * gains.alpha * float(err.l_tilde @ err.l_tilde)
        )
    raise ValueError(f"unknown variant {variant}")


def equilibrium_rotations(dirs: DirectionSet) -> np.ndarray:
    """The four innovation equilibria U diag(s) U^T, identity first."""
    u = dirs.eigenbasis
    return np.stack([u @ np.diag(s) @ u.T for s in EQUILIBRIUM_SIGNS])


def psi_to_equilibria(r_tilde, dirs: DirectionSet) -> np.ndarray:
    """Attitude gap from R_tilde to each of the four equilibria."""
    return np.array(
        [so3.psi_metric(r_tilde, eq) for eq in equilibrium_rotations(dirs)]
    )


def fit_log10_slope(t, values) -> float:
    """Least-squares slope of log10(values) vs t (positive samples only)."""
    values = np.asarray(values, float)
    mask = values > 0.0
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.asarray(t, float)[mask], np.log10(values[mask]), 1)[0])


# ---------------------------------------------------------------------------
# batched helpers


def quat_to_rot_batch(qs) -> np.ndarray:
    """Vectorized quaternion-to-rotation for an (N, 4) array."""
    qs = np.asarray(qs, float)
    w, x, y, z = qs[:, 0], qs[:, 1], qs[:, 2], qs[:, 3]
    out = np.empty((qs.shape[0], 3, 3))
    out[:, 0, 0] = w * w + x * x - y * y - z * z
    out[:, 0, 1] = 2.0 * (x * y - w * z)
    out[:, 0, 2] = 2.0 * (x * z + w * y)
    out[:, 1, 0] = 2.0 * (x * y + w * z)
    out[:, 1, 1] = w * w - x * x + y * y - z * z
    out[:, 1, 2] = 2.0 * (y * z - w * x)
    out[:, 2, 0] = 2.0 * (x * z - w * y)
    out[:, 2, 1] = 2.0 * (y * z + w * x)
    out[:, 2, 2] = w * w - x * x - y * y + z * z
    return out


@dataclass(frozen=True)
class TrajectoryDiagnostics:
    """Per-grid-point signals derived from one observer run.

    omega_hat / b_hat are the effective estimates of the variant: the
    momentum observer has no bias state, so its bias estimate is
    y0 - omega_hat; the complementary filter has no momentum state, so
    its rate estimate is y0 - b_hat. The fused variants use their states.
    """

    t: np.ndarray
    psi: np.ndarray             # attitude gap to identity
    psi_eq: np.ndarray          # (N+1, 4) gaps to the four equilibria
    v1: np.ndarray              # Lyapunov candidate of the variant
    r_tilde_norm: np.ndarray
    delta_l_norm: np.ndarray
    omega_hat: np.ndarray       # (N+1, 3) effective rate estimate
    b_hat: np.ndarray           # (N+1, 3) effective bias estimate
    omega_err: np.ndarray       # (N+1, 3)
    b_err: np.ndarray
    l_tilde: np.ndarray


def trajectory_diagnostics(run: ObserverRun, truth: TruthTrajectory, b, j,
                           gains: ObserverGains) -> TrajectoryDiagnostics:
    b = np.asarray(b, float)
    j = np.asarray(j, float)
    jinv = np.linalg.inv(j)
    dirs = gains.dirs
    vs, ks = dirs.vectors, dirs.weights

    tgrid = truth.observer_grid()
    q_t, w_t = tgrid[:, :4], tgrid[:, 4:]
    r_t = quat_to_rot_batch(q_t)
    r_h = quat_to_rot_batch(run.q_hat)

    # body-frame reference directions seen by truth and estimate
    p_hat = np.einsum("nji,kj->nki", r_h, vs)      # E(q_hat)^T v_i
    p_tru = np.einsum("nji,kj->nki", r_t, vs)

    dot = np.einsum("nk->n", np.einsum("k,nki,nki->nk", ks, p_hat, p_tru))
    att = np.einsum("k,k->", ks, np.einsum("kj,kj->k", vs, vs)) - dot  # sum k_i (|v_i|^2 - <.,.>)

    qdot = np.einsum("ni,ni->n", run.q_hat, q_t)
    psi = 2.0 * (qdot * qdot - 1.0)

    # gaps to the four equilibria via B = U^T R_tilde U
    u = dirs.eigenbasis
    r_tilde = np.einsum("nik,njk->nij", r_h, r_t)
    b_mid = np.einsum("ji,njk,kl->nil", u, r_tilde, u)
    diag = np.einsum("nii->ni", b_mid)
    psi_eq = 0.5 * (diag @ EQUILIBRIUM_SIGNS.T - 3.0)

    # innovation and momentum mismatch from the outputs actually used
    r_tilde_vec = np.einsum("k,nki->ni", ks, np.cross(p_hat, run.ys_used))
    rbar = np.einsum("ij,njk->nik", dirs.m_inv,
                     np.einsum("k,kj,nki->nji", ks, vs, run.ys_used))
    delta_l = (np.einsum("nji,nj->ni", rbar, run.l_hat)
               - (run.y0_used - run.b_hat) @ j.T)

    omega_native = np.einsum("nji,nj->ni", r_h, run.l_hat) @ jinv.T
    if run.variant == 1:
        omega_hat = omega_native
        b_hat = run.y0_used - omega_hat
    elif run.variant == 2:
        b_hat = run.b_hat
        omega_hat = run.y0_used - b_hat
    else:
        omega_hat = omega_native
        b_hat = run.b_hat

    l_truth = np.einsum("nij,nj->ni", r_t, w_t @ j.T)
    l_tilde = run.l_hat - l_truth
    b_err = b_hat - b
    omega_err = omega_hat - w_t

    lt2 = np.einsum("ni,ni->n", l_tilde, l_tilde)
    if run.variant == 1:
        v1 = gains.k_l * att + 0.5 * lt2
    elif run.variant == 2:
        bt = run.b_hat - b
        v1 = gains.k_b * att + 0.5 * np.einsum("ni,ni->n", bt, bt)
    else:
        bt = run.b_hat - b
        v1 = (gains.k_l * gains.k_b * att
              + 0.5 * gains.k_l * (1.0 - gains.alpha) * np.einsum("ni,ni->n", bt, bt)
              + 0.5 * gains.k_b * gains.alpha * lt2)

    return TrajectoryDiagnostics(
        t=run.t,
        psi=psi,
        psi_eq=psi_eq,
        v1=v1,
        r_tilde_norm=np.linalg.norm(r_tilde_vec, axis=1),
        delta_l_norm=np.linalg.norm(delta_l, axis=1),
        omega_hat=omega_hat,
        b_hat=b_hat,
        omega_err=omega_err,
        b_err=b_err,
        l_tilde=l_tilde,
    )
