"""Rotation-matrix and quaternion arithmetic shared by the whole package.

Conventions
-----------
* Quaternions are scalar-first Hamilton quaternions ``q = (w, x, y, z)``
  representing right-handed rotations; ``quat_to_rot(q)`` maps body to
  inertial coordinates.
* Rotation matrices are 3x3 ``float64`` arrays with ``R^T R = I`` and
  ``det R = 1``. Constructors validate rather than silently repair;
  re-projection onto the group is an explicit operation reserved for
  the integrators (:func:`quat_normalize`, :func:`project_to_so3`).
* All functions are pure and operate on plain numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .exceptions import (
    InvalidInertia,
    InvalidQuaternion,
    InvalidRotation,
    NotSkewSymmetric,
)

TOL_ORTHONORMAL = 1e-9
TOL_UNIT_QUAT = 1e-12
TOL_SKEW = 1e-9

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def skew(a) -> np.ndarray:
    """Return the skew-symmetric matrix S(a) with S(a) b = a x b."""
    a = np.asarray(a, dtype=float)
    return np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )


def unskew(m, tol: float = TOL_SKEW) -> np.ndarray:
    """Invert :func:`skew`; raises NotSkewSymmetric above tolerance."""
    m = np.asarray(m, dtype=float)
    residual = np.max(np.abs(m + m.T))
    if not np.isfinite(residual) or residual > tol:
        raise NotSkewSymmetric(f"symmetry residual {residual:.3e} exceeds {tol:.1e}")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def quat_normalize(q) -> np.ndarray:
    """Project onto the unit sphere (used after each integrator step)."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12 or not np.isfinite(n):
        raise InvalidQuaternion(f"cannot normalize quaternion with norm {n}")
    return q / n


def check_unit_quaternion(q, tol: float = TOL_UNIT_QUAT) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise InvalidQuaternion(f"expected shape (4,), got {q.shape}")
    err = abs(float(q @ q) - 1.0)
    if not np.isfinite(err) or err > tol:
        raise InvalidQuaternion(f"unit-norm residual {err:.3e} exceeds {tol:.1e}")
    return q


def check_rotation(m, tol: float = TOL_ORTHONORMAL) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise InvalidRotation(f"expected shape (3, 3), got {m.shape}")
    orth = np.max(np.abs(m.T @ m - np.eye(3)))
    det = np.linalg.det(m)
    if not np.isfinite(orth) or orth > tol:
        raise InvalidRotation(f"orthogonality residual {orth:.3e} exceeds {tol:.1e}")
    if abs(det - 1.0) > tol:
        raise InvalidRotation(f"determinant {det:.12f} differs from 1")
    return m


def check_inertia(j, tol_sym: float = 1e-12) -> np.ndarray:
    """Validate a symmetric positive-definite inertia matrix."""
    j = np.asarray(j, dtype=float)
    if j.shape != (3, 3):
        raise InvalidInertia(f"expected shape (3, 3), got {j.shape}")
    asym = np.max(np.abs(j - j.T))
    if not np.isfinite(asym) or asym > tol_sym:
        raise InvalidInertia(f"symmetry residual {asym:.3e} exceeds {tol_sym:.1e}")
    eigmin = np.linalg.eigvalsh(j)[0]
    if eigmin <= 0.0:
        raise InvalidInertia(f"minimum eigenvalue {eigmin:.3e} is not positive")
    return j


def quat_multiply(q1, q2) -> np.ndarray:
    """Hamilton product q1 * q2 (scalar-first)."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def quat_conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_rot(q) -> np.ndarray:
    """Embed a unit quaternion in SO(3): (w^2 - v.v) I + 2 v v^T + 2 w S(v)."""
    q = np.asarray(q, dtype=float)
    w, v = q[0], q[1:]
    return (w * w - v @ v) * np.eye(3) + 2.0 * np.outer(v, v) + 2.0 * w * skew(v)


def rot_to_quat(r) -> np.ndarray:
    """Inverse of :func:`quat_to_rot`; returns the w >= 0 representative."""
    r = np.asarray(r, dtype=float)
    tr = np.trace(r)
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(r[i, i] - r[j, j] - r[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    q = q / np.linalg.norm(q)
    return q if q[0] >= 0.0 else -q


def quat_kinematics_matrix(q) -> np.ndarray:
    """4x4 matrix Q(q) so that qdot = 0.5 * Q(q) @ (0, omega)."""
    q = np.asarray(q, dtype=float)
    w, v = q[0], q[1:]
    m = np.eye(4) * w
    m[0, 1:] += -v
    m[1:, 0] += v
    m[1:, 1:] += skew(v)
    return m


def quat_rate(q, omega) -> np.ndarray:
    """qdot = 0.5 * Q(q) @ (0, omega) for a body-frame rate omega."""
    omega = np.asarray(omega, dtype=float)
    return 0.5 * quat_kinematics_matrix(q) @ np.concatenate(([0.0], omega))


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation about a (not necessarily unit) axis by the given angle."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n < 1e-15:
        return np.eye(3)
    k = skew(axis / n)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def project_to_so3(m) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense (via SVD)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def psi_metric(a, b) -> float:
    """Attitude gap 0.5 * Tr(A^T B - I); 0 when equal, -2 at 180 degrees."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return 0.5 * (float(np.einsum("ij,ij->", a, b)) - 3.0)


def sample_uniform_quaternion(rng) -> np.ndarray:
    """Uniform unit quaternion from a normalized 4D standard Gaussian."""
    while True:
        q = rng.standard_normal(4)
        n = np.linalg.norm(q)
        if n > 1e-9:
            return q / n


def sample_uniform_rotation(rng) -> np.ndarray:
    """Uniform rotation: Gaussian quaternion, normalized, embedded in SO(3)."""
    return quat_to_rot(sample_uniform_quaternion(rng))


def sample_inertia(rng) -> np.ndarray:
    """Random inertia J = 0.5 * (J_A + I) with eig(J_A) = {0, u, 1}, u ~ U(0,1).

    By construction eig(J) = {0.5, 0.5 * (1 + u), 1.0}.
    """
    u = sample_uniform_rotation(rng)
    lam = np.array([0.0, rng.uniform(0.0, 1.0), 1.0])
    j_a = u @ np.diag(lam) @ u.T
    j = 0.5 * (j_a + np.eye(3))
    return 0.5 * (j + j.T)  # exact symmetry despite float round-off
