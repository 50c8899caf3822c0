"""Numerical evaluation of the stability-certificate constants.

Two families of results:

* :func:`certificate_constants` evaluates the bound constants K1..K9,
  K, K_bar and the momentum-error gain gamma along a concrete noise-free
  run of the angular-momentum observer, and checks the inequality chain
  pointwise (derivatives of the innovation by finite differences).
* :func:`local_stability_certificate` evaluates the local-exponential-
  stability construction: the admissible composite-function weights
  eps2/eps3 and positive definiteness of the sandwich matrices M1, M2
  and the decay matrix W at the identity equilibrium.

Chain constants are computed with the provable triangle-inequality bound
on the innovation; the tighter quadratic-sum candidate is reported next
to it and checked empirically, since its derivation is not available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import so3
from .exceptions import CertificateFailed
from .observers import ObserverGains, ObserverRun
from .rigidbody import TorqueProfile, TruthTrajectory, torque_at
from .sensing import DirectionSet


@dataclass(frozen=True)
class InequalityCheck:
    """Pointwise check of one inequality along a trajectory."""

    ok: bool
    max_violation: float      # worst (lhs - rhs); <= 0 when ok
    n_violations: int
    estimate_based: bool      # True when the bound rests on sampled estimates


@dataclass(frozen=True)
class CertificateConstants:
    k1_quadratic: float       # (sum k_i^2)^(1/2) candidate innovation bound
    k1_triangle: float        # sum k_i |v_i| sup|y_i| (provable, used in the chain)
    k2: float                 # sqrt(2 V1(0)) momentum-error bound
    k3: float                 # sup |omega|
    k4: float                 # sup |omegadot|
    k5: float
    k6: float                 # |D| at the identity equilibrium
    k7: float
    k8: float
    k9: float
    k_ddot: float             # bound K on the innovation second derivative
    k_bar: float              # k9 + k_ddot
    gamma: float
    v1_initial: float
    holds: dict = field(default_factory=dict)

    def all_certified_hold(self) -> bool:
        return all(c.ok for c in self.holds.values() if not c.estimate_based)


def identity_equilibrium_d(dirs: DirectionSet) -> np.ndarray:
    """diag(l2+l3, l1+l3, l1+l2) from the eigenvalues of the weighted
    direction matrix: the innovation stiffness at the identity equilibrium."""
    l1, l2, l3 = dirs.eigenvalues
    return np.array([l2 + l3, l1 + l3, l1 + l2])


def momentum_error_gain(j, d_diag, n_samples: int = 100_000, seed: int = 0,
                        refine: bool = True) -> float:
    """gamma = inf over rotations of lambda_min(R J^-1 R^T D^2 R J^-1 R^T).

    Estimated from uniform rotation samples plus a local simplex
    refinement from the best sample (quaternion parametrization).
    """
    j = np.asarray(j, float)
    jinv = np.linalg.inv(j)
    d2 = np.diag(np.asarray(d_diag, float) ** 2)

    rng = np.random.default_rng(seed)
    qs = rng.standard_normal((n_samples, 4))
    qs /= np.linalg.norm(qs, axis=1, keepdims=True)
    from .analysis import quat_to_rot_batch

    rs = quat_to_rot_batch(qs)
    a = np.einsum("nij,jk,nlk->nil", rs, jinv, rs)       # R J^-1 R^T
    g = np.einsum("nij,jk,nkl->nil", a, d2, a)
    lam = np.linalg.eigvalsh(g)[:, 0]
    best = int(np.argmin(lam))
    gamma = float(lam[best])

    if refine:
        def objective(q):
            n = np.linalg.norm(q)
            if n < 1e-9:
                return np.inf
            r = so3.quat_to_rot(q / n)
            m = r @ jinv @ r.T
            return float(np.linalg.eigvalsh(m @ d2 @ m)[0])

        res = minimize(objective, qs[best], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        gamma = min(gamma, float(res.fun))
    return gamma


def _series_check(lhs, rhs, tol: float = 1e-12, estimate_based: bool = False) -> InequalityCheck:
    viol = np.asarray(lhs, float) - np.asarray(rhs, float)
    bad = viol > tol
    return InequalityCheck(
        ok=not bool(bad.any()),
        max_violation=float(viol.max()) if viol.size else 0.0,
        n_violations=int(bad.sum()),
        estimate_based=estimate_based,
    )


def innovation_series(run: ObserverRun, dirs: DirectionSet) -> np.ndarray:
    """Innovation vector at each grid time, from the outputs the run used."""
    from .analysis import quat_to_rot_batch

    r_h = quat_to_rot_batch(run.q_hat)
    p_hat = np.einsum("nji,kj->nki", r_h, dirs.vectors)
    return np.einsum("k,nki->ni", dirs.weights, np.cross(p_hat, run.ys_used))


def certificate_constants(truth: TruthTrajectory, run: ObserverRun,
                          gains: ObserverGains, b, j,
                          profile: TorqueProfile,
                          gamma_samples: int = 100_000,
                          gamma_seed: int = 0) -> CertificateConstants:
    """Evaluate the bound constants along a noise-free momentum-observer
    run and check the inequality chain pointwise."""
    from .analysis import quat_to_rot_batch, trajectory_diagnostics

    j = np.asarray(j, float)
    dirs = gains.dirs
    h = float(run.t[1] - run.t[0])
    jinv = np.linalg.inv(j)
    eig_j = np.linalg.eigvalsh(j)
    lam_min_j, lam_max_j = float(eig_j[0]), float(eig_j[-1])
    lam_max_jinv = 1.0 / lam_min_j

    tgrid = truth.observer_grid()
    w_t = tgrid[:, 4:]
    tau_t = np.stack([torque_at(profile, tt) for tt in run.t])
    wdot_t = (np.cross(w_t @ j.T, w_t) + tau_t) @ jinv.T

    diag = trajectory_diagnostics(run, truth, b, j, gains)
    r_series = innovation_series(run, dirs)
    r_norm = np.linalg.norm(r_series, axis=1)
    l_norm = np.linalg.norm(diag.l_tilde, axis=1)

    # Lyapunov candidate of the momentum observer along the run
    r_t = quat_to_rot_batch(tgrid[:, :4])
    r_hat = quat_to_rot_batch(run.q_hat)
    p_hat = np.einsum("nji,kj->nki", r_hat, dirs.vectors)
    p_tru = np.einsum("nji,kj->nki", r_t, dirs.vectors)
    att = (float(np.einsum("k,kj,kj->", dirs.weights, dirs.vectors, dirs.vectors))
           - np.einsum("k,nki,nki->n", dirs.weights, p_hat, p_tru))
    v1 = gains.k_l * att + 0.5 * l_norm**2
    v1_0 = float(v1[0])

    ks, vs = dirs.weights, dirs.vectors
    y_sup = np.max(np.linalg.norm(run.ys_used, axis=2), axis=0)       # per direction
    k1_quad = float(np.sqrt(np.sum(ks**2)))
    k1_tri = float(np.sum(ks * np.linalg.norm(vs, axis=1) * y_sup))
    k1 = k1_tri

    k2 = float(np.sqrt(2.0 * v1_0))
    k3 = float(np.max(np.linalg.norm(w_t, axis=1)))
    k4 = float(np.max(np.linalg.norm(wdot_t, axis=1)))
    k5 = lam_max_j * k4 + lam_max_j * k3**2 + gains.k_l * k1 / lam_min_j
    d_diag = identity_equilibrium_d(dirs)
    k6 = float(np.max(np.abs(d_diag)))
    k7 = k6 * (k2 / lam_min_j + gains.k_r * k1)
    k8 = k3 * k1 + k7
    k_ddot = (k1 * (k3**2 + k4) + k3 * k7
              + 2.0 * k3 * k6 * (lam_max_jinv * k2 + gains.k_r * k1)
              + k6 * (lam_max_jinv * k2 * k3 + gains.k_r * k7))
    k9 = k3**2 * k1 + 2.0 * k8 + 2.0 * gains.k_r * k2 * lam_max_jinv * k6 + gains.k_r**2 * k1
    gamma = momentum_error_gain(j, d_diag, n_samples=gamma_samples, seed=gamma_seed)

    # finite-difference derivatives of the innovation on the interior
    rd = (r_series[2:] - r_series[:-2]) / (2.0 * h)
    rdd = (r_series[2:] - 2.0 * r_series[1:-1] + r_series[:-2]) / h**2
    rd_norm = np.linalg.norm(rd, axis=1)
    rdd_norm = np.linalg.norm(rdd, axis=1)
    mid = slice(1, -1)

    holds = {
        "innovation_le_k1_quadratic": _series_check(r_norm, k1_quad, estimate_based=True),
        "innovation_le_k1_triangle": _series_check(r_norm, k1_tri),
        "momentum_error_le_k2": _series_check(l_norm, k2, tol=1e-9),
        "v1_nonincreasing_per_step": _series_check(np.diff(v1), 1e-9),
        "innovation_rate_le_k8": _series_check(rd_norm, k8),
        "innovation_accel_le_k": _series_check(rdd_norm, k_ddot),
        "decay_direction_52d": _series_check(
            -rd_norm**2,
            -gamma * l_norm[mid] ** 2 + k9 * r_norm[mid],
            tol=1e-9,
            estimate_based=True,
        ),
    }
    return CertificateConstants(
        k1_quadratic=k1_quad, k1_triangle=k1_tri, k2=k2, k3=k3, k4=k4, k5=k5,
        k6=k6, k7=k7, k8=k8, k9=k9, k_ddot=k_ddot, k_bar=k9 + k_ddot,
        gamma=gamma, v1_initial=v1_0, holds=holds,
    )


# ---------------------------------------------------------------------------
# local exponential stability construction


def composite_weight_bound_sandwich(j, k_r: float, c1: float, c2: float,
                                    d_diag) -> float:
    """Closed-form admissible weight eps2: the sandwich matrices stay
    positive definite for eps below this value."""
    lam_min_j2 = float(np.linalg.eigvalsh(np.asarray(j, float) @ np.asarray(j, float))[0])
    best = np.inf
    for c in (c1, c2):
        for d in np.asarray(d_diag, float):
            val = (2.0 * lam_min_j2 * k_r / d) * (
                1.0 + np.sqrt(1.0 + c / (lam_min_j2 * k_r**2))
            )
            best = min(best, val)
    return float(best)


def decay_quadratic_blocks(omega, d_bar, j, k_r: float, k_l: float):
    """Exact (W11, W12) blocks of the quadratic form r^T d2r/dt2 =
    z^T [[S(w)^2 + W11, W12], [W12^T, 0]] z in z = (innovation, rate error),
    evaluated at a rate omega and stiffness matrix d_bar.

    Skew contributions (the rate-acceleration term) vanish inside the
    quadratic form and are omitted.
    """
    omega = np.asarray(omega, float)
    d_bar = np.asarray(d_bar, float)
    j = np.asarray(j, float)
    jinv = np.linalg.inv(j)
    s = so3.skew(omega)
    d_dot = s.T @ d_bar + d_bar @ s
    p1 = (s @ s - k_r * (s.T @ d_bar) - k_r * d_dot
          - k_l * (d_bar @ jinv @ jinv) - k_r * (d_bar @ s.T) + k_r**2 * (d_bar @ d_bar))
    w11 = 0.5 * (p1 + p1.T) - s @ s
    p2 = s.T @ d_bar + d_dot + d_bar @ jinv @ s.T @ j - k_r * (d_bar @ d_bar)
    w12 = 0.5 * p2
    return w11, w12


def _augmented_blocks(omega, d_bar, j, k_r: float, k_l: float):
    """(W11_full, W12_full) combining the innovation-acceleration blocks
    with the displayed innovation-rate contribution."""
    w11, w12 = decay_quadratic_blocks(omega, d_bar, j, k_r, k_l)
    s = so3.skew(np.asarray(omega, float))
    w11_full = k_r**2 * np.eye(3) + w11
    w12_full = (s - 2.0 * k_r * np.eye(3)) @ d_bar + w12
    return w11_full, w12_full


def estimate_block_norms(j, d_diag, k_r: float, k_l: float, omega_bound: float,
                         n_samples: int = 400, seed: int = 0):
    """Sampled sup of |W11_full|, |W12_full| over rates in the omega ball
    and uniformly rotated stiffness matrices. Estimate-based."""
    rng = np.random.default_rng(seed)
    d = np.diag(np.asarray(d_diag, float))
    sup11 = sup12 = 0.0
    for k in range(n_samples):
        if k == 0:
            w = np.zeros(3)
            r = np.eye(3)
        else:
            w = rng.standard_normal(3)
            w *= omega_bound * rng.uniform() ** (1.0 / 3.0) / max(np.linalg.norm(w), 1e-12)
            r = so3.sample_uniform_rotation(rng)
        d_bar = r.T @ d @ r
        w11, w12 = _augmented_blocks(w, d_bar, j, k_r, k_l)
        sup11 = max(sup11, float(np.linalg.norm(w11, 2)))
        sup12 = max(sup12, float(np.linalg.norm(w12, 2)))
    return sup11, sup12


def composite_weight_bound_decay(k_l: float, k_r: float, w11_norm: float,
                                 w12_norm: float, d_diag) -> float:
    """eps3: the decay matrix W stays positive definite below this weight."""
    d_min = float(np.min(np.abs(np.asarray(d_diag, float))))
    return k_l * k_r / (w12_norm**2 / d_min**2 + w11_norm)


def sandwich_matrices(c1: float, c2: float, eps: float, k_r: float, d_diag, j):
    """M1, M2 bounding the composite function V1 + eps * V2."""
    d = np.diag(np.asarray(d_diag, float))
    j = np.asarray(j, float)
    out = []
    for c in (c1, c2):
        m = np.zeros((6, 6))
        m[:3, :3] = c * np.eye(3) + eps * k_r * d
        m[3:, 3:] = j @ j
        m[:3, 3:] = -0.5 * eps * d
        m[3:, :3] = -0.5 * eps * d
        out.append(m)
    return out[0], out[1]


def decay_matrix(eps: float, k_l: float, k_r: float, w11_full, w12_full, d_bar):
    """W with -dV3/dt >= z^T W z for the composite function V3 = V1 + eps V2."""
    w = np.zeros((6, 6))
    w[:3, :3] = (k_l * k_r / eps) * np.eye(3) + w11_full
    w[:3, 3:] = w12_full
    w[3:, :3] = w12_full.T
    w[3:, 3:] = d_bar @ d_bar
    return eps * w


@dataclass(frozen=True)
class UlesCertificate:
    eps2: float
    eps3: float
    eps: float                 # weight actually tested (0.5 * min(eps2, eps3))
    c1: float
    c2: float
    w11_norm_bound: float      # sampled estimate
    w12_norm_bound: float
    min_eig_m1: float
    min_eig_m2: float
    min_eig_w: float           # worst sample over the rate ball
    omega_bound: float

    def positive_definite(self) -> bool:
        return min(self.min_eig_m1, self.min_eig_m2, self.min_eig_w) > 0.0


def local_stability_certificate(gains: ObserverGains, j, c1: float, c2: float,
                                omega_bound: float = 1.0, n_samples: int = 400,
                                seed: int = 0, eps: float | None = None,
                                check: bool = True) -> UlesCertificate:
    """Evaluate eps2/eps3 and the positive definiteness of M1, M2, W at
    the identity equilibrium for eps = 0.5 * min(eps2, eps3) (or a caller
    supplied eps). Raises CertificateFailed when a matrix is not positive
    definite and check=True.

    c1, c2 are the quadratic comparison constants of the attitude term;
    see :func:`estimate_attitude_quadratic_bounds` for an empirical
    estimator.
    """
    if c1 <= 0.0 or c2 <= 0.0:
        raise ValueError("c1, c2 must be positive")
    j = np.asarray(j, float)
    dirs = gains.dirs
    d_diag = identity_equilibrium_d(dirs)

    eps2 = composite_weight_bound_sandwich(j, gains.k_r, c1, c2, d_diag)
    w11n, w12n = estimate_block_norms(j, d_diag, gains.k_r, gains.k_l,
                                      omega_bound, n_samples=n_samples, seed=seed)
    eps3 = composite_weight_bound_decay(gains.k_l, gains.k_r, w11n, w12n, d_diag)
    eps_used = 0.5 * min(eps2, eps3) if eps is None else float(eps)

    m1, m2 = sandwich_matrices(c1, c2, eps_used, gains.k_r, d_diag, j)
    min_m1 = float(np.linalg.eigvalsh(m1)[0])
    min_m2 = float(np.linalg.eigvalsh(m2)[0])

    # decay matrix over sampled rates / orientations, worst case kept
    rng = np.random.default_rng(seed + 1)
    d = np.diag(d_diag)
    min_w = np.inf
    for k in range(n_samples):
        if k == 0:
            w_s = np.zeros(3)
            r = np.eye(3)
        else:
            w_s = rng.standard_normal(3)
            w_s *= omega_bound * rng.uniform() ** (1.0 / 3.0) / max(np.linalg.norm(w_s), 1e-12)
            r = so3.sample_uniform_rotation(rng)
        d_bar = r.T @ d @ r
        w11f, w12f = _augmented_blocks(w_s, d_bar, j, gains.k_r, gains.k_l)
        w_mat = decay_matrix(eps_used, gains.k_l, gains.k_r, w11f, w12f, d_bar)
        min_w = min(min_w, float(np.linalg.eigvalsh(w_mat)[0]))

    cert = UlesCertificate(eps2=eps2, eps3=eps3, eps=eps_used, c1=c1, c2=c2,
                           w11_norm_bound=w11n, w12_norm_bound=w12n,
                           min_eig_m1=min_m1, min_eig_m2=min_m2,
                           min_eig_w=float(min_w), omega_bound=omega_bound)
    if check and not cert.positive_definite():
        failing = []
        for name, val in (("M1", min_m1), ("M2", min_m2), ("W", cert.min_eig_w)):
            if val <= 0.0:
                failing.append(f"{name} (min eigenvalue {val:.3e})")
        raise CertificateFailed("; ".join(failing))
    return cert


def estimate_attitude_quadratic_bounds(gains: ObserverGains, innovation_cap: float = 0.5,
                                       n_samples: int = 2000, seed: int = 0,
                                       margin: float = 1.1):
    """Empirical (c1, c2) with c1 |r|^2 <= k_l * attitude term <= c2 |r|^2
    over small attitude errors whose innovation stays below the cap."""
    rng = np.random.default_rng(seed)
    dirs = gains.dirs
    vs, ks = dirs.vectors, dirs.weights
    ratios = []
    while len(ratios) < n_samples:
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        angle = rng.uniform(1e-4, np.pi / 2.0)
        r_tilde = so3.rotation_from_axis_angle(axis, angle)
        r_vec = np.einsum("k,kj->j", ks, np.cross(vs @ r_tilde.T, vs))
        rn = float(np.linalg.norm(r_vec))
        if rn > innovation_cap or rn < 1e-6:
            continue
        rows = vs @ r_tilde.T - vs
        att = float(np.einsum("k,kj,kj->", 0.5 * ks, rows, rows))
        ratios.append(gains.k_l * att / rn**2)
    ratios = np.asarray(ratios)
    return float(ratios.min() / margin), float(ratios.max() * margin)


def estimate_sublevel_radius(gains: ObserverGains, j, innovation_cap: float = 0.5,
                             n_samples: int = 4000, seed: int = 0,
                             bisect_iters: int = 30) -> float:
    """Largest Lyapunov sublevel value (momentum-observer candidate) whose
    sampled members keep the innovation below the cap. Estimate-based."""
    rng = np.random.default_rng(seed)
    dirs = gains.dirs
    vs, ks = dirs.vectors, dirs.weights

    qs = rng.standard_normal((n_samples, 4))
    qs /= np.linalg.norm(qs, axis=1, keepdims=True)
    from .analysis import quat_to_rot_batch

    rts = quat_to_rot_batch(qs)
    p = np.einsum("nij,kj->nki", rts, vs)          # rows R~ v_i
    rows = p - vs[None, :, :]
    att = np.einsum("k,nkj,nkj->n", 0.5 * ks, rows, rows) * gains.k_l
    # innovation for R~: sum_i k_i (R~^T v_i) x v_i; independent of the
    # momentum error, so the sublevel condition only constrains attitude
    pt = np.einsum("nji,kj->nki", rts, vs)
    r_norm = np.linalg.norm(np.einsum("k,nkj->nj", ks, np.cross(pt, vs[None, :, :])), axis=1)

    lo, hi = 0.0, float(2.0 * att.max() + 10.0)
    for _ in range(bisect_iters):
        midv = 0.5 * (lo + hi)
        inside = att <= midv
        if np.any(r_norm[inside] > innovation_cap):
            hi = midv
        else:
            lo = midv
    return lo
