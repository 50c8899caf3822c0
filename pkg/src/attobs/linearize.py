"""Local linear model of the fused-observer error dynamics and its
frequency-domain analysis.

The error state is x = (eps, omega_err, bias_err) in R^9, where the
attitude error is parametrized as R_tilde = exp(S(eps)). Noise enters
through delta = (d0, d1, d2, d3) in R^12: d0 additive on the rate output,
d_i multiplicative on direction i via y_i = R^T (I + S(d_i)) v_i. The
Jacobians are computed by finite differences about the origin; a
forward-difference scheme is available as a consistency check on the
default central scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import so3
from .exceptions import SingularFrequency
from .observers import ObserverGains

FD_STEP = 1e-6


@dataclass(frozen=True)
class OperatingPoint:
    """Frozen truth configuration the error dynamics are linearized at.

    The model is time-invariant only for a stationary attitude, i.e.
    omega = 0 and tau = 0 (the defaults); nonzero values give a
    frozen-time approximation.
    """

    r: np.ndarray
    gains: ObserverGains
    j: np.ndarray
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tau: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "r", so3.check_rotation(self.r))
        object.__setattr__(self, "j", so3.check_inertia(self.j))
        for name in ("omega", "b", "tau"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class LinearizedModel:
    a: np.ndarray               # (9, 9)
    b: np.ndarray               # (9, 12)
    operating_point: OperatingPoint

    def is_hurwitz(self) -> bool:
        return bool(np.max(np.linalg.eigvals(self.a).real) < 0.0)


def error_field(op: OperatingPoint):
    """Nonlinear error dynamics x -> xdot of the fused observer at the
    operating point, with explicit noise inputs. Exact group operations
    are used so the finite differences see the true local behavior."""
    r = op.r
    j = op.j
    jinv = np.linalg.inv(j)
    g = op.gains
    vs, ks = g.dirs.vectors, g.dirs.weights
    w_op, tau_op, b_op = op.omega, op.tau, op.b
    l_op = r @ (j @ w_op)

    def f(x, delta):
        eps, w_err, b_err = x[:3], x[3:6], x[6:]
        d0 = delta[:3]
        r_tilde = expm(so3.skew(eps))
        r_hat = r_tilde @ r
        l_hat = r_hat @ (j @ (w_op + w_err))
        b_hat = b_op + b_err
        y0 = w_op + b_op + d0
        ys = [r.T @ (vi + np.cross(delta[3 + 3 * i: 6 + 3 * i], vi))
              for i, vi in enumerate(vs)]
        innovation = np.zeros(3)
        for ki, vi, yi in zip(ks, vs, ys):
            innovation = innovation + ki * np.cross(r_hat.T @ vi, yi)
        delta_l = r.T @ l_hat - j @ (y0 - b_hat)
        u = g.alpha * (jinv @ (r.T @ l_hat)) + (1.0 - g.alpha) * (y0 - b_hat) \
            - g.k_r * innovation
        l_hat_dot = r @ (tau_op - g.k_l * (jinv @ innovation)
                         - (1.0 - g.alpha) * g.k_l * g.k_a * delta_l)
        # eps_dot from the spatial angular velocity of R_tilde
        eps_dot = r_tilde @ (r @ (u - w_op))
        # omega_err_dot = d/dt (J^-1 R_hat^T l_hat) - omega_dot
        w_hat_dot = jinv @ (r_hat.T @ l_hat_dot - np.cross(u, r_hat.T @ l_hat))
        w_dot = jinv @ (np.cross(j @ w_op, w_op) + tau_op)
        b_err_dot = g.k_b * innovation - g.alpha * g.k_b * g.k_a * (j @ delta_l)
        return np.concatenate([eps_dot, w_hat_dot - w_dot, b_err_dot])

    return f


def linearize_error_dynamics(op: OperatingPoint, step: float = FD_STEP,
                             scheme: str = "central") -> LinearizedModel:
    """Finite-difference Jacobians A = df/dx, B = df/ddelta at the origin."""
    f = error_field(op)
    zx, zd = np.zeros(9), np.zeros(12)

    def column(fun, n, i):
        e = np.zeros(n)
        e[i] = step
        if scheme == "central":
            return (fun(e) - fun(-e)) / (2.0 * step)
        if scheme == "forward":
            return (fun(e) - fun(np.zeros(n))) / step
        raise ValueError(f"unknown scheme {scheme!r}")

    a = np.column_stack([column(lambda e: f(zx + e, zd), 9, i) for i in range(9)])
    b = np.column_stack([column(lambda e: f(zx, zd + e), 12, i) for i in range(12)])
    return LinearizedModel(a=a, b=b, operating_point=op)


def spectrum_vs_alpha(op: OperatingPoint, alpha_grid) -> list[np.ndarray]:
    """Eigenvalues of A for each fusion weight, sorted by (re, im)."""
    from dataclasses import replace

    out = []
    for alpha in alpha_grid:
        gains = replace(op.gains, alpha=float(alpha))
        model = linearize_error_dynamics(replace(op, gains=gains))
        ev = np.linalg.eigvals(model.a)
        out.append(ev[np.lexsort((ev.imag, ev.real))])
    return out


NOISE_CHANNELS = {"d0": slice(0, 3), "d1": slice(3, 6), "d2": slice(6, 9),
                  "d3": slice(9, 12), "all": slice(0, 12)}


def frequency_response_sigma(model: LinearizedModel, channel: str,
                             omega_grid) -> np.ndarray:
    """Singular values of G(i w) = (i w I - A)^{-1} B restricted to one
    noise channel, per grid frequency; descending within each row."""
    if channel not in NOISE_CHANNELS:
        raise ValueError(f"unknown channel {channel!r}; options {sorted(NOISE_CHANNELS)}")
    cols = model.b[:, NOISE_CHANNELS[channel]]
    eye = np.eye(model.a.shape[0])
    out = np.empty((len(omega_grid), cols.shape[1]))
    for row, w in enumerate(omega_grid):
        m = 1j * w * eye - model.a
        if np.linalg.cond(m) > 1e12:
            raise SingularFrequency(f"(iwI - A) near-singular at w={w}")
        out[row] = np.linalg.svd(np.linalg.solve(m, cols), compute_uv=False)
    return out
