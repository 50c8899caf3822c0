"""The observer family: angular-momentum observer (variant 1), the
complementary filter with bias correction (variant 2), and their fused
combination using either the true attitude (variant 3, analysis only) or
the attitude reconstructed from the direction measurements (variant 4,
the implementable observer).

Attitude estimates are integrated as quaternions; rotation-matrix forms
are derived views. The per-step integrator is RK4 with a quaternion
projection, holding measurements (and torque) constant across the RK4
stages. Full runs support an additional continuous-sampling mode for
noise-free studies where the outputs are evaluated exactly at substep
times (see :func:`run_observer`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels, so3
from .exceptions import DegenerateMeasurement, NonFiniteState
from .rigidbody import IntegratorConfig, TorqueProfile, TruthTrajectory, torque_at
from .sensing import DirectionSet, MeasurementSet, NoiseConfig

VARIANTS = (1, 2, 3, 4)


@dataclass(frozen=True)
class ObserverGains:
    """Scalar gains, the fusion weight alpha in [0, 1], and the direction set."""

    dirs: DirectionSet
    k_r: float = 2.0
    k_l: float = 2.0
    k_a: float = 1.0
    k_b: float = 4.0
    alpha: float = 0.3

    def __post_init__(self):
        for name in ("k_r", "k_l", "k_a", "k_b"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


@dataclass(frozen=True)
class ObserverState:
    """Bias estimate, inertial angular-momentum estimate, attitude estimate."""

    b_hat: np.ndarray
    l_hat: np.ndarray
    q_hat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b_hat", np.asarray(self.b_hat, dtype=float))
        object.__setattr__(self, "l_hat", np.asarray(self.l_hat, dtype=float))
        object.__setattr__(self, "q_hat", so3.check_unit_quaternion(self.q_hat))
        if not (np.all(np.isfinite(self.b_hat)) and np.all(np.isfinite(self.l_hat))):
            raise NonFiniteState("observer state contains non-finite components")

    def pack(self) -> np.ndarray:
        return np.concatenate([self.b_hat, self.l_hat, self.q_hat])

    @staticmethod
    def unpack(x) -> "ObserverState":
        x = np.asarray(x, dtype=float)
        return ObserverState(b_hat=x[:3], l_hat=x[3:6], q_hat=x[6:])

    @property
    def rotation(self) -> np.ndarray:
        return so3.quat_to_rot(self.q_hat)


@dataclass(frozen=True)
class InnovationTerms:
    """Direction innovation, momentum mismatch, and the algebraic attitude
    reconstruction (generally not orthogonal under noise)."""

    r_tilde: np.ndarray
    delta_l: np.ndarray
    r_bar: np.ndarray


def innovation(q_hat, meas: MeasurementSet, dirs: DirectionSet) -> np.ndarray:
    """Weighted sum of cross products between predicted and measured directions."""
    e = so3.quat_to_rot(q_hat)
    predicted = dirs.vectors @ e       # rows E(q)^T v_i
    return np.einsum("i,ij->j", dirs.weights, np.cross(predicted, meas.y))


def reconstruct_attitude(meas: MeasurementSet, dirs: DirectionSet) -> np.ndarray:
    """Algebraic attitude from the direction measurements:
    M^{-1} sum_i k_i v_i y_i^T. Exact for noise-free outputs; under noise
    the result is generally not orthogonal and is used as-is."""
    acc = np.einsum("i,ij,ik->jk", dirs.weights, dirs.vectors, meas.y)
    return dirs.m_inv @ acc


def momentum_mismatch(l_hat, r_bar, y0, b_hat, j) -> np.ndarray:
    """Difference between the two body-frame momentum estimates:
    R_bar^T l_hat - J (y0 - b_hat). Zero at zero estimation errors."""
    return np.asarray(r_bar).T @ np.asarray(l_hat) - np.asarray(j) @ (
        np.asarray(y0) - np.asarray(b_hat)
    )


def innovation_terms(state: ObserverState, meas: MeasurementSet, dirs: DirectionSet,
                     j) -> InnovationTerms:
    r_bar = reconstruct_attitude(meas, dirs)
    return InnovationTerms(
        r_tilde=innovation(state.q_hat, meas, dirs),
        delta_l=momentum_mismatch(state.l_hat, r_bar, meas.y0, state.b_hat, j),
        r_bar=r_bar,
    )


def observer_derivative(variant: int, state: ObserverState, meas: MeasurementSet,
                        j, gains: ObserverGains, tau, r_true=None) -> ObserverState:
    """Continuous-time derivative of the chosen variant, as an
    ObserverState-shaped triple (db_hat, dl_hat, dq_hat).

    Variant 3 substitutes the true attitude ``r_true`` where variant 4
    uses the reconstructed one; it exists for analysis and testing.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown observer variant {variant}")
    if variant == 3:
        if r_true is None:
            raise ValueError("variant 3 needs the true attitude")
        r_true = np.asarray(r_true, dtype=float)
    else:
        r_true = np.eye(3)
    j = np.asarray(j, dtype=float)
    d = kernels.observer_ode(
        variant, state.pack(), np.asarray(meas.y0, float), np.asarray(meas.y, float),
        np.asarray(tau, float), gains.dirs.vectors, gains.dirs.weights,
        gains.dirs.m_inv, j, np.linalg.inv(j),
        gains.k_r, gains.k_l, gains.k_a, gains.k_b, gains.alpha, r_true,
    )
    return _raw_state(d)


def _raw_state(x) -> ObserverState:
    """Build an ObserverState without the unit-quaternion check (derivatives
    and intermediate RK4 stages are not unit quaternions)."""
    s = object.__new__(ObserverState)
    object.__setattr__(s, "b_hat", np.asarray(x[:3], dtype=float))
    object.__setattr__(s, "l_hat", np.asarray(x[3:6], dtype=float))
    object.__setattr__(s, "q_hat", np.asarray(x[6:], dtype=float))
    return s


def observer_step(variant: int, state: ObserverState, meas: MeasurementSet, j,
                  gains: ObserverGains, tau, h: float, r_true=None) -> ObserverState:
    """One RK4 step with the measurement and torque held constant across
    the stages, followed by quaternion re-normalization."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if variant == 3:
        if r_true is None:
            raise ValueError("variant 3 needs the true attitude")
        r = np.asarray(r_true, dtype=float)
    else:
        r = np.eye(3)
    j = np.asarray(j, dtype=float)
    y0 = np.asarray(meas.y0, float)
    ys = np.asarray(meas.y, float)
    tau = np.asarray(tau, float)
    x = kernels._observer_rk4(
        variant, state.pack(), float(h), y0, ys, y0, ys, y0, ys, tau, tau, tau,
        gains.dirs.vectors, gains.dirs.weights, gains.dirs.m_inv, j, np.linalg.inv(j),
        gains.k_r, gains.k_l, gains.k_a, gains.k_b, gains.alpha, r, r, r,
    )
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("observer step produced a non-finite state")
    return ObserverState.unpack(x)


def omega_estimate(state: ObserverState, j) -> np.ndarray:
    """Filtered body-rate estimate J^{-1} E(q_hat)^T l_hat."""
    return np.linalg.solve(np.asarray(j, dtype=float), state.rotation.T @ state.l_hat)


@dataclass(frozen=True)
class ObserverRun:
    """Observer trajectory on the observer grid, with the output samples
    that were in effect at each grid time (for diagnostics)."""

    t: np.ndarray          # (N+1,)
    states: np.ndarray     # (N+1, 10) rows (b_hat, l_hat, q_hat)
    y0_used: np.ndarray    # (N+1, 3)
    ys_used: np.ndarray    # (N+1, n, 3)
    variant: int

    @property
    def b_hat(self) -> np.ndarray:
        return self.states[:, :3]

    @property
    def l_hat(self) -> np.ndarray:
        return self.states[:, 3:6]

    @property
    def q_hat(self) -> np.ndarray:
        return self.states[:, 6:]

    def final_state(self) -> ObserverState:
        return ObserverState.unpack(self.states[-1])


def draw_measurement_noise(rng, noise: NoiseConfig, n_meas: int, n_dirs: int):
    """Pre-draw the additive noise for a run: (n_meas, 3) for the rate
    output and (n_meas, n_dirs, 3) for the direction outputs. Drawing
    once lets several observers consume identical measurements."""
    return (noise.sigma * rng.standard_normal((n_meas, 3)),
            noise.sigma * rng.standard_normal((n_meas, n_dirs, 3)))


def measurement_count(cfg: IntegratorConfig, noise: NoiseConfig) -> int:
    """Number of measurement instants of a held-sampling run."""
    ratio = noise.h_meas / cfg.h_obs
    meas_every = max(int(round(ratio)), 1)
    if abs(ratio - meas_every) > 1e-9 * max(ratio, 1.0):
        raise ValueError("h_meas must be an integer multiple of h_obs")
    return cfg.n_obs_steps // meas_every + 1


def run_observer(variant: int, init: ObserverState, truth: TruthTrajectory,
                 b, j, gains: ObserverGains, profile: TorqueProfile,
                 noise: NoiseConfig, rng=None, sampling: str | None = None,
                 noise_samples=None) -> ObserverRun:
    """Integrate an observer along a simulated truth trajectory.

    sampling mode:
      * "continuous" - outputs evaluated exactly at every RK4 stage time
        (ideal noise-free operation; requires noise disabled and an even
        h_obs / h_truth ratio),
      * "held" - outputs sampled every noise.h_meas seconds and held
        between samples, torque held per step (the discrete-time scheme).
    Defaults to "continuous" when noise is disabled, "held" otherwise.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown observer variant {variant}")
    cfg = truth.cfg
    if sampling is None:
        sampling = "held" if noise.enabled else "continuous"
    if sampling not in ("continuous", "held"):
        raise ValueError(f"unknown sampling mode {sampling!r}")
    if sampling == "continuous" and noise.enabled and noise.sigma > 0.0:
        raise ValueError("continuous sampling is only available without noise")

    truth_half = truth.half_grid()
    t_half = np.arange(truth_half.shape[0]) * (cfg.h_obs / 2.0)
    tau_half = np.stack([torque_at(profile, tt) for tt in t_half])

    n_steps = cfg.n_obs_steps
    if sampling == "held":
        ratio = noise.h_meas / cfg.h_obs
        meas_every = max(int(round(ratio)), 1)
        if abs(ratio - meas_every) > 1e-9 * max(ratio, 1.0):
            raise ValueError("h_meas must be an integer multiple of h_obs")
    else:
        meas_every = 1
    n_meas = n_steps // meas_every + 1
    noise_on = bool(noise.enabled and noise.sigma > 0.0 and sampling == "held")
    if not noise_on:
        noise_y0 = np.zeros((1, 3))
        noise_dirs = np.zeros((1, gains.dirs.n, 3))
    elif noise_samples is not None:
        noise_y0, noise_dirs = noise_samples
        if noise_y0.shape[0] < n_meas or noise_dirs.shape[:2] != (noise_y0.shape[0], gains.dirs.n):
            raise ValueError("noise_samples do not cover the measurement schedule")
    else:
        if rng is None:
            raise ValueError("noisy runs need an rng or pre-drawn noise_samples")
        noise_y0, noise_dirs = draw_measurement_noise(rng, noise, n_meas, gains.dirs.n)

    j = np.asarray(j, dtype=float)
    states, y0_used, ys_used, bad, status = kernels.observer_run(
        variant, init.pack(), truth_half, tau_half, np.asarray(b, float),
        gains.dirs.vectors, gains.dirs.weights, gains.dirs.m_inv, j, np.linalg.inv(j),
        gains.k_r, gains.k_l, gains.k_a, gains.k_b, gains.alpha,
        cfg.h_obs, sampling == "continuous", meas_every,
        noise_on, noise_y0, noise_dirs,
    )
    if status == kernels.STATUS_NONFINITE:
        raise NonFiniteState(f"observer {variant} diverged at t={bad * cfg.h_obs:.6f}")
    if status == kernels.STATUS_DEGENERATE:
        raise DegenerateMeasurement(
            f"direction measurement collapsed at t={bad * cfg.h_obs:.6f}"
        )
    t = np.arange(n_steps + 1) * cfg.h_obs
    return ObserverRun(t=t, states=states, y0_used=y0_used, ys_used=ys_used,
                       variant=variant)
