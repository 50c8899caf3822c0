"""Ground-truth rigid-body simulation: Euler equations driven by a torque
profile, integrated with fixed-step RK4 and quaternion re-projection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, so3
from .exceptions import NonFiniteState

TORQUE_KINDS = {
    "sinusoid": kernels.TORQUE_SINUSOID,
    "zero": kernels.TORQUE_ZERO,
    "constant": kernels.TORQUE_CONSTANT,
}


@dataclass(frozen=True)
class RigidBodyState:
    """Truth attitude (body-to-inertial quaternion) and body rate."""

    q: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", so3.check_unit_quaternion(np.asarray(self.q, float)))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if not np.all(np.isfinite(self.omega)):
            raise NonFiniteState("omega contains non-finite components")

    @property
    def rotation(self) -> np.ndarray:
        return so3.quat_to_rot(self.q)


@dataclass(frozen=True)
class TorqueProfile:
    """Body-frame torque as a function of time.

    kind: "sinusoid" (the benchmark profile (sin(t+1), sin(2t+2), sin(3t+3))),
    "zero", or "constant" with the given value.
    """

    kind: str = "sinusoid"
    value: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.kind not in TORQUE_KINDS:
            raise ValueError(f"unknown torque kind {self.kind!r}")
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float))
        if not np.all(np.isfinite(self.value)):
            raise ValueError("constant torque must be finite")

    @property
    def kind_code(self) -> int:
        return TORQUE_KINDS[self.kind]


def torque_at(profile: TorqueProfile, t: float) -> np.ndarray:
    """Evaluate the torque profile at time t."""
    return kernels._torque_at(profile.kind_code, profile.value, float(t))


@dataclass(frozen=True)
class IntegratorConfig:
    """Step sizes for the truth (h_truth) and observer (h_obs) grids.

    h_obs must be an integer multiple of h_truth so observer steps land
    exactly on truth samples; an even multiple additionally lets the
    continuous-sampling observer read truth at RK4 half-steps.
    """

    h_truth: float = 1e-4
    h_obs: float = 1e-3
    duration: float = 10.0

    def __post_init__(self):
        if not (0.0 < self.h_truth <= self.h_obs):
            raise ValueError("need 0 < h_truth <= h_obs")
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        m = self.h_obs / self.h_truth
        if abs(m - round(m)) > 1e-9 * m:
            raise ValueError("h_obs must be an integer multiple of h_truth")

    @property
    def steps_per_obs(self) -> int:
        return int(round(self.h_obs / self.h_truth))

    @property
    def n_obs_steps(self) -> int:
        n = self.duration / self.h_obs
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise ValueError("duration must be an integer number of observer steps")
        return int(round(n))

    @property
    def n_truth_steps(self) -> int:
        return self.n_obs_steps * self.steps_per_obs


def dynamics_derivative(state: RigidBodyState, j, tau) -> tuple[np.ndarray, np.ndarray]:
    """(qdot, omegadot) of the attitude dynamics J wdot = S(Jw) w + tau."""
    j = np.asarray(j, dtype=float)
    x = np.concatenate([state.q, state.omega])
    d = kernels._rigid_deriv(x, np.asarray(tau, dtype=float), j, np.linalg.inv(j))
    return d[:4], d[4:]


def rk4_step(deriv, x, t: float, h: float) -> np.ndarray:
    """Classic RK4 update for dx/dt = deriv(x, t) on a flat state vector.

    Generic helper used by tests and the reference (non-kernel) paths;
    no quaternion projection is applied here.
    """
    k1 = deriv(x, t)
    k2 = deriv(x + 0.5 * h * k1, t + 0.5 * h)
    k3 = deriv(x + 0.5 * h * k2, t + 0.5 * h)
    k4 = deriv(x + h * k3, t + h)
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"non-finite state after step at t={t}")
    return out


def rigid_rk4_step(state: RigidBodyState, j, profile: TorqueProfile, t: float,
                   h: float) -> RigidBodyState:
    """One RK4 step of the truth dynamics with quaternion re-projection."""
    j = np.asarray(j, dtype=float)
    jinv = np.linalg.inv(j)

    def deriv(x, tt):
        return kernels._rigid_deriv(x, torque_at(profile, tt), j, jinv)

    x = rk4_step(deriv, np.concatenate([state.q, state.omega]), t, h)
    return RigidBodyState(q=so3.quat_normalize(x[:4]), omega=x[4:])


@dataclass(frozen=True)
class TruthTrajectory:
    """Truth states on the h_truth grid, plus cached observer-grid views."""

    t: np.ndarray        # (n+1,)
    states: np.ndarray   # (n+1, 7) rows (q, omega)
    cfg: IntegratorConfig

    @property
    def q(self) -> np.ndarray:
        return self.states[:, :4]

    @property
    def omega(self) -> np.ndarray:
        return self.states[:, 4:]

    def half_grid(self) -> np.ndarray:
        """Truth states at h_obs/2 spacing (needs an even step ratio)."""
        m = self.cfg.steps_per_obs
        if m % 2 != 0:
            raise ValueError("h_obs / h_truth must be even for half-grid access")
        return self.states[:: m // 2]

    def observer_grid(self) -> np.ndarray:
        return self.states[:: self.cfg.steps_per_obs]


def simulate_truth(init: RigidBodyState, j, profile: TorqueProfile,
                   cfg: IntegratorConfig) -> TruthTrajectory:
    """Integrate the truth dynamics over cfg.duration at h_truth."""
    j = so3.check_inertia(j)
    x0 = np.concatenate([init.q, init.omega])
    n = cfg.n_truth_steps
    states, bad = kernels.truth_rk4(x0, j, np.linalg.inv(j), profile.kind_code,
                                    profile.value, cfg.h_truth, n)
    if bad >= 0:
        raise NonFiniteState(f"truth integration diverged at t={bad * cfg.h_truth:.6f}")
    t = np.arange(n + 1) * cfg.h_truth
    return TruthTrajectory(t=t, states=states, cfg=cfg)
