"""The nominal benchmark scenario and tuning used throughout the docs,
tests and CLI defaults.

The attitude matrices below are published two-decimal roundings of one
random realization; they are projected back onto SO(3) before use so the
constructors accept them. The third reference direction is the cross
product of the first two.
"""

from __future__ import annotations

import numpy as np

from .observers import ObserverGains, ObserverState
from .rigidbody import IntegratorConfig, TorqueProfile
from .sensing import NoiseConfig, Scenario, make_direction_set
from .so3 import project_to_so3, rot_to_quat

NOMINAL_R0 = project_to_so3(np.array([
    [0.18, 0.97, -0.15],
    [0.08, 0.14, 0.99],
    [0.98, -0.19, -0.06],
]))
NOMINAL_RHAT0 = project_to_so3(np.array([
    [0.35, 0.06, 0.94],
    [0.84, 0.42, -0.34],
    [-0.41, 0.91, 0.09],
]))
NOMINAL_OMEGA0 = np.array([-0.11, 0.02, -0.06])
NOMINAL_BIAS = np.array([-0.12, -2.54, 0.28])
NOMINAL_LHAT0 = np.array([-1.12, 0.05, -1.24])
NOMINAL_BHAT0 = np.array([-0.83, 0.54, 0.11])
NOMINAL_J = np.array([
    [0.91, 0.03, 0.14],
    [0.03, 0.73, 0.15],
    [0.14, 0.15, 0.64],
])
NOMINAL_V1 = np.array([0.0, 0.0, -1.0])
NOMINAL_V2 = np.array([-0.87, -0.50, -0.05])
NOMINAL_WEIGHTS = np.array([1.1, 1.2, 1.3])


def nominal_scenario() -> Scenario:
    return Scenario(
        q0=rot_to_quat(NOMINAL_R0),
        omega0=NOMINAL_OMEGA0.copy(),
        b=NOMINAL_BIAS.copy(),
        qhat0=rot_to_quat(NOMINAL_RHAT0),
        lhat0=NOMINAL_LHAT0.copy(),
        bhat0=NOMINAL_BHAT0.copy(),
        j=NOMINAL_J.copy(),
        v1=NOMINAL_V1.copy(),
        v2=NOMINAL_V2.copy(),
    )


def nominal_gains(alpha: float = 0.3) -> ObserverGains:
    dirs = make_direction_set(NOMINAL_V1, NOMINAL_V2, NOMINAL_WEIGHTS)
    return ObserverGains(dirs=dirs, k_r=2.0, k_l=2.0, k_a=1.0, k_b=4.0, alpha=alpha)


def nominal_torque() -> TorqueProfile:
    return TorqueProfile(kind="sinusoid")


def nominal_integrator() -> IntegratorConfig:
    return IntegratorConfig(h_truth=1e-4, h_obs=1e-3, duration=10.0)


def nominal_noise(enabled: bool = False) -> NoiseConfig:
    return NoiseConfig(sigma=0.1, enabled=enabled, h_meas=0.002)


def nominal_observer_init() -> ObserverState:
    s = nominal_scenario()
    return ObserverState(b_hat=s.bhat0, l_hat=s.lhat0, q_hat=s.qhat0)
