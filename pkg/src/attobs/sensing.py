"""Measured outputs: biased body rate y0 and body-frame direction
observations y_i = R^T v_i, with the benchmark noise model and the
scenario sampling laws used by the Monte Carlo study."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import so3
from .exceptions import DegenerateDirections, DegenerateMeasurement, NonDistinctSpectrum
from .rigidbody import RigidBodyState

EIGENGAP_TOL = 1e-6


@dataclass(frozen=True)
class DirectionSet:
    """Known inertial directions v_i with positive weights k_i.

    The weighted outer-product matrix M = sum_i k_i v_i v_i^T must have
    three distinct eigenvalues; its eigenbasis (ascending eigenvalues,
    determinant fixed to +1) defines the frame of the four attitude
    equilibria of the direction innovation.
    """

    vectors: np.ndarray                       # (n, 3)
    weights: np.ndarray                       # (n,)
    m_matrix: np.ndarray = field(init=False)
    m_inv: np.ndarray = field(init=False)
    eigenvalues: np.ndarray = field(init=False)   # ascending
    eigenbasis: np.ndarray = field(init=False)    # columns, det +1

    def __post_init__(self):
        vs = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        ks = np.asarray(self.weights, dtype=float)
        if vs.shape[0] < 3 or vs.shape[1] != 3:
            raise DegenerateDirections(f"need at least 3 directions, got shape {vs.shape}")
        if ks.shape != (vs.shape[0],) or np.any(ks <= 0.0):
            raise ValueError("weights must be positive, one per direction")
        m = np.einsum("i,ij,ik->jk", ks, vs, vs)
        lam, u = np.linalg.eigh(m)
        if np.min(np.diff(lam)) <= EIGENGAP_TOL:
            raise NonDistinctSpectrum(
                f"weighted direction matrix has eigenvalue gaps {np.diff(lam)}"
            )
        if np.linalg.det(u) < 0.0:
            u = u.copy()
            u[:, -1] = -u[:, -1]
        object.__setattr__(self, "vectors", vs)
        object.__setattr__(self, "weights", ks)
        object.__setattr__(self, "m_matrix", m)
        object.__setattr__(self, "m_inv", np.linalg.inv(m))
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenbasis", u)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def make_direction_set(v1, v2, weights) -> DirectionSet:
    """Build {v1, v2, v1 x v2} with the given weights.

    v1 and v2 must be non-parallel; the distinct-spectrum requirement on
    M is checked by the DirectionSet constructor.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    cosang = abs(v1 @ v2) / (np.linalg.norm(v1) * np.linalg.norm(v2))
    if cosang >= 1.0 - 1e-9:
        raise DegenerateDirections(f"directions are parallel (|cos| = {cosang:.12f})")
    return DirectionSet(vectors=np.vstack([v1, v2, np.cross(v1, v2)]),
                        weights=np.asarray(weights, dtype=float))


def sample_direction_pair(rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw the benchmark direction pair.

    v1 is fixed at (0, 0, -1). v2 comes from a standard Gaussian whose
    last component is overwritten with -0.1 before dividing by the
    1-norm, so v2 is unit in the 1-norm (not the 2-norm); this mirrors
    the published sampling law as stated.
    """
    v1 = np.array([0.0, 0.0, -1.0])
    while True:
        v2 = rng.standard_normal(3)
        v2[2] = -0.1
        n1 = np.abs(v2).sum()
        if n1 > 1e-9 and np.linalg.norm(v2[:2]) > 1e-9:
            return v1, v2 / n1


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian measurement noise and the output sampling period."""

    sigma: float = 0.1
    enabled: bool = True
    h_meas: float = 0.002

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if self.h_meas <= 0.0:
            raise ValueError("h_meas must be positive")


@dataclass(frozen=True)
class MeasurementSet:
    """One sample of the outputs: y0 = omega + b (+noise) and the
    body-frame directions (2-normalized when noisy)."""

    y0: np.ndarray     # (3,)
    y: np.ndarray      # (n, 3)
    t: float = 0.0


def measure(state: RigidBodyState, b, dirs: DirectionSet, noise: NoiseConfig,
            rng=None, t: float = 0.0) -> MeasurementSet:
    """Generate the outputs for one truth state.

    Noise-free mode returns the exact outputs. Noisy mode adds i.i.d.
    sigma * N(0, I) to y0 and to each direction before 2-normalizing it.
    """
    b = np.asarray(b, dtype=float)
    r = state.rotation
    y0 = state.omega + b
    ys = dirs.vectors @ r   # rows R^T v_i
    if noise.enabled and noise.sigma > 0.0:
        if rng is None:
            raise ValueError("noisy measurements need an rng")
        y0 = y0 + noise.sigma * rng.standard_normal(3)
        ys = ys + noise.sigma * rng.standard_normal(ys.shape)
        norms = np.linalg.norm(ys, axis=1)
        if np.any(norms < 1e-9):
            raise DegenerateMeasurement("noisy direction measurement has near-zero norm")
        ys = ys / norms[:, None]
    return MeasurementSet(y0=y0, y=ys, t=t)


@dataclass(frozen=True)
class Scenario:
    """Everything one simulation run needs besides gains and step sizes."""

    q0: np.ndarray        # truth attitude
    omega0: np.ndarray
    b: np.ndarray         # constant gyro bias
    qhat0: np.ndarray     # observer initial attitude
    lhat0: np.ndarray
    bhat0: np.ndarray
    j: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def direction_set(self, weights) -> DirectionSet:
        return make_direction_set(self.v1, self.v2, weights)

    def truth_init(self) -> RigidBodyState:
        return RigidBodyState(q=self.q0, omega=self.omega0)


def sample_scenario(rng, weights=(1.1, 1.2, 1.3), max_tries: int = 100) -> Scenario:
    """Draw a full scenario from the benchmark distributions.

    R0, Rhat0 ~ uniform SO(3); b, bhat0, lhat0 ~ N(0, I);
    omega0 ~ N(0, 0.1 I); J from the [0.5, 1.0]-spectrum construction;
    v1, v2 from :func:`sample_direction_pair`. Direction pairs whose
    weighted matrix has near-repeated eigenvalues are redrawn.
    """
    q0 = so3.sample_uniform_quaternion(rng)
    b = rng.standard_normal(3)
    omega0 = np.sqrt(0.1) * rng.standard_normal(3)
    qhat0 = so3.sample_uniform_quaternion(rng)
    bhat0 = rng.standard_normal(3)
    lhat0 = rng.standard_normal(3)
    j = so3.sample_inertia(rng)
    for _ in range(max_tries):
        v1, v2 = sample_direction_pair(rng)
        try:
            make_direction_set(v1, v2, np.asarray(weights, dtype=float))
        except (DegenerateDirections, NonDistinctSpectrum):
            continue
        return Scenario(q0=q0, omega0=omega0, b=b, qhat0=qhat0, lhat0=lhat0,
                        bhat0=bhat0, j=j, v1=v1, v2=v2)
    raise NonDistinctSpectrum(f"no valid direction pair in {max_tries} draws")
