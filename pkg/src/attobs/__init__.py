"""attobs: nonlinear attitude, rate and gyro-bias observers for rigid-body
dynamics, with a simulation, Monte Carlo benchmarking and numerical
stability-verification toolkit."""

from .analysis import (
    ErrorState,
    error_state,
    fit_log10_slope,
    lyapunov_value,
    psi_to_equilibria,
    trajectory_diagnostics,
)
from .certificate import (
    CertificateConstants,
    certificate_constants,
    local_stability_certificate,
    momentum_error_gain,
)
from .config import RunConfig, load_config
from .exceptions import (
    AttobsError,
    CertificateFailed,
    ConfigError,
    DegenerateDirections,
    DegenerateMeasurement,
    InvalidInertia,
    InvalidQuaternion,
    InvalidRotation,
    NonDistinctSpectrum,
    NonFiniteState,
    NotSkewSymmetric,
    SingularFrequency,
)
from .linearize import (
    LinearizedModel,
    OperatingPoint,
    frequency_response_sigma,
    linearize_error_dynamics,
    spectrum_vs_alpha,
)
from .montecarlo import RmseReport, monte_carlo_rmse
from .observers import (
    InnovationTerms,
    ObserverGains,
    ObserverRun,
    ObserverState,
    innovation,
    innovation_terms,
    momentum_mismatch,
    observer_derivative,
    observer_step,
    omega_estimate,
    reconstruct_attitude,
    run_observer,
)
from .rigidbody import (
    IntegratorConfig,
    RigidBodyState,
    TorqueProfile,
    TruthTrajectory,
    dynamics_derivative,
    rigid_rk4_step,
    rk4_step,
    simulate_truth,
    torque_at,
)
from .sensing import (
    DirectionSet,
    MeasurementSet,
    NoiseConfig,
    Scenario,
    make_direction_set,
    measure,
    sample_direction_pair,
    sample_scenario,
)
from .so3 import (
    psi_metric,
    quat_kinematics_matrix,
    quat_multiply,
    quat_normalize,
    quat_to_rot,
    rot_to_quat,
    sample_inertia,
    sample_uniform_rotation,
    skew,
    unskew,
)

__version__ = "0.1.0"
