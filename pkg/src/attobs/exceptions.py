"""Exception types raised by validation and simulation code."""


class AttobsError(Exception):
    """Base class for all package-specific errors."""


class InvalidRotation(AttobsError):
    """Matrix fails the orthogonality / determinant checks for a rotation."""


class InvalidQuaternion(AttobsError):
    """Quaternion norm is not one within tolerance."""


class InvalidInertia(AttobsError):
    """Inertia matrix is not symmetric positive definite."""


class NotSkewSymmetric(AttobsError):
    """Matrix passed to unskew() is not skew-symmetric within tolerance."""


class DegenerateDirections(AttobsError):
    """Reference directions are (near) parallel."""


class NonDistinctSpectrum(AttobsError):
    """Weighted direction matrix has (near) repeated eigenvalues."""


class DegenerateMeasurement(AttobsError):
    """A noisy direction measurement collapsed to (near) zero norm."""


class NonFiniteState(AttobsError):
    """Integration produced a NaN or infinite state component."""


class SingularFrequency(AttobsError):
    """(i*w*I - A) is numerically singular at a requested frequency."""


class CertificateFailed(AttobsError):
    """A positive-definiteness check of the stability certificate failed."""


class ConfigError(AttobsError):
    """Run configuration file is malformed or contains unknown entries."""
