"""Exception types shared across the package."""


class TraceshiftError(Exception):
    """Base class for all package errors."""


class ClassViolation(TraceshiftError):
    """Matrix fails the invariant of the requested operator class."""

    def __init__(self, kind, defect, tol):
        self.kind = kind
        self.defect = defect
        self.tol = tol
        super().__init__(f"{kind} invariant violated: defect {defect:.3e} > tol {tol:.3e}")


class NotNormal(TraceshiftError):
    """Matrix does not commute with its adjoint within tolerance."""


class ClusterAmbiguity(TraceshiftError):
    """Eigenvalue clustering is not stable at the requested tolerance."""


class InvalidP(TraceshiftError):
    """Schatten exponent must satisfy p >= 1 or p = inf."""


class NegativeEigenvalue(TraceshiftError):
    """Defect operator has an eigenvalue below the clamping tolerance."""


class DimensionMismatch(TraceshiftError):
    """Operands have incompatible shapes."""


class PartitionOverflow(TraceshiftError):
    """Derivative order exceeds the composition-enumeration cap."""


class TermLimitExceeded(TraceshiftError):
    """Joint eigen-sum would exceed the configured term budget."""


class SpectrumTooClustered(TraceshiftError):
    """Recursive symbol evaluation requires pairwise-separated points."""


class DepthTooSmall(TraceshiftError):
    """Dilation depth does not cover the requested monomial degrees."""


class SingularResolvent(TraceshiftError):
    """Cayley transform denominator is not invertible."""


class OnePointSpectrum(TraceshiftError):
    """Inverse Cayley transform requires 1 to stay away from the spectrum."""


class SingularFactor(TraceshiftError):
    """A factor in the resolvent chain is not invertible."""


class SupportExceedsProbes(TraceshiftError):
    """Test function has Fourier support outside the probed degree range."""


class QuadratureDivergence(TraceshiftError):
    """Theta-sweep gap fails to decrease as the cutoff shrinks."""


class SeparationUnreachable(TraceshiftError):
    """Could not draw an instance with the required spectral separation."""


class ConfigError(TraceshiftError):
    """Run configuration failed validation."""
