"""Exception types raised by the toolkit.

Every error derives from :class:`RigidityError` so callers (and the CLI) can
separate domain failures from programming mistakes.
"""


class RigidityError(Exception):
    """Base class for all domain errors."""


class InvalidInput(RigidityError, ValueError):
    """Malformed graph, configuration, tolerance or attachment request."""


class DimensionMismatch(InvalidInput):
    pass


class DegenerateSpan(RigidityError):
    """Configuration lies in a proper affine subspace of R^d."""


class IncompatibleDistances(RigidityError):
    """Corresponding vertices do not have matching pairwise distances."""


class TooFewVertices(RigidityError):
    pass


class PreconditionFailed(RigidityError):
    pass


class NotComplete(RigidityError):
    pass


class NotGeneralPosition(RigidityError):
    pass


class NotPSD(RigidityError):
    pass


class KernelNotContained(RigidityError):
    pass


class NotEnoughSharedVertices(RigidityError):
    """Fewer than d+1 shared vertices where d+1 are required."""


class UncertifiedInput(RigidityError):
    pass


class NotInfinitesimallyRigid(RigidityError):
    pass


class ResidualTooLarge(RigidityError):
    pass


class EdgeAlreadyPresent(RigidityError):
    pass


class DegenerateReflection(RigidityError):
    pass


class ExhaustedRetries(RigidityError):
    pass


class GeneralPositionFailure(ExhaustedRetries):
    pass


class CertificationFailed(RigidityError):
    """Carries the failing :class:`~unirigid.stress.Certificate`."""

    def __init__(self, certificate, message=None):
        self.certificate = certificate
        super().__init__(message or f"certification failed: {', '.join(certificate.reasons)}")
