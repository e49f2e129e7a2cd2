"""Exception types shared across the package."""


class ShadowlabError(Exception):
    """Base class for all package errors."""


class WindowCapError(ShadowlabError, ValueError):
    """A vector window would exceed the configured width cap."""


class CertificateMismatchError(ShadowlabError, ValueError):
    """A certificate was used with an operator or family it was not built for."""


class ContractionError(ShadowlabError, ValueError):
    """The fixed-point iteration for a perturbed inverse is not a contraction."""


class ChainError(ShadowlabError, ValueError):
    """A pseudotrajectory violates its defect bound or shape invariants."""


class ExpansivityInputError(ShadowlabError, ValueError):
    """Bad input to an expansivity routine (zero vector, off-sphere sample)."""
