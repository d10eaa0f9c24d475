"""Exception types raised by the public API.

Everything derives from QChanError, and from ValueError so that callers
who do not care about the fine-grained taxonomy can catch the usual thing.
"""


class QChanError(ValueError):
    """Base class for all qchan errors."""


class DimMismatch(QChanError):
    """Matrix or operator shapes are inconsistent with the declared dimensions."""


class NonFinite(QChanError):
    """Input contains NaN or Inf entries."""


class NotHermitian(QChanError):
    """Matrix violates the Hermitian symmetry tolerance."""


class NotPSD(QChanError):
    """Matrix has an eigenvalue below the positive-semidefinite clamp tolerance."""


class NotTracePreserving(QChanError):
    """Kraus set fails the trace-preservation gate."""


class NotCPTP(QChanError):
    """Channel fails complete positivity or trace preservation."""


class NotUnitary(QChanError):
    """Matrix is not unitary within tolerance."""


class NotIsometry(QChanError):
    """Matrix columns are not orthonormal within tolerance."""


class RankMismatch(QChanError):
    """Orbit parameter has the wrong number of columns for the channel's Kraus rank."""


class BadParameter(QChanError):
    """Constructor parameter outside its admissible range."""


class ManifoldViolation(QChanError):
    """Point is too far from the Stiefel manifold to evaluate on."""


class SpectrumTooSingular(QChanError):
    """Entropy gradient requested at a near-singular output state."""
