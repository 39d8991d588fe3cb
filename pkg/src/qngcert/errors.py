"""Exception and warning types raised across the package."""


class QngError(Exception):
    """Base class for all package errors."""


class ParameterOutOfRange(QngError, ValueError):
    pass


class BasisMismatch(QngError, ValueError):
    pass


class CutoffTooSmall(QngError, ValueError):
    pass


class ZeroState(QngError, ArithmeticError):
    """An operation annihilated the state (norm below 1e-14)."""


class NotDerived(QngError, RuntimeError):
    """The analytical overlap formula failed its validation against matrix products."""


class LeakageTooLarge(QngError, ValueError):
    pass


class ObjectiveNonFinite(QngError, FloatingPointError):
    pass


class InvalidConfig(QngError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """Truncated operator deviates from unitarity beyond 1e-6 on interior columns."""


class NotConvergedWarning(UserWarning):
    """Threshold still moving at the largest cutoff of the escalation schedule."""


class NonMonotoneFidelity(UserWarning):
    """Lossy fidelity decreased somewhere on the verification grid."""


class NoMargin(UserWarning):
    """Threshold is 1, so no amount of loss can be tolerated."""
