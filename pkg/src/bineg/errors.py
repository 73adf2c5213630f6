"""Exception hierarchy shared by all modules."""


class BinegError(Exception):
    """Base class for every error raised by this package."""


class NonHermitianInput(BinegError, ValueError):
    pass


class NotPSD(BinegError, ValueError):
    pass


class NotNormalizable(BinegError, ValueError):
    pass


class InvalidProbabilityVector(BinegError, ValueError):
    pass


class StateFileError(BinegError, ValueError):
    """Malformed or inconsistent state file payload."""


class DegenerateNegativeSpectrum(BinegError, ArithmeticError):
    """More than one negative eigenvalue of a two-qubit partial transpose."""


class NotEntangled(BinegError, ValueError):
    pass


class NonConvergent(BinegError, ArithmeticError):
    pass


class FullRankInput(BinegError, ValueError):
    pass


class RankAlready3(BinegError, ValueError):
    """Signal that regularization is not needed."""


class P0TooLarge(BinegError, ValueError):
    pass


class DegeneratePlane(BinegError, ValueError):
    pass


class CertificateFailure(BinegError, ArithmeticError):
    """A certificate invariant failed.

    ``invariant`` names the broken check and ``margins`` holds every
    margin computed before the failure.
    """

    def __init__(self, invariant, margins=None):
        self.invariant = invariant
        self.margins = dict(margins or {})
        super().__init__(f"certificate invariant failed: {invariant}")
