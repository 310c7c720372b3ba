"""Exception types raised across the package."""


class VerificationError(Exception):
    """Base class for all errors raised by :mod:`locc_verify`."""


class NonHermitianInput(VerificationError, ValueError):
    pass


class InvalidDensityOperator(VerificationError, ValueError):
    pass


class OutOfRangeLambda(VerificationError, ValueError):
    pass


class OutOfRangeP(VerificationError, ValueError):
    pass


class SingularDenominator(VerificationError, ZeroDivisionError):
    """Raised at lambda=0, delta=1 where the two-way coefficient B is 0/0."""


class MeanConstraintViolated(VerificationError, ValueError):
    pass


class NotPsiPassing(VerificationError, ValueError):
    pass


class DegenerateStrategy(VerificationError, ValueError):
    pass


class NotSymmetrizedForm(VerificationError, ValueError):
    pass


class ConvergenceError(VerificationError, RuntimeError):
    pass


class InvalidRange(VerificationError, ValueError):
    pass


class UnknownStrategy(VerificationError, KeyError):
    pass


class CertificationFailed(VerificationError):
    pass
