"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class GenmarkError(Exception):
    exit_code = 3


class ValidationError(GenmarkError, ValueError):
    exit_code = 2


class DegenerateDistribution(GenmarkError, ArithmeticError):
    """Raised when a standardized moment is requested for a zero-variance return."""


class NotAChain(GenmarkError):
    pass


class CapOverflow(GenmarkError):
    pass


class SamplingError(GenmarkError):
    pass


class CertificationError(GenmarkError):
    pass
