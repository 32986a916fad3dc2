"""Exception hierarchy.

Every error carries the process exit code the command line front end
maps it to: 2 validation, 3 numerical singularity, 4 enumeration cap,
5 report of a violated ray-positivity conjecture.
"""


class PlsGeomError(Exception):
    exit_code = 1


class ValidationError(PlsGeomError, ValueError):
    exit_code = 2


class NonSymmetric(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class RepeatedEigenvalue(ValidationError):
    pass


class InvalidDimension(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class SubsetSizeMismatch(ValidationError):
    pass


class ZeroVector(ValidationError):
    pass


class InadmissibleSignature(ValidationError):
    pass


class NonPositiveWeight(ValidationError):
    pass


class NotInCone(ValidationError):
    pass


class NumericalError(PlsGeomError, ArithmeticError):
    exit_code = 3


class SingularSystem(NumericalError):
    pass


class SingularKrylovSystem(SingularSystem):
    pass


class InsufficientSupport(SingularSystem):
    pass


class CrossCheckFailure(NumericalError):
    pass


class FdMismatch(NumericalError):
    pass


class StallDetected(NumericalError):
    pass


class EnumerationCapExceeded(PlsGeomError):
    exit_code = 4


class CapExceeded(EnumerationCapExceeded):
    pass


class PositivityFailure(PlsGeomError):
    exit_code = 5
