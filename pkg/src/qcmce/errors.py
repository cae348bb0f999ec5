"""Exception hierarchy; the CLI maps each class to its own exit code."""


class QcmceError(Exception):
    exit_code = 1


class ValidationError(QcmceError, ValueError):
    exit_code = 3


class DimensionError(ValidationError):
    pass


class InfeasibleProfile(ValidationError):
    pass


class Singular(QcmceError, ArithmeticError):
    exit_code = 3


class GenerationExhausted(QcmceError, RuntimeError):
    exit_code = 4


class DecodingFailure(QcmceError):
    exit_code = 5


class DesignError(QcmceError):
    exit_code = 3
