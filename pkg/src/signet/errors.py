"""Exception hierarchy.

Validation problems (bad inputs, violated preconditions) map to CLI exit
code 2; numerical failures (non-convergence, singular pencils) map to 3.
"""

from __future__ import annotations


class SignetError(Exception):
    exit_code = 1


class ValidationError(SignetError, ValueError):
    exit_code = 2


class NumericalError(SignetError, ArithmeticError):
    exit_code = 3


# graph construction
class IndexOutOfRange(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class NonFiniteWeight(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class ZeroDegreeVertex(NumericalError):
    pass


# generator
class InvalidParams(ValidationError):
    pass


# eigensolver / embeddings
class IndefiniteMassMatrix(NumericalError):
    pass


class SingularPencil(NumericalError):
    pass


class NotConverged(NumericalError):
    """Raised only on request; carries the best Ritz pairs found."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# clustering / metrics
class TooFewPoints(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class NotOrthonormal(ValidationError):
    pass


# theory
class OddN(ValidationError):
    pass


class ConditionViolated(ValidationError):
    pass


class PTooSmallForChernoff(ValidationError):
    pass


class HypothesisViolated(ValidationError):
    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []


# time series
class NonPositivePrice(ValidationError):
    pass


class MissingBenchmark(ValidationError):
    pass


class ZeroVarianceSeries(ValidationError):
    pass
