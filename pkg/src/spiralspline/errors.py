"""Exception hierarchy.

Every error carries a short ``kind`` string so batch reports can record
failures without holding on to exception objects.
"""

from __future__ import annotations


class SpiralSplineError(Exception):
    kind = "Error"


class ProblemError(SpiralSplineError, ValueError):
    """Malformed interpolation problem (before any geometry is checked)."""

    kind = "InvalidProblem"


class NonMonotoneTimes(ProblemError):
    kind = "NonMonotoneTimes"


class CountMismatch(ProblemError):
    kind = "CountMismatch"


class ParseError(ProblemError):
    kind = "ParseError"

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.field = field


class ValidationError(SpiralSplineError, ValueError):
    """Data rejected by the admissibility checks."""

    kind = "ValidationError"

    def __init__(self, message: str, segment: int | None = None):
        super().__init__(message)
        self.segment = segment


class ChordTooLong(ValidationError):
    kind = "ChordTooLong"


class CurvatureTooSmall(ValidationError):
    kind = "CurvatureTooSmall"


class GapRatio(ValidationError):
    kind = "GapRatio"


class ZeroChord(ValidationError):
    kind = "ZeroChord"


class OutOfDomain(SpiralSplineError, ValueError):
    kind = "OutOfDomain"


class SingularSystem(SpiralSplineError, ArithmeticError):
    kind = "SingularSystem"


class NegativeDiscriminant(SpiralSplineError, ArithmeticError):
    """A square-root argument in the asymptotic equations is not positive.

    ``index`` is the 0-based segment whose discriminant failed.
    """

    kind = "NegativeDiscriminant"

    def __init__(self, message: str, index: int, value: float):
        super().__init__(message)
        self.index = index
        self.value = value


class ExtensionPresent(SpiralSplineError, ValueError):
    kind = "ExtensionPresent"


class ContinuityViolated(SpiralSplineError, ValueError):
    kind = "ContinuityViolated"


class NoConvergence(SpiralSplineError, RuntimeError):
    """Nonlinear solve gave up; ``best`` holds the best iterate found."""

    kind = "NoConvergence"

    def __init__(self, message: str, best=None, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations


class SingularJacobian(SpiralSplineError, ArithmeticError):
    kind = "SingularJacobian"


class ConstraintViolated(SpiralSplineError, RuntimeError):
    kind = "ConstraintViolated"

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual
