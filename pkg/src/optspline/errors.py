"""Exception hierarchy shared by all modules."""


class OptSplineError(Exception):
    """Base class for library errors."""


class InvalidArgument(OptSplineError, ValueError):
    pass


class DegenerateTriangle(InvalidArgument):
    pass


class CoverageError(OptSplineError):
    pass


class InvalidTriangulation(OptSplineError):
    pass


class GlueError(OptSplineError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotPositiveDefinite(InvalidArgument):
    pass


class NotAdmissible(OptSplineError):
    pass


class UnknownField(InvalidArgument):
    pass


class ParseError(InvalidArgument):
    def __init__(self, message, position):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class EvalError(OptSplineError, ArithmeticError):
    pass


class ModulusTooRough(OptSplineError):
    pass


class ToleranceNotReached(OptSplineError, RuntimeWarning):
    """Adaptive quadrature hit its depth cap.

    Emitted through :mod:`warnings` by default; ``estimate`` holds the
    best value found so callers can keep going.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
