"""Exception hierarchy shared by all epsnet modules."""


class EpsnetError(Exception):
    """Base class for every error raised by the engine."""


class ExprSyntaxError(EpsnetError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifier(ExprSyntaxError):
    pass


class DimensionMismatch(EpsnetError):
    pass


class EvaluationError(EpsnetError):
    """Domain violation during evaluation; ``node`` is the offending sub-expression."""

    def __init__(self, message, node=None, location=None):
        self.node = node
        self.location = location
        super().__init__(message)


class DifferentiationError(EpsnetError):
    pass


class InsufficientData(EpsnetError):
    pass


class GridMismatch(EpsnetError):
    pass


class CBoundednessViolation(EpsnetError):
    def __init__(self, message, eps=None, point=None):
        self.eps = eps
        self.point = point
        super().__init__(message)


class PreconditionViolated(EpsnetError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class MollifierError(EpsnetError):
    pass


class ScenarioError(EpsnetError):
    def __init__(self, message, pointer=""):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")
