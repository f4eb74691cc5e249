"""Exception hierarchy shared by all torusrot modules."""


class TorusRotError(Exception):
    """Base class for every error raised by torusrot."""


class ArgumentError(TorusRotError, ValueError):
    """An argument violates an operation's precondition."""


class ExpressionError(TorusRotError, ValueError):
    """Base for map-expression problems. ``offset`` is a 0-based column."""

    def __init__(self, message, offset=None, source=None):
        self.offset = offset
        self.source = source
        if offset is not None:
            message = f"{message} at offset {offset}"
        super().__init__(message)


class ExprSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class ArityError(ExpressionError):
    pass


class UnsupportedOperationError(ExpressionError):
    """Raised when a construct cannot be differentiated symbolically."""


class EvaluationFault(TorusRotError, ArithmeticError):
    """A map evaluation produced a non-finite value.

    ``point`` is the plane point being evaluated (or the grid seed whose
    orbit failed), ``location`` a human-readable pointer into the map
    definition when one is known.
    """

    def __init__(self, message, point=None, location=None):
        self.point = point
        self.location = location
        parts = [message]
        if location is not None:
            parts.append(f"in {location}")
        if point is not None:
            parts.append(f"at point ({point[0]!r}, {point[1]!r})")
        super().__init__(" ".join(parts))


class PeriodicityError(TorusRotError, ValueError):
    """An expression map failed the deck-commutation check at load time."""


class EmptyIntersectionError(TorusRotError, ValueError):
    """Half-plane refinement produced an empty polygon."""


class InternalLogicError(TorusRotError, RuntimeError):
    """An invariant that should hold by construction was violated."""


class ConfigError(TorusRotError, ValueError):
    """Malformed or incomplete run configuration."""

    def __init__(self, message, line=None):
        self.line = line
        self.message = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
