"""Exception hierarchy shared by the engine and the command layer.

Every error raised on purpose by jetspencer derives from `JetSpencerError`.
The command layer maps `InconclusiveError` subclasses to the "inconclusive"
exit status and everything else to a plain failure.
"""

__all__ = [
    "BoundsExhaustedError",
    "DimensionMismatchError",
    "DslSyntaxError",
    "InconclusiveError",
    "IrrationalEigenvalueError",
    "JetSpencerError",
    "NonPolynomialCoefficientError",
    "NotFiniteTypeError",
    "NotTorsionError",
    "PreconditionError",
    "RegularityNotFoundError",
    "UndeclaredVariableError",
    "UnknownCatalogError",
    "UnknownCommandError",
]


class JetSpencerError(Exception):
    """Base class for every deliberate jetspencer failure."""


class InconclusiveError(JetSpencerError):
    """A computation ran out of its bounds before reaching a verdict."""


class BoundsExhaustedError(InconclusiveError):
    """An order or degree bound was reached before a search stabilized."""


class RegularityNotFoundError(InconclusiveError):
    """No δ-regular coordinate system was found within the retry budget."""


class DimensionMismatchError(JetSpencerError, ValueError):
    """Operator shapes do not line up (e.g. columns of P against rows of Q)."""


class PreconditionError(JetSpencerError, ValueError):
    """An operation was called on data outside its documented domain."""


class NotFiniteTypeError(PreconditionError):
    """The symbol g_{q+1} does not vanish."""


class NotTorsionError(PreconditionError):
    """A module presentation has a free part."""


class IrrationalEigenvalueError(JetSpencerError):
    """An invariant factor does not split into linear factors over ℚ."""


class UnknownCatalogError(JetSpencerError, KeyError):
    """The requested catalog entry does not exist for that dimension."""

    def __str__(self) -> str:
        """Return the plain message instead of the quoted `KeyError` form."""
        return str(self.args[0]) if self.args else ""


class UnknownCommandError(JetSpencerError):
    """The command name is not part of the command surface."""


class DslSyntaxError(JetSpencerError):
    """A `.pde` source does not follow the grammar.

    Attributes:
        line: 1-based line of the offending token.
        column: 1-based column of the offending token.
    """

    def __init__(self, message: str, line: int, column: int) -> None:
        """Store the position and build a located message."""
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UndeclaredVariableError(DslSyntaxError):
    """An identifier is neither a declared variable nor a declared unknown."""


class NonPolynomialCoefficientError(DslSyntaxError):
    """A coefficient divides by a variable or uses a negative exponent."""
