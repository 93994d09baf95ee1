"""Exception types shared across the package."""


class PadicProbError(Exception):
    """Base class for all package errors."""


class SpaceMismatch(PadicProbError):
    """Operands live on different spaces (prime or depth differ)."""


class PrimeClash(PadicProbError):
    """The state prime p and the value prime s are required to differ."""


class DepthExceeded(PadicProbError):
    """A refinement level beyond the space depth was requested."""


class DomainError(PadicProbError):
    """An argument lies outside the domain of a series or valuation."""


class OrderMismatch(PadicProbError):
    """Root-of-unity orders are incompatible."""


class NormNotOne(PadicProbError):
    """Probability normalization requires measure norm exactly 1."""


class TimesNotDistinct(PadicProbError):
    """Time labels in a tuple must be pairwise distinct."""


class NotSubTuple(PadicProbError):
    """The projection target is not a sub-tuple anchored at t0."""


class BudgetExceeded(PadicProbError):
    """A product leaf space exceeds the configured tuple budget."""


class WitnessNotFound(PadicProbError):
    """No unboundedness witness exists within the search budget."""


class PairsOverlap(PadicProbError):
    """Increment intervals share a time label."""


class SizeMismatch(PadicProbError):
    """Configurations of different cardinality cannot be compared."""


class CoordinatesCollide(PadicProbError):
    """Tuple coordinates must be pairwise distinct."""


class TruncationExceeded(PadicProbError):
    """Requested point counts exceed the Poisson truncation level."""


class RadiusViolation(PadicProbError):
    """An exponential argument lies outside the convergence ball."""


class NotSubBall(PadicProbError):
    """Restriction requires a sub-ball of the original region."""


class BaseNotIdempotent(PadicProbError):
    """The Poisson base measure must satisfy P * P = P."""


class UnknownSuite(PadicProbError):
    """Unrecognized verification suite name."""


class ScenarioParseError(PadicProbError):
    """Scenario file is malformed; carries line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = "" if line is None else " (line %d, column %d)" % (line, column or 1)
        super().__init__(message + where)
