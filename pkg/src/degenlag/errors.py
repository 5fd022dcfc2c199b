"""Exception types shared across the package."""


class DegenlagError(Exception):
    """Base class for every error this package raises deliberately."""


class ParseError(DegenlagError):
    """Syntax error in an expression string.

    The ``position`` attribute is the 0-based character offset at which
    parsing failed.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ParseError):
    """An identifier that is neither a known function nor a chart coordinate."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier '{name}'", position)
        self.name = name


class EvaluationError(DegenlagError):
    """Base class for failures while evaluating an expression at a point."""


class DomainError(EvaluationError):
    """Evaluation left the real domain (division by zero, log of a
    non-positive number, square root of a negative number, zero raised to a
    negative power)."""


class MissingCoordinateError(EvaluationError):
    """The evaluation point does not bind a coordinate the expression uses."""


class IndeterminateZeroTest(DegenlagError):
    """Every probe of a zero test hit a domain error, so no verdict exists."""

    def __init__(self, expr):
        super().__init__(
            f"zero test indeterminate: all probes of '{expr}' hit domain errors"
        )
        self.expr = expr


class NonConstantRankError(DegenlagError):
    """A pivot of the symbolic linear solver changes sign of its zero verdict
    across the sample box, so no single symbolic echelon form is valid."""


class DegenerateHessianError(DegenlagError):
    """An operation that needs a regular velocity Hessian met a singular one
    (probabilistic certificate from probe sampling)."""


class NotTangentError(DegenlagError):
    """A vector field fails the tangency requirement of a projection."""


class NewtonError(DegenlagError):
    """A Newton or Gauss-Newton solve failed to converge."""


class FiberDependenceError(DegenlagError):
    """A base-point construction that must not depend on the fiber seed gave
    fiber-dependent answers beyond tolerance, so a projectability hypothesis
    is violated."""


class RetractionError(DegenlagError):
    """Retraction onto a constraint set diverged or exceeded its violation
    budget."""


class ProblemFileError(DegenlagError):
    """A problem file failed validation.

    ``where`` holds a JSON-path-like locator of the offending field.
    """

    def __init__(self, message: str, where: str = "$"):
        super().__init__(f"{where}: {message}")
        self.where = where
