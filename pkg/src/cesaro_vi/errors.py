"""Exception hierarchy.

Input problems derive from :class:`InvalidSystemError` (the CLI maps them to exit
code 1); failures of the periodic-orbit / dissipativity assumptions derive
from :class:`AssumptionViolation` (exit code 2).
"""


class CesaroError(Exception):
    """Base class for all package errors."""


class InvalidSystemError(CesaroError):
    """Malformed or invalid system / input data."""


class ParseError(InvalidSystemError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DeterminismError(ParseError):
    """Two transitions declared for the same (state, input) pair."""


class UnknownStateError(ParseError):
    """A transition points at a state that is never declared."""


class DeadStateError(InvalidSystemError):
    """A state has no feasible input."""


class InfeasibleInputError(InvalidSystemError):
    def __init__(self, step: int, state: str, inp: str):
        self.step = step
        super().__init__(f"input {inp!r} is infeasible at state {state!r} (step {step})")


class MissingCoordinatesError(InvalidSystemError):
    """Euclidean distance requested on a system without coordinates."""


class InvalidDiscountError(CesaroError):
    """Discount function does not satisfy the admissibility checks."""


class ExplosionError(CesaroError):
    """Exhaustive enumeration would exceed the configured cap."""


class NotConverged(CesaroError):
    """No stable policy window was found before the horizon cap."""


class AssumptionViolation(CesaroError):
    """The optimal periodic orbit or dissipativity assumptions fail."""


class MinUniqueError(AssumptionViolation):
    def __init__(self, message: str, witness=None):
        self.witness = witness
        super().__init__(message)


class GapNotPositiveError(AssumptionViolation):
    pass


class PositiveCycleError(AssumptionViolation):
    pass
