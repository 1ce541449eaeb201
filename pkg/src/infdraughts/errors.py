"""Exception types shared across the engine."""


class DraughtsError(Exception):
    """Base class for all engine errors."""


class NonPlayableCell(DraughtsError):
    """A light square was used where a dark (playable) square is required."""


class PositionInvariantError(DraughtsError):
    """A position description violates a board invariant."""


class IllegalMove(DraughtsError):
    """The move is not legal in the given position."""


class UndeterminedIteration(DraughtsError):
    """A jump path exceeded the hop cutoff without an infinite-ray certificate.

    Signals a position outside the supported fragment (e.g. paths weaving
    between rays forever).
    """


class InfiniteMoveSet(DraughtsError):
    """The side to move has infinitely many legal moves.

    Raised when enumeration would not terminate: a live infinite ray whose
    pieces are free to move, or infinitely many stopping points on a jump.
    """


class BudgetExceeded(DraughtsError):
    """Graph exploration could not complete within the node budget."""

    def __init__(self, frontier_size: int, message: str = ""):
        self.frontier_size = frontier_size
        super().__init__(message or f"budget exceeded with {frontier_size} frontier nodes")


class NoSymmetry(DraughtsError):
    """No ray admits a self-translation, so the quotient pass cannot apply."""


class NotValued(DraughtsError):
    """The root has no game value for the requested open player."""


class NotUnvalued(DraughtsError):
    """The root is valued, so a value-avoiding strategy does not exist."""


class NotLimit(DraughtsError):
    """The ordinal is not a limit ordinal."""


class UnsupportedOrdinal(DraughtsError):
    """The ordinal is outside the supported notation range (below epsilon_0)."""


class CheckFailed(DraughtsError):
    """A certification check failed."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        self.detail = detail
        super().__init__(f"check failed: {name}" + (f" ({detail})" if detail else ""))


class UnverifiedAssumption(DraughtsError):
    """A hand-written schema relies on an assumption the certifier cannot verify."""


class OutOfMaterializedRange(DraughtsError):
    """The requested witness lies beyond the materialized children."""


class ValidationError(DraughtsError):
    """A document failed schema validation."""
