"""Exception taxonomy shared across the package.

Every error raised by the library derives from :class:`KnockoutError`, so
callers (and the CLI) can distinguish usage mistakes from runtime
degeneracies with a single except clause per class.
"""

from __future__ import annotations


class KnockoutError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(KnockoutError):
    """A parameter is outside its documented domain.

    The message names the offending parameter and the violated constraint.
    """


class SingularMatrix(KnockoutError):
    """An LU factorisation produced a pivot below the tolerance.

    Raised by the linear solver; higher layers usually translate this into
    :class:`NonAbsorbingChain` when the matrix came from a transition chain.
    """


class NonAbsorbingChain(KnockoutError):
    """A chain query requires absorption but some probability mass never absorbs."""


class StepCapExceeded(KnockoutError):
    """A simulated game ran past the configured step cap.

    Attributes:
        game_index: zero-based index of the offending game within the run,
            or -1 when the simulation was a single standalone game.
    """

    def __init__(self, message: str, game_index: int = -1):
        super().__init__(message)
        self.game_index = game_index


class DenominatorZero(KnockoutError):
    """A closed-form expression was evaluated where its denominator vanishes."""


class EliminatedHasNoPosition(KnockoutError):
    """Asked for the next-round position of the player who was just eliminated."""
