"""Exception hierarchy.

``NumericalGuard`` subclasses mark conditions where a computation was refused
because its result would be numerically meaningless (the CLI maps them to exit
code 3). Everything else is a plain usage error.
"""


class WeakPotError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(WeakPotError, ValueError):
    """Operands live on incompatible spaces."""


class IndexOutOfRange(WeakPotError, IndexError):
    """A Fock index does not fit below the cutoff."""


class StepTooLarge(WeakPotError, ValueError):
    """Time step too coarse for the per-step exponential."""


class DegenerateSweep(WeakPotError, ValueError):
    """A power-law fit cannot be formed from the given points."""


class ZeroState(WeakPotError, ValueError):
    """Expectation requested in a state with zero norm."""


class NumericalGuard(WeakPotError):
    """A numerical safety guard was tripped."""


class TailTooHeavy(NumericalGuard):
    """Truncated Fock expansion leaves too much weight above the cutoff."""


class OrthogonalSelection(NumericalGuard):
    """Pre- and post-selected states are (numerically) orthogonal."""


class DimensionGuard(NumericalGuard):
    """Two-body dimension exceeds the configured guard."""


class ConfigError(WeakPotError, ValueError):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
