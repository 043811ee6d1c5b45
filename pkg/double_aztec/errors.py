"""Error hierarchy shared by every module and mapped to CLI exit codes."""

from __future__ import annotations


class DoubleAztecError(Exception):
    """Base error for the package."""

    exit_code: int = 1


class NumericalError(DoubleAztecError):
    """A tolerance, conditioning or consistency failure."""

    exit_code = 1


class NonConvergence(NumericalError):
    """Adaptive refinement ran out of doublings."""


class QuadratureOverflow(NumericalError):
    """An integrand left the floating-point range; rebalance the radii."""


class NoDecay(NumericalError):
    """An integrand does not decay along an unbounded contour."""


class TruncationUnstable(NumericalError):
    """Enlarging a truncation window changed the result beyond tolerance."""


class IllConditioned(NumericalError):
    """A linear solve is too ill-conditioned to trust."""

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class ImaginaryResidue(NumericalError):
    """A physically real quantity came back with a large imaginary part."""


class SeriesDivergence(NumericalError):
    """A geometric series was requested outside its convergence region."""


class InconsistentTiling(NumericalError):
    """Height increments do not close around a face."""


class UsageError(DoubleAztecError):
    """Invalid input supplied by the caller."""

    exit_code = 2


class InvalidShape(UsageError):
    """Shape parameters violate the model constraints."""


class OutOfRange(UsageError):
    """A query point lies outside the model's index ranges."""


class BudgetExceeded(UsageError):
    """An exhaustive computation would exceed its configured budget."""


class InvalidTiling(UsageError):
    """A matching is not a perfect domino tiling of its region."""


class ConfigError(UsageError):
    """A configuration source could not be parsed."""
