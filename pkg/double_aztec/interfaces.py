"""Protocol interfaces for kernel representations, tacnode forms and tiling observables."""

from __future__ import annotations

from typing import Protocol

from double_aztec.types import TacnodePoint


class KernelRepresentation(Protocol):
    """Evaluates the extended dual kernel K̃(2r, x; 2s, y) of the double diamond."""

    @property
    def name(self) -> str:
        """Return the registry name of the representation."""

    def evaluate(self, r: int, x: int, s: int, y: int) -> float:
        """Return the real kernel value at (2r, x; 2s, y)."""


class TacnodeForm(Protocol):
    """Evaluates the tacnode kernel in one of its equivalent forms."""

    @property
    def name(self) -> str:
        """Return the registry name of the form."""

    def evaluate(self, point: TacnodePoint) -> float:
        """Return the real kernel value at the point."""


class TilingObservable(Protocol):
    """Maps a tiling to a real number whose mean a chain can estimate."""

    def __call__(self, tiling: object) -> float:
        """Return the observable value on one tiling."""
