"""Domain types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from double_aztec.errors import InvalidShape, OutOfRange


@dataclass(slots=True, frozen=True)
class ModelShape:
    """Discrete model parameters: weight a, diamond order n, M = 2m+1 inliers."""

    a: float
    n: int
    m: int

    def __post_init__(self) -> None:
        if not 0.0 < self.a < 1.0:
            raise InvalidShape(f"a must lie in (0, 1), got {self.a}")
        if self.n < 2 or self.n % 2:
            raise InvalidShape(f"n must be an even integer >= 2, got {self.n}")
        if self.m < 0:
            raise InvalidShape(f"m must be non-negative, got {self.m}")

    @property
    def inliers(self) -> int:
        """Return M = 2m+1."""
        return 2 * self.m + 1

    @property
    def half_width(self) -> int:
        """Return n+m, the largest site coordinate on a line."""
        return self.n + self.m

    @property
    def overlaps(self) -> bool:
        """Return whether the two diamonds overlap, i.e. n-(2m+1) >= 1."""
        return 2 * self.m <= self.n - 2

    def require_overlap(self) -> None:
        """Raise InvalidShape unless 0 <= m <= (n-2)/2."""
        if not self.overlaps:
            raise InvalidShape(f"m={self.m} leaves no overlap for n={self.n}; need m <= {(self.n - 2) // 2}")

    def check_site(self, r: int, x: int) -> None:
        """Raise OutOfRange unless 1 <= r <= n and |x| <= n+m."""
        if not 1 <= r <= self.n:
            raise OutOfRange(f"line index r={r} outside 1..{self.n}")
        if abs(x) > self.half_width:
            raise OutOfRange(f"site x={x} outside [-{self.half_width}, {self.half_width}]")


@dataclass(slots=True, frozen=True)
class ContourResult:
    """A quadrature value with its refinement error estimate."""

    value: complex | np.ndarray
    error: float
    nodes: int


@dataclass(slots=True, frozen=True)
class WindowOperator:
    """A dense matrix whose rows and columns are indexed by the integers lo..hi."""

    lo: int
    hi: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        size: int = self.hi - self.lo + 1
        if self.matrix.shape != (max(size, 0), max(size, 0)):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match window [{self.lo}, {self.hi}]")

    @property
    def size(self) -> int:
        """Return the window length."""
        return max(self.hi - self.lo + 1, 0)

    def entry(self, k: int, ell: int) -> complex:
        """Return the entry indexed by the integers (k, ell)."""
        return complex(self.matrix[k - self.lo, ell - self.lo])

    def restrict(self, lo: int, hi: int) -> "WindowOperator":
        """Return the sub-window [lo, hi]."""
        hi = min(hi, self.hi)
        if lo > hi:
            return WindowOperator(lo=lo, hi=lo - 1, matrix=np.zeros((0, 0), dtype=self.matrix.dtype))
        return WindowOperator(lo=lo, hi=hi, matrix=self.matrix[lo - self.lo : hi - self.lo + 1, lo - self.lo : hi - self.lo + 1])

    def transpose(self) -> "WindowOperator":
        """Return the transposed operator on the same window."""
        return WindowOperator(lo=self.lo, hi=self.hi, matrix=self.matrix.T.copy())

    def balanced(self, reach: float) -> "WindowOperator":
        """Return D K D⁻¹ with D = diag(reach^{-(k-lo)}); the Fredholm determinant is unchanged."""
        if reach == 1.0 or self.size == 0:
            return self
        offsets: np.ndarray = np.arange(self.size)
        scale: np.ndarray = np.power(float(reach), offsets[None, :] - offsets[:, None])
        return WindowOperator(lo=self.lo, hi=self.hi, matrix=self.matrix * scale)

    def fredholm_det(self) -> complex:
        """Return det(I - K) on the window; an empty window gives 1."""
        if self.size == 0:
            return 1.0 + 0.0j
        return complex(scipy.linalg.det(np.eye(self.size) - self.matrix))


@dataclass(slots=True, frozen=True)
class KernelValue:
    """One kernel evaluation at (2r, x; 2s, y)."""

    r: int
    x: int
    s: int
    y: int
    value: complex
    representation: str
    error: float = 0.0


@dataclass(slots=True, frozen=True)
class TacnodePoint:
    """Space-time arguments of the tacnode kernel; delta is the form-(iii) contour offset."""

    tau1: float
    xi1: float
    tau2: float
    xi2: float
    delta: float = 0.5

    def __post_init__(self) -> None:
        if self.delta <= 0.0:
            raise OutOfRange(f"contour offset delta must be positive, got {self.delta}")

    def reflected(self) -> "TacnodePoint":
        """Return the point with both space arguments negated."""
        return TacnodePoint(self.tau1, -self.xi1, self.tau2, -self.xi2, self.delta)


@dataclass(slots=True, frozen=True)
class Estimate:
    """A Monte Carlo mean with its batch-means standard error."""

    mean: float
    stderr: float
    samples: int
