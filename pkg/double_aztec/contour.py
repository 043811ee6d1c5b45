"""Complex contour quadrature over circles, vertical lines and Airy-type rays."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from double_aztec.config import QuadratureConfig
from double_aztec.errors import NoDecay, NonConvergence, OutOfRange, QuadratureOverflow
from double_aztec.types import ContourResult

logger = logging.getLogger(__name__)

MAGNITUDE_LIMIT = 1e300
EPSILON = float(np.finfo(float).eps)
PAIR_CHUNK_ROWS = 512
MAX_PAIR_NODES = 8192
ROUNDING_SLACK = 64.0
STALL_TOLERANCE = 1e-8

ComplexFunction = Callable[[np.ndarray], np.ndarray]
BivariateFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(slots=True, frozen=True)
class CircleContour:
    """Counterclockwise circle |z - center| = radius."""

    radius: float
    center: complex = 0.0j

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise OutOfRange(f"circle radius must be positive, got {self.radius}")

    def nodes(self, count: int) -> np.ndarray:
        """Return count equispaced nodes."""
        angles: np.ndarray = 2.0 * np.pi * np.arange(count) / count
        return self.center + self.radius * np.exp(1j * angles)


@dataclass(slots=True, frozen=True)
class VerticalLineContour:
    """The upward line abscissa + iℝ, truncated at ±i·half_width."""

    abscissa: float
    half_width: float = 8.0

    def __post_init__(self) -> None:
        if self.half_width <= 0.0:
            raise OutOfRange(f"half width must be positive, got {self.half_width}")


@dataclass(slots=True, frozen=True)
class RayContour:
    """Two rays leaving vertex at angles ±angle, oriented upward through the vertex."""

    vertex: complex
    angle: float = math.pi / 3.0
    length: float = 8.0

    def __post_init__(self) -> None:
        if not math.pi / 6.0 < self.angle < math.pi / 2.0:
            raise OutOfRange(f"ray angle must lie in (pi/6, pi/2), got {self.angle}")
        if self.length <= 0.0:
            raise OutOfRange(f"ray length must be positive, got {self.length}")


@lru_cache(maxsize=64)
def _legendre(count: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(count)
    return nodes, weights


def gauss_legendre(count: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Return Gauss-Legendre nodes and weights mapped onto [lo, hi]."""
    nodes, weights = _legendre(count)
    half: float = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights


def guard(values: np.ndarray, where: str) -> np.ndarray:
    """Raise QuadratureOverflow when values leave the floating-point range."""
    magnitudes: np.ndarray = np.abs(values)
    if not np.all(np.isfinite(magnitudes)) or (magnitudes.size and magnitudes.max() > MAGNITUDE_LIMIT):
        raise QuadratureOverflow(f"integrand exceeds {MAGNITUDE_LIMIT:.0e} on {where}; rebalance the radii")
    return values


def _converged(current: np.ndarray, previous: np.ndarray, tolerance: float) -> tuple[bool, float]:
    delta: np.ndarray = np.abs(current - previous)
    error: float = float(delta.max()) if delta.size else 0.0
    return bool(np.all(delta <= tolerance * (1.0 + np.abs(current)))), error


def _as_value(total: np.ndarray) -> complex | np.ndarray:
    return complex(total) if total.ndim == 0 else total


def _settled(error: float, last_error: float | None, current: complex, magnitude: float, tolerance: float) -> bool:
    """Accept a refinement once it meets the tolerance or stalls at the rounding floor of a cancelling sum."""
    if error <= tolerance * (1.0 + abs(current)):
        return True
    floor: float = ROUNDING_SLACK * EPSILON * magnitude
    if error <= floor:
        return True
    stalled: bool = last_error is not None and error >= 0.5 * last_error
    return stalled and error <= STALL_TOLERANCE * (1.0 + abs(current))


def _refine_pair(
    evaluate: Callable[[int], tuple[complex, float]],
    config: QuadratureConfig,
    where: str,
) -> ContourResult:
    count: int = config.initial_nodes
    previous, _ = evaluate(count)
    last_error: float | None = None
    for _ in range(config.max_doublings):
        count *= 2
        if count > MAX_PAIR_NODES:
            count //= 2
            break
        current, magnitude = evaluate(count)
        error: float = abs(current - previous)
        if _settled(error, last_error, current, magnitude, config.tolerance):
            return ContourResult(value=current, error=error, nodes=count)
        logger.debug("%s at %d nodes: change %.3g, term mass %.3g", where, count, error, magnitude)
        previous, last_error = current, error
    raise NonConvergence(f"{where} quadrature did not converge at {count} nodes per circle")


def _row_blocks(count: int) -> range:
    return range(0, count, PAIR_CHUNK_ROWS)


def _circle_sum(f: ComplexFunction, contour: CircleContour, count: int) -> np.ndarray:
    z: np.ndarray = contour.nodes(count)
    values: np.ndarray = guard(np.asarray(f(z), dtype=complex), f"circle r={contour.radius:.4g}")
    return (values * (1j * (z - contour.center))).sum(axis=-1) * (2.0 * np.pi / count)


def integrate_circle(f: ComplexFunction, contour: CircleContour, config: QuadratureConfig) -> ContourResult:
    """Return ∮ f(z) dz over the circle by the trapezoid rule with node doubling.

    f receives the node array and may return values with extra leading axes; the
    node axis must be last.
    """
    count: int = config.initial_nodes
    previous: np.ndarray = _circle_sum(f, contour, count)
    for _ in range(config.max_doublings):
        count *= 2
        current: np.ndarray = _circle_sum(f, contour, count)
        done, error = _converged(current, previous, config.tolerance)
        if done:
            return ContourResult(value=_as_value(current), error=error, nodes=count)
        previous = current
    logger.debug("Circle quadrature on r=%.4g exhausted at %d nodes", contour.radius, count)
    raise NonConvergence(f"circle quadrature on r={contour.radius:.4g} did not converge at {count} nodes")


def _double_sum(f: BivariateFunction, inner: CircleContour, outer: CircleContour, count: int) -> tuple[complex, float]:
    z: np.ndarray = inner.nodes(count)
    w: np.ndarray = outer.nodes(count)
    dz: np.ndarray = 1j * (z - inner.center) * (2.0 * np.pi / count)
    dw: np.ndarray = 1j * (w - outer.center) * (2.0 * np.pi / count)
    total: complex = 0j
    magnitude: float = 0.0
    for start in _row_blocks(count):
        rows: slice = slice(start, start + PAIR_CHUNK_ROWS)
        values: np.ndarray = guard(np.asarray(f(z[rows, None], w[None, :]), dtype=complex), "double circle")
        values = np.broadcast_to(values, (len(z[rows]), count))
        total += complex(dz[rows] @ values @ dw)
        magnitude += float(np.abs(dz[rows]) @ np.abs(values) @ np.abs(dw))
    return total, magnitude


def integrate_double_circle(
    f: BivariateFunction,
    first: CircleContour,
    second: CircleContour,
    config: QuadratureConfig,
) -> ContourResult:
    """Return ∮∮ f(z, w) dz dw with z on first and w on second, refined jointly.

    f is evaluated in row blocks of the product grid; refinement stops at MAX_PAIR_NODES per circle.
    """
    return _refine_pair(lambda count: _double_sum(f, first, second, count), config, "double circle")


def _tail_extent(
    magnitude: Callable[[float], float],
    start: float,
    peak: float,
    tail: float,
    max_doublings: int,
    where: str,
) -> float:
    """Double the extent until the endpoint magnitude falls below tail·peak."""
    extent: float = start
    last: float = magnitude(extent)
    for _ in range(max_doublings):
        if last <= tail * max(peak, 1e-300):
            return extent
        extent *= 2.0
        current: float = magnitude(extent)
        if current > last:
            raise NoDecay(f"integrand grows along {where}")
        last = current
    if last <= tail * max(peak, 1e-300):
        return extent
    raise NoDecay(f"integrand does not decay along {where} within {extent:.3g}")


def integrate_vertical(
    f: ComplexFunction,
    line: VerticalLineContour,
    config: QuadratureConfig,
    tail: float = 1e-16,
) -> ContourResult:
    """Return ∫ f(u) du over abscissa + iℝ, upward, by truncated trapezoid sums."""
    delta: float = line.abscissa

    def endpoint(height: float) -> float:
        ends: np.ndarray = np.asarray(f(np.array([delta - 1j * height, delta + 1j * height])), dtype=complex)
        return float(np.abs(ends).max())

    peak: float = float(np.abs(np.asarray(f(np.array([delta + 0j])), dtype=complex)).max())
    height: float = _tail_extent(endpoint, line.half_width, peak, tail, config.max_doublings, f"Re u = {delta}")

    def trapezoid(count: int) -> np.ndarray:
        y: np.ndarray = np.linspace(-height, height, count + 1)
        values: np.ndarray = guard(np.asarray(f(delta + 1j * y), dtype=complex), "vertical line")
        step: float = 2.0 * height / count
        return 1j * step * (values.sum(axis=-1) - 0.5 * (values[..., 0] + values[..., -1]))

    count: int = config.initial_nodes
    previous: np.ndarray = trapezoid(count)
    for _ in range(config.max_doublings):
        count *= 2
        current: np.ndarray = trapezoid(count)
        done, error = _converged(current, previous, config.tolerance)
        if done:
            return ContourResult(value=_as_value(current), error=error, nodes=count)
        previous = current
    raise NonConvergence(f"vertical quadrature on Re u = {delta} did not converge at {count} nodes")


def ray_nodes(ray: RayContour, count: int, length: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Return upper and lower ray nodes with their dz-weights for a Gauss-Legendre rule."""
    t, weights = gauss_legendre(count, 0.0, length)
    up: complex = complex(math.cos(ray.angle), math.sin(ray.angle))
    down: complex = up.conjugate()
    return ray.vertex + t * up, weights * up, ray.vertex + t * down, weights * down


def integrate_rays(f: ComplexFunction, ray: RayContour, config: QuadratureConfig, tail: float = 1e-16) -> ContourResult:
    """Return ∫ f(V) dV along the ray pair, from ∞e^{-iθ} through the vertex to ∞e^{iθ}."""
    up: complex = complex(math.cos(ray.angle), math.sin(ray.angle))

    def endpoint(length: float) -> float:
        ends: np.ndarray = np.asarray(
            f(np.array([ray.vertex + length * up, ray.vertex + length * up.conjugate()])), dtype=complex
        )
        return float(np.abs(ends).max())

    peak: float = float(np.abs(np.asarray(f(np.array([complex(ray.vertex)])), dtype=complex)).max())
    length: float = _tail_extent(endpoint, ray.length, peak, tail, config.max_doublings, "ray contour")

    def rule(count: int) -> np.ndarray:
        upper, upper_weights, lower, lower_weights = ray_nodes(ray, count, length)
        top: np.ndarray = guard(np.asarray(f(upper), dtype=complex), "upper ray")
        bottom: np.ndarray = guard(np.asarray(f(lower), dtype=complex), "lower ray")
        return (top * upper_weights).sum(axis=-1) - (bottom * lower_weights).sum(axis=-1)

    count: int = config.initial_nodes
    previous: np.ndarray = rule(count)
    for _ in range(config.max_doublings):
        count *= 2
        current: np.ndarray = rule(count)
        done, error = _converged(current, previous, config.tolerance)
        if done:
            return ContourResult(value=_as_value(current), error=error, nodes=count)
        previous = current
    raise NonConvergence(f"ray quadrature did not converge at {count} nodes")


def laurent_coefficients(f: ComplexFunction, radius: float, count: int, lo: int, hi: int) -> np.ndarray:
    """Return the Laurent coefficients c_lo..c_hi of f on |z| = radius from an FFT of count samples."""
    z: np.ndarray = radius * np.exp(2j * np.pi * np.arange(count) / count)
    values: np.ndarray = guard(np.asarray(f(z), dtype=complex), f"circle r={radius:.4g}")
    spectrum: np.ndarray = np.fft.fft(values) / count
    indices: np.ndarray = np.arange(lo, hi + 1)
    return spectrum[indices % count] * np.power(radius, -indices.astype(float))


CauchyFactors = Callable[[np.ndarray, np.ndarray], list[tuple[np.ndarray, np.ndarray]]]


def _coupled_sum(
    factors: CauchyFactors,
    z: np.ndarray,
    w: np.ndarray,
    dz: np.ndarray,
    dw: np.ndarray,
    where: str,
) -> tuple[complex, float]:
    pairs: list[tuple[np.ndarray, np.ndarray]] = [
        (
            guard(np.asarray(left, dtype=complex), f"separable factor on {where}") * dz,
            guard(np.asarray(right, dtype=complex), f"separable factor on {where}") * dw,
        )
        for left, right in factors(z, w)
    ]
    total: complex = 0j
    magnitude: float = 0.0
    for start in _row_blocks(len(z)):
        rows: slice = slice(start, start + PAIR_CHUNK_ROWS)
        coupling: np.ndarray = 1.0 / (z[rows, None] - w[None, :])
        spread: np.ndarray = np.abs(coupling)
        for left, right in pairs:
            total += complex(left[rows] @ coupling @ right)
            magnitude += float(np.abs(left[rows]) @ spread @ np.abs(right))
    return total, magnitude


def _cauchy_sum(factors: CauchyFactors, inner: CircleContour, outer: CircleContour, count: int) -> tuple[complex, float]:
    z: np.ndarray = inner.nodes(count)
    w: np.ndarray = outer.nodes(count)
    dz: np.ndarray = 1j * (z - inner.center) * (2.0 * np.pi / count)
    dw: np.ndarray = 1j * (w - outer.center) * (2.0 * np.pi / count)
    return _coupled_sum(factors, z, w, dz, dw, "circles")


def integrate_cauchy_pair(
    factors: CauchyFactors,
    first: CircleContour,
    second: CircleContour,
    config: QuadratureConfig,
) -> ContourResult:
    """Return ∮∮ Σ_t F_t(z) G_t(w) / (z - w) dz dw with z on first and w on second.

    factors receives both node arrays and returns the (F_t(z), G_t(w)) pairs, so
    each factor is evaluated once per node set instead of on the product grid.
    Sums that cancel down to their rounding floor are accepted at that floor.
    """
    return _refine_pair(lambda count: _cauchy_sum(factors, first, second, count), config, "separable double")


def _vertical_nodes(line: VerticalLineContour, step: float) -> tuple[np.ndarray, np.ndarray]:
    count: int = max(2, math.ceil(2.0 * line.half_width / step))
    y: np.ndarray = np.linspace(-line.half_width, line.half_width, count + 1)
    weights: np.ndarray = np.full(y.shape, 1j * (y[1] - y[0]), dtype=complex)
    weights[[0, -1]] *= 0.5
    return line.abscissa + 1j * y, weights


def _vertical_cauchy_sum(
    factors: CauchyFactors, first: VerticalLineContour, second: VerticalLineContour, step: float
) -> tuple[complex, float]:
    u, du = _vertical_nodes(first, step)
    v, dv = _vertical_nodes(second, step)
    return _coupled_sum(factors, u, v, du, dv, "vertical lines")


def integrate_vertical_cauchy(
    factors: CauchyFactors,
    first: VerticalLineContour,
    second: VerticalLineContour,
    step: float,
    tolerance: float,
    max_halvings: int,
) -> ContourResult:
    """Return ∫∫ Σ_t F_t(u) G_t(v) / (u - v) du dv over two truncated upward lines.

    The trapezoid step is halved until two successive sums agree; the lines must
    have distinct abscissas.
    """
    if first.abscissa == second.abscissa:
        raise OutOfRange("vertical lines must not coincide")
    previous, _ = _vertical_cauchy_sum(factors, first, second, step)
    last_error: float | None = None
    for _ in range(max_halvings):
        step *= 0.5
        current, magnitude = _vertical_cauchy_sum(factors, first, second, step)
        error: float = abs(current - previous)
        if _settled(error, last_error, current, magnitude, tolerance):
            return ContourResult(value=current, error=error, nodes=math.ceil(2.0 * first.half_width / step))
        previous, last_error = current, error
    raise NonConvergence(f"vertical double quadrature did not converge at step {step:.3g}")
