"""Extended dual kernel of the double Aztec diamond: four representations, the C-function and gap probabilities."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from double_aztec.contour import CircleContour, integrate_cauchy_pair, integrate_circle, integrate_double_circle
from double_aztec.errors import IllConditioned, ImaginaryResidue, OutOfRange
from double_aztec.interfaces import KernelRepresentation
from double_aztec.operators import (
    apply_resolvent,
    exp_half_phi,
    g1_values,
    g2_values,
    h_at_zero,
    k0_block,
    moment_matrix,
    r1,
    r2,
    resolvent_vectors,
    s1,
    s2,
    t1,
    t2,
)
from double_aztec.symbols import BinomialSymbol, KernelContext, psi, psi_half_steps, step_symbol
from double_aztec.types import KernelValue

logger = logging.getLogger(__name__)

SADDLE_TERMS: tuple[str, ...] = ("E1", "E2", "E3", "E4")


def _parity(value: int) -> float:
    return -1.0 if value % 2 else 1.0


def _alternating(lo: int, hi: int) -> np.ndarray:
    return np.where(np.arange(lo, hi + 1) % 2 == 0, 1.0, -1.0)


def real_part(ctx: KernelContext, value: complex, where: str) -> float:
    """Return Re(value), raising ImaginaryResidue when |Im| exceeds the tolerance."""
    residue: float = abs(complex(value).imag)
    if residue > ctx.settings.imaginary_tolerance:
        raise ImaginaryResidue(f"{where} has imaginary part {residue:.3g}")
    return float(complex(value).real)


def _product_sum(first: BinomialSymbol, first_lo: int, second: BinomialSymbol, second_lo: int, count: int) -> float:
    """Return Σ_{i<count} [z^{first_lo - i}]first · [z^{second_lo + i}]second."""
    if count <= 0:
        return 0.0
    left: np.ndarray = first.coefficients(first_lo - count + 1, first_lo)[::-1]
    right: np.ndarray = second.coefficients(second_lo, second_lo + count - 1)
    return float(left @ right)


def one_aztec_kernel(ctx: KernelContext, order: int, r: int, x: int, s: int, y: int, route: str = "series") -> float:
    """Return the one-Aztec diamond kernel of the given order at (2r, x; 2s, y).

    The double integral over |u| = r3 < |v| = r2 is summed as Σ_{β>=0} [u^{-y-β}]N·[v^{x+β}](1/D)
    on the series route, or integrated on circles on the contour route.
    """
    numerator: BinomialSymbol = BinomialSymbol(ctx.a, order - s, s)
    denominator: BinomialSymbol = BinomialSymbol(ctx.a, -(order - r), -r)
    sign: float = _parity(x - y)
    if route == "series":
        start: int = max(0, s - order - y)
        stop: int = s - y
        integral: float = sign * _product_sum(numerator, -y - start, denominator, x + start, stop - start + 1)
    elif route == "contour":

        def integrand(u: np.ndarray, v: np.ndarray) -> np.ndarray:
            return sign * v ** (-x) * u ** (y - 1) * numerator(u) * denominator(v) / (v - u) / (2j * np.pi) ** 2

        result = integrate_double_circle(integrand, CircleContour(ctx.radii[0]), CircleContour(ctx.radii[1]), ctx.settings.quadrature)
        integral = real_part(ctx, result.value, "one-Aztec contour integral")
    else:
        raise ValueError(f"Unknown one-Aztec route '{route}'. Available: contour, series")
    if s > r:
        integral -= psi(ctx, s - r, x, y)
    return integral


def s_function(ctx: KernelContext, r: int, x: int, s: int, y: int) -> float:
    """Return S(2r, x; 2s, y) = (-1)^{x-y} Σ_{β>=0} [u^{y-m-β-1}]F_s · [v^{m-x+β+1}](1/F_r)."""
    n, m = ctx.n, ctx.m
    forward: BinomialSymbol = BinomialSymbol(ctx.a, s, n - s + 1)
    backward: BinomialSymbol = BinomialSymbol(ctx.a, -r, -(n - r + 1))
    start: int = max(0, y - m - 1 - s)
    stop: int = y - m + n - s
    total: float = _product_sum(forward, y - m - 1 - start, backward, m - x + 1 + start, stop - start + 1)
    return _parity(x - y) * total


def a_vector(ctx: KernelContext, x: int, s: int) -> np.ndarray:
    """Return a_{x,s}(k) for k = 2m+1..K_max."""
    n, m = ctx.n, ctx.m
    lo, hi = ctx.shape.inliers, ctx.k_max
    start: int = max(0, x + m - (n - s + 1))
    stop: int = x + m + s
    if stop < start:
        return np.zeros(hi - lo + 1)
    betas: np.ndarray = np.arange(start, stop + 1)
    forward: np.ndarray = ctx.coefficients(s, n - s + 1, start - x - m, stop - x - m)
    inverse: np.ndarray = ctx.coefficients(-n, -(n + 1), lo - stop, hi - start)
    index: np.ndarray = np.arange(lo, hi + 1)[:, None] - betas[None, :] - (lo - stop)
    return -_parity(x) * _alternating(lo, hi) * (inverse[index] @ forward)


def b_vector(ctx: KernelContext, y: int, r: int) -> np.ndarray:
    """Return b_{y,r}(ℓ) for ℓ = 2m+1..K_max."""
    n, m = ctx.n, ctx.m
    lo, hi = ctx.shape.inliers, ctx.k_max
    start: int = max(0, lo - n - 1)
    stop: int = hi + n
    betas: np.ndarray = np.arange(start, stop + 1)
    width: int = 2 * n + 2
    phi: np.ndarray = ctx.coefficients(n, n + 1, -(n + 1), n)
    backward: np.ndarray = BinomialSymbol(ctx.a, -r, -(n - r + 1)).coefficients(y + m - stop, y + m - start)[::-1]
    index: np.ndarray = betas[None, :] - np.arange(lo, hi + 1)[:, None] + n + 1
    inside: np.ndarray = (index >= 0) & (index < width)
    table: np.ndarray = np.where(inside, phi[np.clip(index, 0, width - 1)], 0.0)
    return -_parity(y) * _alternating(lo, hi) * (table @ backward)


def eynard_mehta_matrix(ctx: KernelContext) -> np.ndarray:
    """Return A⁻¹ for the (2m+1)×(2m+1) Toeplitz matrix A_{ij} = ψ_{0,2n+1}(b_i, e_j)."""

    def build() -> np.ndarray:
        matrix: np.ndarray = moment_matrix(ctx, ctx.shape.inliers)
        condition: float = float(np.linalg.cond(matrix))
        if condition > ctx.settings.max_condition:
            raise IllConditioned(f"Eynard-Mehta matrix has condition {condition:.3g}", condition)
        return scipy.linalg.inv(matrix)

    return ctx.memo("em_inverse", build)


def inlier_kernel(ctx: KernelContext, r: int, x: int, s: int, y: int) -> float:
    """Return the Eynard-Mehta kernel of the 2m+1 inlier paths at (2r, x; 2s, y)."""
    inverse: np.ndarray = eynard_mehta_matrix(ctx)
    count: int = ctx.shape.inliers
    finish: np.ndarray = np.array([psi_half_steps(ctx, 2 * r, x, i)[1] for i in range(1, count + 1)])
    start: np.ndarray = np.array([psi_half_steps(ctx, 2 * s, y, j)[0] for j in range(1, count + 1)])
    value: float = float(finish @ inverse @ start)
    if r < s:
        value -= psi(ctx, s - r, x, y)
    return value


def _on_nodes(ctx: KernelContext, name: str, nodes: np.ndarray, build: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    key = ("nodes", name, round(float(abs(nodes[0])), 14), len(nodes))
    return ctx.memo(key, lambda: np.asarray(build(nodes), dtype=complex))


def _one_minus_r1(ctx: KernelContext, z: np.ndarray) -> np.ndarray:
    return _on_nodes(ctx, "1-R1", z, lambda nodes: 1.0 - r1(ctx, 1.0 / nodes))


def _one_minus_r2(ctx: KernelContext, w: np.ndarray) -> np.ndarray:
    return _on_nodes(ctx, "1-R2", w, lambda nodes: 1.0 - r2(ctx, nodes))


def f_function(ctx: KernelContext, u: int, d: int) -> complex:
    """Return ∮ dz/(2πi) (-z)^{-d-1} (1-R⁽¹⁾(z⁻¹))(1-R⁽²⁾(z)) ((1+az)/(1-a/z))^u on |z| = 1."""
    step: BinomialSymbol = step_symbol(ctx.a, u)

    def integrand(z: np.ndarray) -> np.ndarray:
        weight: np.ndarray = _one_minus_r1(ctx, z) * _one_minus_r2(ctx, z)
        return (-z) ** (-d - 1) * weight * step(z) / (2j * np.pi)

    return complex(integrate_circle(integrand, CircleContour(1.0), ctx.settings.quadrature).value)


def c2_function(ctx: KernelContext, u: int, x: int) -> complex:
    """Return C₂(u; x) = -∮ dz/(2πi) (-z)^{-x-1} T⁽¹⁾(z⁻¹) T⁽²⁾(z) ((1+az)/(1-a/z))^u."""
    step: BinomialSymbol = step_symbol(ctx.a, u)

    def integrand(z: np.ndarray) -> np.ndarray:
        tails: np.ndarray = _on_nodes(ctx, "T1T2", z, lambda nodes: t1(ctx, 1.0 / nodes) * t2(ctx, nodes))
        return -((-z) ** (-x - 1)) * tails * step(z) / (2j * np.pi)

    return complex(integrate_circle(integrand, CircleContour(1.0), ctx.settings.quadrature).value)


def _tail_products(ctx: KernelContext, x: int) -> tuple[float, float]:
    """Return (Σ_k Q⁽¹⁾_k g2_{k+x}, Σ_k Q⁽²⁾_k g1_{k-x})."""
    vectors = resolvent_vectors(ctx)
    first: float = float(vectors.q1 @ g2_values(ctx, vectors.lo + x, vectors.hi + x))
    second: float = float(vectors.q2 @ g1_values(ctx, vectors.lo - x, vectors.hi - x))
    return first, second


def _kernel_products(ctx: KernelContext, x: int) -> float:
    """Return Σ_{k,ℓ} Q⁽¹⁾_k Q⁽²⁾_ℓ (K(0)_{k,ℓ-x} + K(0)_{k+x,ℓ})."""
    vectors = resolvent_vectors(ctx)
    lo, hi = vectors.lo, vectors.hi
    shifted_cols: np.ndarray = k0_block(ctx, (lo, hi), (lo - x, hi - x))
    shifted_rows: np.ndarray = k0_block(ctx, (lo + x, hi + x), (lo, hi))
    return float(vectors.q1 @ (shifted_cols + shifted_rows) @ vectors.q2)


def _cross_sums(ctx: KernelContext, x: int) -> tuple[float, float]:
    """Return (Σ Q⁽¹⁾_kQ⁽²⁾_ℓ g2_{k+α}g1_{ℓ+β} over α-β = x, Σ Q⁽¹⁾_kQ⁽²⁾_ℓ over ℓ-k = x)."""
    vectors = resolvent_vectors(ctx)
    lo, hi = vectors.lo, vectors.hi
    reach: int = max(ctx.n - lo, -1)
    total: float = 0.0
    for beta in range(max(0, -x), reach + 1):
        forward: float = float(vectors.q1 @ g2_values(ctx, lo + beta + x, hi + beta + x))
        backward: float = float(vectors.q2 @ g1_values(ctx, lo + beta, hi + beta))
        total += forward * backward
    diagonal: float = sum(vectors.first(k) * vectors.second(k + x) for k in range(lo, hi + 1))
    return total, diagonal


def c1_star(ctx: KernelContext, x: int) -> float:
    """Return C₁*(x), the sum form of the single integral in C(0; x) with the x = 0 term kept."""
    forward, backward = _tail_products(ctx, x)
    cross, diagonal = _cross_sums(ctx, x)
    lower: float = 1.0 if x < 0 else (0.5 if x == 0 else 0.0)
    upper: float = 1.0 if x > 0 else (0.5 if x == 0 else 0.0)
    return lower * forward + upper * backward - cross - diagonal + _kernel_products(ctx, x)


def exchange_identity(ctx: KernelContext, x: int) -> tuple[float, float]:
    """Return both sides of -Σ Q⁽¹⁾Q⁽²⁾g2g1 δ_{x,α-β} + Σ Q⁽¹⁾Q⁽²⁾δ_{x,ℓ-k} = weighted Σ Q g."""
    forward, backward = _tail_products(ctx, x)
    cross, diagonal = _cross_sums(ctx, x)
    upper: float = 1.0 if x > 0 else (0.5 if x == 0 else 0.0)
    lower: float = 1.0 if x < 0 else (0.5 if x == 0 else 0.0)
    return -cross + diagonal, upper * forward + lower * backward


def c_function(ctx: KernelContext, u: int, x: int, route: str = "integral") -> float:
    """Return C(u; x) = δ_{x≠0}F_u(x) + 2C₂(u; x); the sum route needs u = 0."""
    if route == "integral":
        value: complex = 2.0 * c2_function(ctx, u, x)
        if x != 0:
            value += f_function(ctx, u, x)
        return real_part(ctx, value, f"C({u}; {x})")
    if route == "sum":
        if u != 0:
            raise OutOfRange(f"the sum route of C(u; x) needs u = 0, got u={u}")
        forward, backward = _tail_products(ctx, x)
        return forward + backward + _kernel_products(ctx, x)
    raise ValueError(f"Unknown C route '{route}'. Available: integral, sum")


def _norm_ratio(ctx: KernelContext) -> float:
    """Return H_{2m+1}(0)/H_{2m+2}(0)."""
    lead: int = ctx.shape.inliers
    return h_at_zero(ctx, lead) / h_at_zero(ctx, lead + 1)


def resolvent_double_integral(ctx: KernelContext, r: int, x: int, s: int, y: int) -> complex:
    """Return the double integral of the resolvent form with z on r2 and w on s2."""
    a, n, m = ctx.a, ctx.n, ctx.m

    def factors(z: np.ndarray, w: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        left: np.ndarray = _one_minus_r1(ctx, z)
        right: np.ndarray = _one_minus_r2(ctx, w)
        return [
            (
                left * (1.0 - a / z) ** r * (1.0 + a * z) ** (n - r) * (-z) ** (x + m),
                right * (1.0 - a / w) ** (-s) * (1.0 + a * w) ** (-(n - s)) * (-w) ** (-y - m - 1),
            ),
            (
                left * (1.0 + a * z) ** s * (1.0 - a / z) ** (n - s + 1) * (-z) ** (m - y),
                right * (1.0 + a * w) ** (-r) * (1.0 - a / w) ** (-(n - r + 1)) * (-w) ** (x - m - 1),
            ),
        ]

    result = integrate_cauchy_pair(factors, CircleContour(ctx.radii[1]), CircleContour(ctx.radii[2]), ctx.settings.quadrature)
    return complex(result.value) / (2j * np.pi) ** 2


def saddle_terms(ctx: KernelContext, r: int, x: int, s: int, y: int) -> dict[str, complex]:
    """Return the E₁..E₄ double integrals of the saddle form at the reflected sites (-x, -y).

    Each E_i multiplies B₁ + B₂ over 1/(z - w), with z on r2 and w on s2.
    """
    a, half = ctx.a, ctx.n // 2

    def blocks(z: np.ndarray, w: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        return [
            ((-z) ** (-x) * step_symbol(a, half - r)(z), (-w) ** (y - 1) * step_symbol(a, s - half)(w)),
            (
                (-z) ** y * step_symbol(a, s - half)(z) * (1.0 - a / z),
                (-w) ** (-x - 1) * step_symbol(a, half - r)(w) / (1.0 - a / w),
            ),
        ]

    def exponentials(z: np.ndarray, w: np.ndarray) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        ez: np.ndarray = _on_nodes(ctx, "e(z)", z, lambda nodes: exp_half_phi(ctx, nodes))
        ew: np.ndarray = _on_nodes(ctx, "e(w)", w, lambda nodes: exp_half_phi(ctx, nodes))
        left: np.ndarray = _on_nodes(ctx, "1-S1", z, lambda nodes: 1.0 - s1(ctx, 1.0 / nodes))
        right: np.ndarray = _on_nodes(ctx, "1-S2", w, lambda nodes: 1.0 - s2(ctx, nodes))
        return {
            "E1": (ez * left, right / ew),
            "E2": (ez * left, ew * (w - a) * _on_nodes(ctx, "T2(w)", w, lambda nodes: t2(ctx, nodes))),
            "E3": (_on_nodes(ctx, "T1(1/z)", z, lambda nodes: t1(ctx, 1.0 / nodes)) / (ez * (z - a)), right / ew),
            "E4": (-ez * _on_nodes(ctx, "T2(z)", z, lambda nodes: t2(ctx, nodes)), _on_nodes(ctx, "T1(1/w)", w, lambda nodes: t1(ctx, 1.0 / nodes)) / ew),
        }

    values: dict[str, complex] = {}
    for term in SADDLE_TERMS:

        def factors(z: np.ndarray, w: np.ndarray, term: str = term) -> list[tuple[np.ndarray, np.ndarray]]:
            first, second = exponentials(z, w)[term]
            return [(first * left, second * right) for left, right in blocks(z, w)]

        result = integrate_cauchy_pair(factors, CircleContour(ctx.radii[1]), CircleContour(ctx.radii[2]), ctx.settings.quadrature)
        values[term] = complex(result.value) / (2j * np.pi) ** 2
    return values


@dataclass(slots=True)
class EynardMehtaKernel:
    """K̃ = δ - K on the inlier Eynard-Mehta kernel, with A inverted directly."""

    ctx: KernelContext

    @property
    def name(self) -> str:
        """Return the registry name."""
        return "em"

    def evaluate(self, r: int, x: int, s: int, y: int) -> float:
        """Return K̃(2r, x; 2s, y)."""
        identity: float = 1.0 if (r, x) == (s, y) else 0.0
        return identity - inlier_kernel(self.ctx, r, x, s, y)


@dataclass(slots=True)
class PerturbedOneAztecKernel:
    """K̃ as the one-Aztec kernel plus the resolvent inner product ⟨(1-K)⁻¹a, b⟩."""

    ctx: KernelContext
    _a_cache: dict[tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)
    _b_cache: dict[tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def name(self) -> str:
        """Return the registry name."""
        return "k1"

    def _resolved_a(self, y: int, s: int) -> np.ndarray:
        key: tuple[int, int] = (y, s)
        if key not in self._a_cache:
            self._a_cache[key] = apply_resolvent(self.ctx, a_vector(self.ctx, -y, s))
        return self._a_cache[key]

    def _b(self, x: int, r: int) -> np.ndarray:
        key: tuple[int, int] = (x, r)
        if key not in self._b_cache:
            self._b_cache[key] = b_vector(self.ctx, -x, r)
        return self._b_cache[key]

    def evaluate(self, r: int, x: int, s: int, y: int) -> float:
        """Return K̃(2r, x; 2s, y)."""
        ctx: KernelContext = self.ctx
        inner: float = float(self._resolved_a(y, s) @ self._b(x, r))
        value: float = _parity(x - y) * (s_function(ctx, r, x, s, y) + inner)
        if s < r:
            value -= psi(ctx, s - r, x, y)
        return value


@dataclass(slots=True)
class ResolventKernel:
    """K̃ from the Christoffel-Darboux form built on R⁽¹⁾ and R⁽²⁾."""

    ctx: KernelContext

    @property
    def name(self) -> str:
        """Return the registry name."""
        return "k2"

    def evaluate(self, r: int, x: int, s: int, y: int) -> float:
        """Return K̃(2r, x; 2s, y)."""
        ctx: KernelContext = self.ctx
        integrals: complex = f_function(ctx, s - r, y - x) + resolvent_double_integral(ctx, r, x, s, y)
        value: complex = _parity(x - y) * _norm_ratio(ctx) * integrals
        if s >= r:
            value += psi(ctx, s - r, x, y)
        return real_part(ctx, value, f"k2 kernel at ({r}, {x}; {s}, {y})")


@dataclass(slots=True)
class SaddleKernel:
    """K̃ from the E₁..E₄ decomposition used for saddle point limits."""

    ctx: KernelContext

    @property
    def name(self) -> str:
        """Return the registry name."""
        return "saddle"

    def evaluate(self, r: int, x: int, s: int, y: int) -> float:
        """Return K̃(2r, x; 2s, y) through the reflected sites (-x, -y)."""
        ctx: KernelContext = self.ctx
        u, gap = s - r, y - x
        terms: dict[str, complex] = saddle_terms(ctx, r, -x, s, -y)
        integrals: complex = f_function(ctx, u, gap) + 2.0 * c2_function(ctx, u, gap) + sum(terms.values())
        value: complex = _parity(x - y) * _norm_ratio(ctx) * integrals
        if s >= r:
            value += psi(ctx, u, x, y)
        return real_part(ctx, value, f"saddle kernel at ({r}, {x}; {s}, {y})")


@dataclass(slots=True)
class RepresentationRegistry:
    """Creates kernel representations from symbolic names."""

    _factories: dict[str, Callable[[KernelContext], KernelRepresentation]]

    def register(self, name: str, factory: Callable[[KernelContext], KernelRepresentation]) -> None:
        """Register a representation factory under a symbolic name."""
        self._factories[name] = factory

    def create(self, name: str, ctx: KernelContext) -> KernelRepresentation:
        """Create one representation by name or raise if unknown."""
        if name not in self._factories:
            available: str = ", ".join(sorted(self._factories))
            raise ValueError(f"Unknown kernel representation '{name}'. Available: {available}")
        return self._factories[name](ctx)

    def create_many(self, names: Iterable[str], ctx: KernelContext) -> list[KernelRepresentation]:
        """Create multiple representations in the exact order requested; ['all'] selects every one."""
        selected: list[str] = list(names)
        if selected == ["all"]:
            selected = self.names()
        return [self.create(name, ctx) for name in selected]

    def names(self) -> list[str]:
        """Return the registered names in registration order."""
        return list(self._factories)


def build_default_representation_registry() -> RepresentationRegistry:
    """Build a registry with all built-in kernel representations."""
    registry = RepresentationRegistry(_factories={})
    registry.register("em", EynardMehtaKernel)
    registry.register("k1", PerturbedOneAztecKernel)
    registry.register("k2", ResolventKernel)
    registry.register("saddle", SaddleKernel)
    return registry


def ext_kernel(ctx: KernelContext, representation: KernelRepresentation, r: int, x: int, s: int, y: int) -> KernelValue:
    """Evaluate one representation at a validated site pair."""
    ctx.shape.check_site(r, x)
    ctx.shape.check_site(s, y)
    return KernelValue(r=r, x=x, s=s, y=y, value=representation.evaluate(r, x, s, y), representation=representation.name)


def kernel_grid(
    ctx: KernelContext,
    representations: Sequence[KernelRepresentation],
    points: Sequence[tuple[int, int, int, int]],
) -> list[KernelValue]:
    """Evaluate every representation at every (r, x, s, y) point, ordered by point then representation."""
    return [ext_kernel(ctx, rep, *point) for point in points for rep in representations]


def _gap_sites(ctx: KernelContext, lines: Sequence[int], windows: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    if len(lines) != len(windows):
        raise OutOfRange(f"{len(lines)} lines but {len(windows)} windows")
    sites: list[tuple[int, int]] = []
    for line, (lo, hi) in zip(lines, windows):
        if line % 2 or not 2 <= line <= 2 * ctx.n:
            raise OutOfRange(f"gap lines must be even in [2, {2 * ctx.n}], got {line}")
        if lo < -ctx.shape.half_width or hi > ctx.shape.half_width:
            raise OutOfRange(f"window [{lo}, {hi}] leaves [-{ctx.shape.half_width}, {ctx.shape.half_width}]")
        sites.extend((line // 2, x) for x in range(lo, hi + 1))
    return sites


def gap_probability(
    ctx: KernelContext,
    lines: Sequence[int],
    windows: Sequence[tuple[int, int]],
    representation: KernelRepresentation | None = None,
    conjugation: float | None = None,
) -> float:
    """Return P(line Y_{ℓ_i} has no dot in [k_i, l_i] for all i) = det(1 - χK̃χ).

    lines holds even line numbers ℓ_i = 2r_i. With conjugation λ the kernel is
    replaced by λ^{x-y+r-s}(-1)^{x-y}K̃, which leaves the determinant unchanged.
    """
    sites: list[tuple[int, int]] = _gap_sites(ctx, lines, windows)
    if not sites:
        return 1.0
    rep: KernelRepresentation = representation or EynardMehtaKernel(ctx)
    matrix: np.ndarray = np.array([[rep.evaluate(r, x, s, y) for s, y in sites] for r, x in sites])
    if conjugation is not None:
        rows: np.ndarray = np.array([float(x + r) for r, x in sites])
        signs: np.ndarray = np.array([_parity(x) for _, x in sites])
        scale: np.ndarray = conjugation ** (rows[:, None] - rows[None, :]) * np.outer(signs, signs)
        matrix = matrix * scale
    value: float = float(scipy.linalg.det(np.eye(len(sites)) - matrix))
    logger.debug("Gap probability over %d sites: %.12g", len(sites), value)
    return value


def line_trace(ctx: KernelContext, representation: KernelRepresentation, r: int) -> float:
    """Return Σ_x K̃(2r, x; 2r, x) over the full line."""
    width: int = ctx.shape.half_width
    return sum(representation.evaluate(r, x, r, x) for x in range(-width, width + 1))
