"""The K⁽ⁱ⁾ operators, their Fredholm determinants, resolvent vectors and biorthogonal polynomials."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg

from double_aztec.contour import CircleContour, integrate_circle, integrate_double_circle
from double_aztec.errors import IllConditioned, OutOfRange, SeriesDivergence, TruncationUnstable
from double_aztec.symbols import BinomialSymbol, KernelContext, h1_bar_series, h2_bar_series, series_depth, varphi
from double_aztec.types import WindowOperator

logger = logging.getLogger(__name__)

TRUNCATION_TOLERANCE = 1e-10
TOEPLITZ_DPS = 40
K_VARIANTS: tuple[str, ...] = ("K1_0", "K1", "K2", "K3")
H_VARIANTS: tuple[str, ...] = ("H_at_0", "H1", "H2", "H3")
CONVENTIONS: tuple[str, ...] = ("transpose", "plain")


def _alternating(lo: int, hi: int) -> np.ndarray:
    return np.where(np.arange(lo, hi + 1) % 2 == 0, 1.0, -1.0)


def _as_nodes(values: complex | np.ndarray) -> np.ndarray:
    return np.atleast_1d(np.asarray(values, dtype=complex))


def g1_values(ctx: KernelContext, lo: int, hi: int) -> np.ndarray:
    """Return g1_ℓ(n) = -(-1)^ℓ [u^{-ℓ-1}]φ for ℓ = lo..hi."""
    if hi < lo:
        return np.zeros(0)
    return -_alternating(lo, hi) * ctx.coefficients(ctx.n, ctx.n + 1, -hi - 1, -lo - 1)[::-1]


def g2_values(ctx: KernelContext, lo: int, hi: int) -> np.ndarray:
    """Return g2_ℓ(n) = -(-1)^ℓ [u^{ℓ+1}](1/φ) for ℓ = lo..hi."""
    if hi < lo:
        return np.zeros(0)
    return -_alternating(lo, hi) * ctx.coefficients(-ctx.n, -(ctx.n + 1), lo + 1, hi + 1)


def k0_block(ctx: KernelContext, rows: tuple[int, int], cols: tuple[int, int]) -> np.ndarray:
    """Return K⁽¹⁾(0)_{kℓ} = Σ_{α>=0} g1_{ℓ+α} g2_{k+α} for k in rows and ℓ in cols, both inclusive.

    The α-sum is finite: g1 vanishes beyond n, so columns with ℓ > n are zero.
    """
    (row_lo, row_hi), (col_lo, col_hi) = rows, cols
    shape: tuple[int, int] = (max(row_hi - row_lo + 1, 0), max(col_hi - col_lo + 1, 0))
    depth: int = ctx.n - col_lo + 1
    if depth <= 0 or 0 in shape:
        return np.zeros(shape)

    def build() -> np.ndarray:
        steps: np.ndarray = np.arange(depth)
        first: np.ndarray = g1_values(ctx, col_lo, col_hi + depth - 1)
        second: np.ndarray = g2_values(ctx, row_lo, row_hi + depth - 1)
        first_grid: np.ndarray = first[np.arange(shape[1])[:, None] + steps]
        second_grid: np.ndarray = second[np.arange(shape[0])[:, None] + steps]
        return second_grid @ first_grid.T

    return ctx.memo(("k0", row_lo, row_hi, col_lo, col_hi), build)


def k0_entry_contour(ctx: KernelContext, k: int, ell: int) -> float:
    """Return K⁽¹⁾(0)_{kℓ} from its double contour integral with |u| < |v|."""
    sign: float = 1.0 if (k + ell) % 2 == 0 else -1.0
    inner: CircleContour = CircleContour(ctx.radii[0])
    outer: CircleContour = CircleContour(ctx.radii[2])

    def integrand(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        ratio: np.ndarray = varphi(ctx, u) / varphi(ctx, v)
        return sign * u**ell * v ** (-k - 1) * ratio / (v - u) / (2j * np.pi) ** 2

    result = integrate_double_circle(integrand, inner, outer, ctx.settings.quadrature)
    return float(np.real(result.value))


def j1_matrix(ctx: KernelContext, lo: int, hi: int, zeta: complex | np.ndarray) -> np.ndarray:
    """Return J1_k(ζ) for k = lo..hi (rows) and each ζ (columns); needs |ζ| < 1/a."""
    nodes: np.ndarray = _as_nodes(zeta)
    ratio: float = float(np.abs(nodes).max()) * ctx.a
    if ratio >= 1.0:
        raise SeriesDivergence(f"J1 series needs |z^-1| < 1/a, got ratio {ratio:.4g}")
    size: int = max(hi - lo + 1, 0)
    depth: int = series_depth(ctx, ratio)
    coefficients: np.ndarray = ctx.coefficients(-ctx.n, -(ctx.n + 1), lo - depth, hi)
    index: np.ndarray = np.arange(size)[:, None] - np.arange(depth + 1)[None, :] + depth
    powers: np.ndarray = nodes[None, :] ** np.arange(depth + 1)[:, None]
    return -_alternating(lo, hi)[:, None] * (coefficients[index] @ powers)


def j2_matrix(ctx: KernelContext, lo: int, hi: int, w: complex | np.ndarray) -> np.ndarray:
    """Return the polynomials J2_ℓ(w) for ℓ = lo..hi (rows) at each w (columns)."""
    nodes: np.ndarray = _as_nodes(w)
    size: int = max(hi - lo + 1, 0)
    top: int = hi + ctx.n
    if top < 0 or size == 0:
        return np.zeros((size, len(nodes)), dtype=complex)
    width: int = 2 * ctx.n + 2
    phi: np.ndarray = ctx.coefficients(ctx.n, ctx.n + 1, -(ctx.n + 1), ctx.n)
    index: np.ndarray = np.arange(top + 1)[None, :] - np.arange(lo, hi + 1)[:, None] + ctx.n + 1
    inside: np.ndarray = (index >= 0) & (index < width)
    table: np.ndarray = np.where(inside, phi[np.clip(index, 0, width - 1)], 0.0)
    powers: np.ndarray = nodes[None, :] ** np.arange(top + 1)[:, None]
    return -_alternating(lo, hi)[:, None] * (table @ powers)


def h1_matrix(ctx: KernelContext, lo: int, hi: int, zeta: complex | np.ndarray) -> np.ndarray:
    """Return h1_k(ζ) = ζ·J1_k(ζ)."""
    nodes: np.ndarray = _as_nodes(zeta)
    return nodes[None, :] * j1_matrix(ctx, lo, hi, nodes)


def h2_matrix(ctx: KernelContext, lo: int, hi: int, w: complex | np.ndarray) -> np.ndarray:
    """Return h2_k(w) = w·J2_k(w)."""
    nodes: np.ndarray = _as_nodes(w)
    return nodes[None, :] * j2_matrix(ctx, lo, hi, nodes)


def k_operator(
    ctx: KernelContext,
    variant: str,
    lo: int,
    hi: int,
    zinv: complex = 0j,
    w: complex = 0j,
) -> WindowOperator:
    """Return K1_0, K1(z⁻¹), K2(w) or K3(z⁻¹, w) on the window [lo, hi].

    K1 and K2 are K(0) plus their rank-one term; K3 is the index-shifted K(0) plus
    (1 - z⁻¹w) J1_{k+1}(z⁻¹) J2_{ℓ+1}(w).
    """
    if variant not in K_VARIANTS:
        raise ValueError(f"Unknown K variant '{variant}'. Available: {', '.join(sorted(K_VARIANTS))}")
    if lo < 0:
        raise OutOfRange(f"window [{lo}, {hi}] is not a sub-window of [0, ...)")
    hi = max(hi, lo - 1)
    window: tuple[int, int] = (lo, hi)
    if variant == "K1_0":
        matrix: np.ndarray = k0_block(ctx, window, window)
    elif variant == "K1":
        matrix = k0_block(ctx, window, window) + np.outer(h1_matrix(ctx, lo, hi, zinv)[:, 0], g1_values(ctx, lo, hi))
    elif variant == "K2":
        matrix = k0_block(ctx, window, window).T + np.outer(h2_matrix(ctx, lo, hi, w)[:, 0], g2_values(ctx, lo, hi))
    else:
        shifted: tuple[int, int] = (lo + 1, hi + 1)
        coupling: np.ndarray = np.outer(j1_matrix(ctx, lo + 1, hi + 1, zinv)[:, 0], j2_matrix(ctx, lo + 1, hi + 1, w)[:, 0])
        matrix = k0_block(ctx, shifted, shifted) + (1.0 - zinv * w) * coupling
    return WindowOperator(lo=lo, hi=hi, matrix=matrix)


def h_at_zero(ctx: KernelContext, p: int) -> float:
    """Return H_p(0) = det(1 - K⁽¹⁾(0)) on ℓ²(p, p+1, ...), exact on [p, n]."""

    def build() -> float:
        return float(np.real(k_operator(ctx, "K1_0", max(p, 0), ctx.n).fredholm_det()))

    return ctx.memo(("h0", p), build)


def _stable_det(
    ctx: KernelContext,
    build: Callable[[int], complex],
    p: int,
    label: str,
    reach: float = 1.0,
) -> complex:
    """Evaluate a truncated determinant on [p, K_max] and confirm it against a doubled window."""
    hi: int = max(ctx.window_end(reach), p + 1)
    value: complex = build(hi)
    if not ctx.settings.check_truncation:
        return value
    doubled: int = p + 2 * (hi - p + 1) - 1
    check: complex = build(doubled)
    drift: float = abs(check - value)
    logger.debug("%s_%d truncation drift %.3g between K_max=%d and %d", label, p, drift, hi, doubled)
    if drift > TRUNCATION_TOLERANCE * (1.0 + abs(check)):
        raise TruncationUnstable(f"{label}_{p} moved by {drift:.3g} when the window doubled to {doubled}")
    return check


def fredholm_h(ctx: KernelContext, variant: str, p: int, zinv: complex = 0j, w: complex = 0j) -> complex:
    """Return H_p(0), H⁽¹⁾_p(z⁻¹), H⁽²⁾_p(w) or H⁽³⁾_p(z⁻¹, w) as det(1 - K) on ℓ²(p, ...)."""
    if variant not in H_VARIANTS:
        raise ValueError(f"Unknown H variant '{variant}'. Available: {', '.join(sorted(H_VARIANTS))}")
    if variant == "H_at_0":
        return complex(h_at_zero(ctx, p))
    if variant == "H1":
        return k_operator(ctx, "K1", max(p, 0), ctx.n, zinv=zinv).fredholm_det()
    kernel: str = "K2" if variant == "H2" else "K3"
    growth: float = max(1.0, abs(w))
    # K2 rows grow like |w|^k; K3 columns grow like |w|^ℓ against J1 decaying like max(|z⁻¹|, a)^k.
    if variant == "H2" or growth == 1.0:
        reach: float = growth
        scale: float = growth
    else:
        reach = growth * max(abs(zinv), ctx.a) / ctx.a
        scale = 1.0 / growth
    return _stable_det(
        ctx,
        lambda hi: k_operator(ctx, kernel, p, hi, zinv=zinv, w=w).balanced(scale).fredholm_det(),
        p,
        variant,
        reach,
    )


def partition_constant(ctx: KernelContext) -> float:
    """Return Z = (1+a²)^{n(n+1)}."""
    return (1.0 + ctx.a**2) ** (ctx.n * (ctx.n + 1))


def moment_matrix(ctx: KernelContext, size: int) -> np.ndarray:
    """Return the Toeplitz moment matrix T_{ij} = [z^{j-i}]ρ with ρ = (1+az)^n (1-a/z)^{-(n+1)}."""
    if size <= 0:
        return np.zeros((0, 0))
    column: np.ndarray = ctx.coefficients(ctx.n, -(ctx.n + 1), -(size - 1), 0)[::-1]
    row: np.ndarray = ctx.coefficients(ctx.n, -(ctx.n + 1), 0, size - 1)
    return scipy.linalg.toeplitz(column, row)


def exact_moment(ctx: KernelContext, k: int) -> mpmath.mpf:
    """Return [z^k]ρ as a finite binomial sum in working precision."""
    if k > ctx.n:
        return mpmath.mpf(0)
    a: mpmath.mpf = mpmath.mpf(ctx.a)
    return mpmath.fsum(
        mpmath.binomial(ctx.n, i) * mpmath.binomial(ctx.n + i - k, i - k) * a ** (2 * i - k)
        for i in range(max(0, k), ctx.n + 1)
    )


def toeplitz_tau(ctx: KernelContext, p: int, route: str = "direct") -> float:
    """Return τ_p as a p×p Toeplitz determinant ("direct") or as Z·H_p(0) ("fredholm").

    The direct route works in extended precision: the moment matrix loses about one digit per row in doubles.
    """
    if route == "direct":
        if p == 0:
            return 1.0
        with mpmath.workdps(TOEPLITZ_DPS):
            moments: dict[int, mpmath.mpf] = {k: exact_moment(ctx, k) for k in range(-(p - 1), p)}
            matrix = mpmath.matrix([[moments[j - i] for j in range(p)] for i in range(p)])
            return float(mpmath.det(matrix))
    if route == "fredholm":
        return partition_constant(ctx) * h_at_zero(ctx, p)
    raise ValueError(f"Unknown tau route '{route}'. Available: direct, fredholm")


@dataclass(slots=True, frozen=True)
class ResolventVectors:
    """Q⁽¹⁾ and Q⁽²⁾ on the window [lo, hi]; both vanish outside it."""

    lo: int
    hi: int
    q1: np.ndarray
    q2: np.ndarray
    condition: float

    def first(self, k: int) -> float:
        """Return Q⁽¹⁾_k."""
        index: int = k - self.lo
        return float(self.q1[index]) if 0 <= index < len(self.q1) else 0.0

    def second(self, k: int) -> float:
        """Return Q⁽²⁾_k."""
        index: int = k - self.lo
        return float(self.q2[index]) if 0 <= index < len(self.q2) else 0.0


def _resolvent_core(ctx: KernelContext) -> tuple[np.ndarray, float]:
    """Return 1 - K(0) on [2m+1, n] with its condition number."""

    def build() -> tuple[np.ndarray, float]:
        lo: int = ctx.shape.inliers
        top: int = min(ctx.n, ctx.k_max)
        core: np.ndarray = np.eye(max(top - lo + 1, 0)) - k0_block(ctx, (lo, top), (lo, top))
        condition: float = float(np.linalg.cond(core)) if core.size else 1.0
        if condition > ctx.settings.max_condition:
            raise IllConditioned(f"1 - K(0) on [{lo}, {top}] has condition {condition:.3g}", condition)
        return core, condition

    return ctx.memo("resolvent_core", build)


def apply_resolvent(ctx: KernelContext, source: np.ndarray, transposed: bool = False) -> np.ndarray:
    """Return (1 - K(0))⁻¹f, or (1 - K(0)ᵀ)⁻¹f, for f given on [2m+1, K_max].

    Only columns ℓ <= n of K(0) are non-zero, so the solve is exact on [2m+1, n]
    and the tail follows by one matrix product.
    """
    lo: int = ctx.shape.inliers
    hi: int = ctx.k_max
    top: int = min(ctx.n, hi)
    if len(source) != hi - lo + 1:
        raise ValueError(f"resolvent source has length {len(source)}, expected {hi - lo + 1}")
    if top < lo:
        return np.array(source, copy=True)
    core, _ = _resolvent_core(ctx)
    head: int = top - lo + 1
    if not transposed:
        solved: np.ndarray = scipy.linalg.solve(core, source[:head])
        return source + k0_block(ctx, (lo, hi), (lo, top)) @ solved
    coupled: np.ndarray = source[:head] + k0_block(ctx, (top + 1, hi), (lo, top)).T @ source[head:]
    out: np.ndarray = np.array(source, copy=True)
    out[:head] = scipy.linalg.solve(core.T, coupled)
    return out


def resolvent_vectors(ctx: KernelContext, convention: str = "transpose") -> ResolventVectors:
    """Return Q⁽¹⁾ and Q⁽²⁾ on [2m+1, K_max].

    The "transpose" convention uses Q⁽¹⁾ = (1-K(0)ᵀ)⁻¹g1 and Q⁽²⁾ = (1-K(0))⁻¹g2;
    "plain" swaps which resolvent each vector gets.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"Unknown resolvent convention '{convention}'. Available: {', '.join(sorted(CONVENTIONS))}")

    def build() -> ResolventVectors:
        lo: int = ctx.shape.inliers
        hi: int = ctx.k_max
        _, condition = _resolvent_core(ctx)
        swap: bool = convention == "transpose"
        q1: np.ndarray = apply_resolvent(ctx, g1_values(ctx, lo, hi), transposed=swap)
        q2: np.ndarray = apply_resolvent(ctx, g2_values(ctx, lo, hi), transposed=not swap)
        logger.debug("Resolvent vectors on [%d, %d], condition %.3g", lo, hi, condition)
        return ResolventVectors(lo=lo, hi=hi, q1=q1, q2=q2, condition=condition)

    return ctx.memo(("resolvent", convention), build)


def r1(ctx: KernelContext, zinv: complex | np.ndarray, convention: str = "transpose") -> np.ndarray:
    """Return R⁽¹⁾(z⁻¹) = Σ_k Q⁽¹⁾_k h1_k(z⁻¹) at each z⁻¹."""
    vectors: ResolventVectors = resolvent_vectors(ctx, convention)
    return vectors.q1 @ h1_matrix(ctx, vectors.lo, vectors.hi, zinv)


def r2(ctx: KernelContext, w: complex | np.ndarray, convention: str = "transpose") -> np.ndarray:
    """Return R⁽²⁾(w) = Σ_k Q⁽²⁾_k h2_k(w) at each w."""
    vectors: ResolventVectors = resolvent_vectors(ctx, convention)
    return vectors.q2 @ h2_matrix(ctx, vectors.lo, vectors.hi, w)


def s1(ctx: KernelContext, zinv: complex | np.ndarray) -> np.ndarray:
    """Return S⁽¹⁾(z⁻¹) = Σ_k Q⁽¹⁾_k h̄1_k(z⁻¹), analytic for |z| < 1/a."""
    vectors: ResolventVectors = resolvent_vectors(ctx)
    z: np.ndarray = 1.0 / _as_nodes(zinv)
    total: np.ndarray = np.zeros(len(z), dtype=complex)
    for offset, weight in enumerate(vectors.q1):
        if weight != 0.0:
            total += weight * np.asarray(h1_bar_series(ctx, vectors.lo + offset, z))
    return total


def s2(ctx: KernelContext, w: complex | np.ndarray) -> np.ndarray:
    """Return S⁽²⁾(w) = Σ_k Q⁽²⁾_k h̄2_k(w); only k <= n contribute."""
    vectors: ResolventVectors = resolvent_vectors(ctx)
    nodes: np.ndarray = _as_nodes(w)
    total: np.ndarray = np.zeros(len(nodes), dtype=complex)
    for k in range(vectors.lo, min(ctx.n, vectors.hi) + 1):
        total += vectors.second(k) * np.asarray(h2_bar_series(ctx, k, nodes))
    return total


def t1(ctx: KernelContext, zinv: complex | np.ndarray) -> np.ndarray:
    """Return T⁽¹⁾(z⁻¹) = Σ_{j>=1} Q⁽¹⁾_{2m+j} (-z)^{-j}."""
    vectors: ResolventVectors = resolvent_vectors(ctx)
    nodes: np.ndarray = _as_nodes(zinv)
    powers: np.ndarray = (-nodes[None, :]) ** np.arange(1, len(vectors.q1) + 1)[:, None]
    return vectors.q1 @ powers


def t2(ctx: KernelContext, w: complex | np.ndarray) -> np.ndarray:
    """Return T⁽²⁾(w) = Σ_{j>=1} Q⁽²⁾_{2m+j} (-w)^j."""
    vectors: ResolventVectors = resolvent_vectors(ctx)
    nodes: np.ndarray = _as_nodes(w)
    if float(np.abs(nodes).max()) * ctx.a >= 1.0:
        raise SeriesDivergence("T2 series needs |w| < 1/a")
    powers: np.ndarray = (-nodes[None, :]) ** np.arange(1, len(vectors.q2) + 1)[:, None]
    return vectors.q2 @ powers


def exp_half_phi(ctx: KernelContext, z: complex | np.ndarray) -> np.ndarray:
    """Return e^{(n/2)Φ(z)} = (-z)^m ((1+az)(1-a/z))^{n/2}."""
    nodes: np.ndarray = _as_nodes(z)
    return (-nodes) ** ctx.m * ((1.0 + ctx.a * nodes) * (1.0 - ctx.a / nodes)) ** (ctx.n // 2)


def norm_identity(ctx: KernelContext, convention: str = "transpose") -> complex:
    """Return (H_{2m+1}/H_{2m+2}) ∮ dz/(2πiz) (1 - R⁽¹⁾(z⁻¹))(1 - R⁽²⁾(z)) on |z| = 1; equals 1."""
    lead: int = ctx.shape.inliers

    def integrand(z: np.ndarray) -> np.ndarray:
        return (1.0 - r1(ctx, 1.0 / z, convention)) * (1.0 - r2(ctx, z, convention)) / (2j * np.pi * z)

    integral = integrate_circle(integrand, CircleContour(1.0), ctx.settings.quadrature)
    return h_at_zero(ctx, lead) / h_at_zero(ctx, lead + 1) * complex(integral.value)


@dataclass(slots=True, frozen=True)
class GramPolynomials:
    """Biorthonormal pairs P_k(z) = Σ_i first[k][i] z^i and P̂_k(z⁻¹) = Σ_j second[k][j] z^{-j}."""

    first: tuple[np.ndarray, ...]
    second: tuple[np.ndarray, ...]
    norms: np.ndarray

    @property
    def degree(self) -> int:
        """Return the largest available degree."""
        return len(self.first) - 1


def gram_polynomials(ctx: KernelContext, degree: int) -> GramPolynomials:
    """Return P_k, P̂_k for k <= degree from linear solves against the moment matrix."""

    def build() -> GramPolynomials:
        moments: np.ndarray = moment_matrix(ctx, degree + 1)
        first: list[np.ndarray] = []
        second: list[np.ndarray] = []
        norms: list[float] = []
        for k in range(degree + 1):
            p: np.ndarray = np.zeros(k + 1)
            q: np.ndarray = np.zeros(k + 1)
            p[k] = q[k] = 1.0
            if k:
                block: np.ndarray = moments[:k, :k]
                condition: float = float(np.linalg.cond(block))
                if condition > ctx.settings.max_condition:
                    raise IllConditioned(f"moment matrix of size {k} has condition {condition:.3g}", condition)
                p[:k] = scipy.linalg.solve(block.T, -moments[k, :k])
                q[:k] = scipy.linalg.solve(block, -moments[:k, k])
            norm: float = float(p @ moments[: k + 1, k])
            first.append(p / math.sqrt(norm))
            second.append(q / math.sqrt(norm))
            norms.append(norm)
        return GramPolynomials(first=tuple(first), second=tuple(second), norms=np.array(norms))

    return ctx.memo(("gram", degree), build)


def _h1_values(ctx: KernelContext, k: int, zinv: np.ndarray) -> np.ndarray:
    base: np.ndarray = k0_block(ctx, (k, ctx.n), (k, ctx.n))
    if base.size == 0:
        return np.ones(len(zinv), dtype=complex)
    first: np.ndarray = g1_values(ctx, k, ctx.n)
    columns: np.ndarray = h1_matrix(ctx, k, ctx.n, zinv)
    stack: np.ndarray = base[None, :, :] + columns.T[:, :, None] * first[None, None, :]
    return np.linalg.det(np.eye(len(first))[None, :, :] - stack)


def biorth_values(
    ctx: KernelContext,
    k: int,
    points: complex | np.ndarray,
    route: str = "gram",
) -> tuple[np.ndarray, np.ndarray]:
    """Return (P_k(z), P̂_k(z⁻¹)) at each point z."""
    nodes: np.ndarray = _as_nodes(points)
    if route == "gram":
        polys: GramPolynomials = gram_polynomials(ctx, max(k, ctx.shape.inliers))
        direct: np.ndarray = np.polynomial.polynomial.polyval(nodes, polys.first[k])
        dual: np.ndarray = np.polynomial.polynomial.polyval(1.0 / nodes, polys.second[k])
        return direct, dual
    if route == "fredholm":
        scale: float = math.sqrt(h_at_zero(ctx, k) * h_at_zero(ctx, k + 1))
        direct = nodes**k * (1.0 - ctx.a / nodes) ** (ctx.n + 1) * _h1_values(ctx, k, 1.0 / nodes) / scale
        second: np.ndarray = np.array([fredholm_h(ctx, "H2", k, w=complex(w)) for w in nodes])
        dual = nodes ** (-k) * (1.0 + ctx.a * nodes) ** (-ctx.n) * second / scale
        return direct, dual
    raise ValueError(f"Unknown polynomial route '{route}'. Available: fredholm, gram")


def biorth_polys(ctx: KernelContext, k: int, point: complex, route: str = "gram") -> tuple[complex, complex]:
    """Return (P_k(point), P̂_k(1/point))."""
    direct, dual = biorth_values(ctx, k, point, route)
    return complex(direct[0]), complex(dual[0])


def biorth_pairing(ctx: KernelContext, k: int, ell: int, route: str = "gram") -> complex:
    """Return ⟨⟨P_k, P̂_ℓ⟩⟩ = ∮ dz/(2πiz) P_k(z) P̂_ℓ(z⁻¹) ρ(z) on the unit circle."""
    weight: BinomialSymbol = BinomialSymbol(ctx.a, ctx.n, -(ctx.n + 1))

    def integrand(z: np.ndarray) -> np.ndarray:
        direct, _ = biorth_values(ctx, k, z, route)
        _, dual = biorth_values(ctx, ell, z, route)
        return direct * dual * weight(z) / (2j * np.pi * z)

    return complex(integrate_circle(integrand, CircleContour(1.0), ctx.settings.quadrature).value)


def christoffel_darboux_check(ctx: KernelContext, z: complex, w: complex, size: int | None = None) -> float:
    """Return |Σ_{k<M} P̂_k(z⁻¹)P_k(w) - CD(z, w)|, using the derivative form when w = z."""
    order: int = ctx.shape.inliers if size is None else size
    polys: GramPolynomials = gram_polynomials(ctx, order)
    evaluate = np.polynomial.polynomial.polyval
    total: complex = sum(
        complex(evaluate(1.0 / z, polys.second[k]) * evaluate(w, polys.first[k])) for k in range(order)
    )
    lead: np.ndarray = polys.first[order]
    dual: np.ndarray = polys.second[order]
    z_lead: complex = complex(z ** (-order) * evaluate(z, lead))
    z_dual: complex = complex(evaluate(1.0 / z, dual))
    reversed_dual: np.ndarray = dual[::-1]
    if abs(w - z) > 1e-7 * abs(z):
        numerator: complex = z_lead * complex(evaluate(w, reversed_dual)) - z_dual * complex(evaluate(w, lead))
        closed: complex = numerator / (1.0 - w / z)
    else:
        slope: complex = z_lead * complex(evaluate(z, np.polynomial.polynomial.polyder(reversed_dual)))
        slope -= z_dual * complex(evaluate(z, np.polynomial.polynomial.polyder(lead)))
        closed = -z * slope
    return abs(total - closed)


def rank_one_identity_residual(rng: np.random.Generator, size: int = 6, c: float = 0.37) -> float:
    """Check det(1-A+c·a⊗b) = (1-c)det(1-A) + c·det(1-A+a⊗b) on a random instance."""
    matrix: np.ndarray = 0.2 * rng.standard_normal((size, size))
    left: np.ndarray = rng.standard_normal(size)
    right: np.ndarray = rng.standard_normal(size)
    identity: np.ndarray = np.eye(size)
    lhs: float = scipy.linalg.det(identity - matrix + c * np.outer(left, right))
    rhs: float = (1.0 - c) * scipy.linalg.det(identity - matrix) + c * scipy.linalg.det(
        identity - matrix + np.outer(left, right)
    )
    return float(abs(lhs - rhs))


def contour_rank_identity_residual(rng: np.random.Generator, size: int = 6, nodes: int = 48) -> float:
    """Check the averaged rank-one identity over discretized unit circles.

    ∮∮ F(z)G(w) det(1-K+a^z⊗b^w) = det(1-K+⟨F a⟩⊗⟨G b⟩) + (⟨F⟩⟨G⟩-1) det(1-K),
    with ⟨·⟩ the normalized mean over the nodes.
    """
    z: np.ndarray = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    kernel: np.ndarray = 0.2 * rng.standard_normal((size, size))
    base: np.ndarray = np.eye(size) - kernel
    a0, a1, b0, b1 = (rng.standard_normal(size) for _ in range(4))
    alpha, beta = rng.standard_normal(2)
    f_values: np.ndarray = np.exp(alpha * z)
    g_values: np.ndarray = 1.0 + beta / z + z**2
    a_vectors: np.ndarray = a0[None, :] + z[:, None] * a1[None, :]
    b_vectors: np.ndarray = b0[None, :] + b1[None, :] / z[:, None]
    updates: np.ndarray = a_vectors[:, None, :, None] * b_vectors[None, :, None, :]
    determinants: np.ndarray = np.linalg.det(base[None, None, :, :] + updates)
    lhs: complex = complex(np.mean(f_values[:, None] * g_values[None, :] * determinants))
    a_mean: np.ndarray = (f_values[:, None] * a_vectors).mean(axis=0)
    b_mean: np.ndarray = (g_values[:, None] * b_vectors).mean(axis=0)
    rhs: complex = complex(np.linalg.det(base + np.outer(a_mean, b_mean)))
    rhs += (f_values.mean() * g_values.mean() - 1.0) * complex(np.linalg.det(base))
    return abs(lhs - rhs)


def rank_identity_checks(seed: int = 7) -> dict[str, float]:
    """Return residuals of both rank-one determinant identities on random small instances."""
    rng: np.random.Generator = np.random.default_rng(seed)
    return {
        "rank_one_c0": rank_one_identity_residual(rng, c=0.0),
        "rank_one_c1": rank_one_identity_residual(rng, c=1.0),
        "rank_one": rank_one_identity_residual(rng),
        "contour": contour_rank_identity_residual(rng),
    }
