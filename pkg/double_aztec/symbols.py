"""Laurent symbols and the ψ/φ/g/h building blocks of the finite-size kernels."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

from double_aztec.config import KernelSettings
from double_aztec.contour import CircleContour, integrate_circle, laurent_coefficients
from double_aztec.errors import InvalidShape, NonConvergence, SeriesDivergence
from double_aztec.types import ModelShape

logger = logging.getLogger(__name__)

LADDER_EXPONENTS: tuple[float, ...] = (5 / 7, 3 / 7, 1 / 7, -1 / 7, -3 / 7, -5 / 7)


def _round_up(length: int) -> int:
    return 64 * ((length + 63) // 64)


@lru_cache(maxsize=1024)
def _binomial_series(p: int, coefficient: float, tolerance: float, min_length: int) -> np.ndarray:
    """Return the coefficients of (1 + c·t)^p in powers of t.

    Finite for p >= 0. For p < 0 the series is cut once terms stay below
    tolerance·max for 8 consecutive indices past the peak, but never before
    min_length.
    """
    if p >= 0:
        return np.array([math.comb(p, i) * coefficient**i for i in range(p + 1)])
    terms: list[float] = [1.0]
    peak: float = 1.0
    quiet: int = 0
    i: int = 0
    while True:
        nxt: float = terms[-1] * (p - i) * coefficient / (i + 1)
        terms.append(nxt)
        i += 1
        peak = max(peak, abs(nxt))
        growing: bool = abs((p - i) * coefficient / (i + 1)) >= 1.0
        quiet = quiet + 1 if (abs(nxt) < tolerance * peak and not growing) else 0
        if (quiet >= 8 and len(terms) >= min_length) or abs(nxt) == 0.0 and len(terms) >= min_length:
            break
    return np.array(terms)


@lru_cache(maxsize=512)
def _laurent_table(a: float, p: int, q: int, tolerance: float, positive: int, negative: int) -> tuple[int, np.ndarray]:
    """Return (offset, coefficients) of (1+az)^p (1-a/z)^q; entry i holds z^(i-offset)."""
    alpha: np.ndarray = _binomial_series(p, a, tolerance, positive)
    beta: np.ndarray = _binomial_series(q, -a, tolerance, negative)
    table: np.ndarray = np.convolve(alpha, beta[::-1])
    return len(beta) - 1, table


@dataclass(slots=True, frozen=True)
class BinomialSymbol:
    """The Laurent symbol (1+az)^p (1-a/z)^q on its annulus of convergence."""

    a: float
    p: int
    q: int

    def __call__(self, z: np.ndarray | complex) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (1.0 + self.a * z) ** self.p * (1.0 - self.a / z) ** self.q

    @property
    def annulus(self) -> tuple[float, float]:
        """Return (inner, outer) radii between which the Laurent expansion converges."""
        inner: float = self.a if self.q < 0 else 0.0
        outer: float = 1.0 / self.a if self.p < 0 else math.inf
        return inner, outer

    def coefficients(self, lo: int, hi: int, tolerance: float = 1e-17) -> np.ndarray:
        """Return [z^j] for j = lo..hi from the binomial series product."""
        positive: int = _round_up(max(hi + 1 + max(self.q, 0), 1)) if self.p < 0 else 0
        negative: int = _round_up(max(-lo + 1 + max(self.p, 0), 1)) if self.q < 0 else 0
        offset, table = _laurent_table(self.a, self.p, self.q, tolerance, positive, negative)
        out: np.ndarray = np.zeros(hi - lo + 1)
        for position, j in enumerate(range(lo, hi + 1)):
            index: int = j + offset
            if 0 <= index < len(table):
                out[position] = table[index]
        return out

    def coefficient(self, j: int) -> float:
        """Return [z^j]."""
        return float(self.coefficients(j, j)[0])

    def contour_coefficients(self, lo: int, hi: int, radii: tuple[float, ...], settings: KernelSettings) -> np.ndarray:
        """Return [z^j] for j = lo..hi by FFT on circles, choosing per index the best-conditioned radius."""
        inner, outer = self.annulus
        usable: list[float] = [radius for radius in radii if inner < radius < outer]
        if not usable:
            raise SeriesDivergence(f"no radius in the annulus ({inner:.3g}, {outer:.3g})")
        indices: np.ndarray = np.arange(lo, hi + 1)
        best: np.ndarray = np.zeros(len(indices))
        best_scale: np.ndarray = np.full(len(indices), np.inf)
        quadrature = settings.quadrature
        for radius in usable:
            count: int = quadrature.initial_nodes
            while count < 2 * (hi - lo + 1):
                count *= 2
            previous: np.ndarray = laurent_coefficients(self, radius, count, lo, hi)
            magnitude: float = float(np.abs(self(CircleContour(radius).nodes(count))).max())
            scale: np.ndarray = magnitude * radius ** (-indices.astype(float))
            for _ in range(quadrature.max_doublings):
                count *= 2
                current: np.ndarray = laurent_coefficients(self, radius, count, lo, hi)
                floor: np.ndarray = np.maximum(quadrature.tolerance * np.abs(current), 100.0 * np.finfo(float).eps * scale)
                if np.all(np.abs(current - previous) <= floor):
                    break
                previous = current
            else:
                raise NonConvergence(f"FFT coefficients on r={radius:.4g} did not settle at {count} nodes")
            better: np.ndarray = scale < best_scale
            best = np.where(better, current.real, best)
            best_scale = np.where(better, scale, best_scale)
        return best


def step_symbol(a: float, u: int) -> BinomialSymbol:
    """Return ((1+az)/(1-a/z))^u, the u-fold two-step transition symbol."""
    return BinomialSymbol(a, u, -u)


@dataclass(slots=True, frozen=True)
class KernelContext:
    """Immutable parameter bundle for finite-size kernel evaluation, with a memo cache."""

    shape: ModelShape
    settings: KernelSettings = field(default_factory=KernelSettings)
    _cache: dict[Any, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.shape.n > self.settings.n_cap:
            raise InvalidShape(f"n={self.shape.n} exceeds the cap {self.settings.n_cap}")

    @property
    def a(self) -> float:
        """Return the weight a."""
        return self.shape.a

    @property
    def n(self) -> int:
        """Return the diamond order n."""
        return self.shape.n

    @property
    def m(self) -> int:
        """Return m."""
        return self.shape.m

    @property
    def radii(self) -> tuple[float, ...]:
        """Return the ladder r3 < r2 < s2 < s1 < r1 < s3 inside (a, 1/a)."""
        return tuple(self.a**exponent for exponent in LADDER_EXPONENTS)

    @property
    def fredholm_radius(self) -> float:
        """Return ρ = √a for the inner Fredholm circle."""
        return math.sqrt(self.a)

    @property
    def k_max(self) -> int:
        """Return the right end of the truncated ℓ²(2m+1, ...) window."""
        tail: int = math.ceil(math.log(self.settings.series_tolerance) / math.log(self.a))
        return max(self.n, 2 * self.m + 1) + tail

    def window_end(self, reach: float = 1.0) -> int:
        """Return the window end for operators whose columns grow like reach^ℓ.

        Entries then decay like ℓ^n (a·reach)^ℓ, so the tail also absorbs the polynomial factor.
        """
        if reach <= 1.0:
            return self.k_max
        ratio: float = self.a * reach
        if ratio >= 1.0:
            raise SeriesDivergence(f"window with reach {reach:g} diverges for a={self.a:g}")
        target: float = math.log(self.settings.series_tolerance)
        tail: int = math.ceil(target / math.log(ratio))
        while tail * math.log(ratio) + self.n * math.log(tail) > target:
            tail += 1
        return max(self.n, 2 * self.m + 1) + tail

    def memo(self, key: Any, build: Any) -> Any:
        """Return a cached value, building it on first use."""
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def coefficients(self, p: int, q: int, lo: int, hi: int) -> np.ndarray:
        """Return [z^j] of (1+az)^p (1-a/z)^q for j = lo..hi."""
        return BinomialSymbol(self.a, p, q).coefficients(lo, hi)

    def coefficient(self, p: int, q: int, j: int) -> float:
        """Return one Laurent coefficient of (1+az)^p (1-a/z)^q."""
        return BinomialSymbol(self.a, p, q).coefficient(j)


def build_context(a: float, n: int, m: int, settings: KernelSettings | None = None) -> KernelContext:
    """Construct a kernel context, validating the shape."""
    return KernelContext(shape=ModelShape(a=a, n=n, m=m), settings=settings or KernelSettings())


def psi(ctx: KernelContext, s: int, x: int, y: int, route: str = "series") -> float:
    """Return ψ_{2s}(x, y) = [z^{y-x}] ((1+az)/(1-a/z))^s."""
    symbol: BinomialSymbol = step_symbol(ctx.a, s)
    if route == "contour":
        return float(symbol.contour_coefficients(y - x, y - x, ctx.radii, ctx.settings)[0])
    return symbol.coefficient(y - x)


def psi_half_steps(ctx: KernelContext, k: int, x: int, j: int) -> tuple[float, float]:
    """Return (ψ_{0,k}(b_j, x), ψ_{k,2n+1}(x, e_j)) with b_j = e_j = -m+j-1 and k even."""
    if k % 2 or not 0 <= k <= 2 * ctx.n:
        raise InvalidShape(f"half-step index k={k} must be even in [0, {2 * ctx.n}]")
    anchor: int = -ctx.m + j - 1
    half: int = k // 2
    start: float = ctx.coefficient(half, -half, x - anchor)
    finish: float = ctx.coefficient(ctx.n - half, -(ctx.n - half + 1), anchor - x)
    return start, finish


def psi_full(ctx: KernelContext, u: int, v: int) -> float:
    """Return ψ_{0,2n+1}(u, v) = [z^{v-u}] ρ_a with ρ_a = (1+az)^n/(1-a/z)^{n+1}."""
    return ctx.coefficient(ctx.n, -(ctx.n + 1), v - u)


def varphi(ctx: KernelContext, z: np.ndarray | complex) -> np.ndarray:
    """Return φ_a(2n; z) = (1+az)^n (1-a/z)^{n+1}."""
    return BinomialSymbol(ctx.a, ctx.n, ctx.n + 1)(z)


def _sign(ell: int) -> float:
    return -1.0 if ell % 2 else 1.0


G_VARIANTS: tuple[str, ...] = ("g1", "g1_ext", "g1_tilde", "g2", "g2_ext", "g2_tilde")


def g_function(
    ctx: KernelContext,
    variant: str,
    ell: int,
    k: int | None = None,
    aux: int | None = None,
) -> float:
    """Return one of g1, g2 (order n), g1_ext(k; s), g2_ext(k; r), g1_tilde(k, j), g2_tilde(k, j)."""
    if variant not in G_VARIANTS:
        raise ValueError(f"Unknown g variant '{variant}'. Available: {', '.join(sorted(G_VARIANTS))}")
    a_sign: float = -_sign(ell)
    if variant == "g1":
        return a_sign * ctx.coefficient(ctx.n, ctx.n + 1, -ell - 1)
    if variant == "g2":
        return a_sign * ctx.coefficient(-ctx.n, -(ctx.n + 1), ell + 1)
    if k is None or aux is None:
        raise ValueError(f"g variant '{variant}' needs both k and the auxiliary index")
    if variant == "g1_ext":
        return a_sign * ctx.coefficient(k + aux, k + 1 - aux, -ell - 1)
    if variant == "g2_ext":
        return a_sign * ctx.coefficient(aux - k, -aux - k - 1, ell + 1)
    if variant == "g1_tilde":
        return a_sign * ctx.coefficient(k + aux, k - aux, -ell)
    if variant == "g2_tilde":
        return a_sign * ctx.coefficient(-k + aux, -k - aux, ell)
    raise AssertionError(variant)


@dataclass(slots=True, frozen=True)
class GTable:
    """g1_ℓ(n) and g2_ℓ(n) tabulated on lo <= ℓ <= hi."""

    lo: int
    g1: np.ndarray
    g2: np.ndarray

    def first(self, ell: int) -> float:
        """Return g1_ℓ, zero outside the table."""
        index: int = ell - self.lo
        return float(self.g1[index]) if 0 <= index < len(self.g1) else 0.0

    def second(self, ell: int) -> float:
        """Return g2_ℓ, zero outside the table."""
        index: int = ell - self.lo
        return float(self.g2[index]) if 0 <= index < len(self.g2) else 0.0

    def first_slice(self, start: int, stop: int) -> np.ndarray:
        """Return g1_ℓ for start <= ℓ < stop."""
        return np.array([self.first(ell) for ell in range(start, stop)])

    def second_slice(self, start: int, stop: int) -> np.ndarray:
        """Return g2_ℓ for start <= ℓ < stop."""
        return np.array([self.second(ell) for ell in range(start, stop)])


def g_table(ctx: KernelContext) -> GTable:
    """Return g1, g2 tabulated on [-(n+2), 3·k_max + n]."""

    def build() -> GTable:
        lo: int = -(ctx.n + 2)
        hi: int = 3 * ctx.k_max + ctx.n
        ells: np.ndarray = np.arange(lo, hi + 1)
        signs: np.ndarray = -np.where(ells % 2 == 0, 1.0, -1.0)
        first: np.ndarray = signs * ctx.coefficients(ctx.n, ctx.n + 1, -hi - 1, -lo - 1)[::-1]
        second: np.ndarray = signs * ctx.coefficients(-ctx.n, -(ctx.n + 1), lo + 1, hi + 1)
        return GTable(lo=lo, g1=first, g2=second)

    return ctx.memo("g_table", build)


def _inverse_varphi_coefficients(ctx: KernelContext, lo: int, hi: int) -> np.ndarray:
    return ctx.coefficients(-ctx.n, -(ctx.n + 1), lo, hi)


def _check_bar_domain(ctx: KernelContext, z: complex) -> None:
    if abs(z) * ctx.a >= 1.0:
        raise SeriesDivergence(f"|z|={abs(z):.4g} outside the geometric region |z| < 1/a")


def h1_series(ctx: KernelContext, k: int, zinv: complex) -> complex:
    """Return h1_k(z^{-1}) = z^{-1}·J1_k(z^{-1}) from its power series in z^{-1}; needs |z| > a."""
    if abs(zinv) * ctx.a >= 1.0:
        raise SeriesDivergence(f"|z^-1|={abs(zinv):.4g} outside the region |z| > a")
    if zinv == 0:
        return 0.0j
    return zinv * j1_series(ctx, k, zinv)


def j1_series(ctx: KernelContext, k: int, zinv: complex) -> complex:
    """Return J1_k(ζ) = (-1)^{k+1} Σ_j ζ^j [v^{k-j}](1/φ)."""
    depth: int = series_depth(ctx, abs(zinv) * ctx.a)
    coefficients: np.ndarray = _inverse_varphi_coefficients(ctx, k - depth, k)[::-1]
    powers: np.ndarray = np.power(complex(zinv), np.arange(depth + 1))
    return -_sign(k) * complex(np.dot(coefficients, powers))


def j2_series(ctx: KernelContext, ell: int, w: complex) -> complex:
    """Return J2_ℓ(w) = (-1)^{ℓ+1} Σ_{j>=0} w^j [u^{j-ℓ}]φ, a polynomial in w."""
    top: int = ell + ctx.n
    if top < 0:
        return 0.0j
    coefficients: np.ndarray = ctx.coefficients(ctx.n, ctx.n + 1, -ell, ctx.n)
    powers: np.ndarray = np.power(complex(w), np.arange(top + 1))
    return -_sign(ell) * complex(np.dot(coefficients, powers))


def series_depth(ctx: KernelContext, ratio: float) -> int:
    """Return how many terms a geometric series with this ratio needs to reach the series tolerance."""
    if ratio <= 0.0:
        return ctx.n + 2
    return int(math.ceil(math.log(ctx.settings.series_tolerance) / math.log(ratio))) + 2 * ctx.n + 16


def h_function(ctx: KernelContext, variant: str, k: int, arg: complex, route: str = "series") -> complex:
    """Return h1_k(z^{-1}), h2_k(w), h1_bar_k(z^{-1}) or h2_bar_k(w).

    For h1 and h1_bar the argument is z^{-1}; for h2 and h2_bar it is w.
    """
    if route not in {"series", "contour"}:
        raise ValueError(f"Unknown h route '{route}'. Available: contour, series")
    if variant == "h1":
        if route == "series":
            return h1_series(ctx, k, arg)
        return _h1_contour(ctx, k, arg, around_pole=False)
    if variant == "h1_bar":
        z: complex = 1.0 / arg
        _check_bar_domain(ctx, z)
        if route == "series":
            return h1_bar_series(ctx, k, z)
        return _h1_contour(ctx, k, arg, around_pole=True)
    if variant == "h2":
        if route == "series":
            return arg * j2_series(ctx, k, arg)
        return _h2_contour(ctx, k, arg)
    if variant == "h2_bar":
        if route == "series":
            return h2_bar_series(ctx, k, arg)
        return _h2_bar_contour(ctx, k, arg)
    raise ValueError(f"Unknown h variant '{variant}'. Available: h1, h1_bar, h2, h2_bar")


def h1_bar_series(ctx: KernelContext, k: int, z: complex | np.ndarray) -> complex | np.ndarray:
    """Return -Σ_α (-z)^α g2_{k+α}; z may be an array inside |z| < 1/a."""
    z_array: np.ndarray = np.asarray(z, dtype=complex)
    if z_array.size and float(np.abs(z_array).max()) * ctx.a >= 1.0:
        raise SeriesDivergence("h1_bar series needs |z| < 1/a")
    ratio: float = float(np.abs(z_array).max()) * ctx.a if z_array.size else 0.0
    depth: int = series_depth(ctx, ratio)
    table: GTable = g_table(ctx)
    coefficients: np.ndarray = table.second_slice(k, k + depth + 1)
    powers: np.ndarray = np.power((-z_array)[..., None], np.arange(depth + 1))
    value: np.ndarray = -(powers @ coefficients)
    return complex(value) if value.ndim == 0 else value


def h2_bar_series(ctx: KernelContext, ell: int, w: complex | np.ndarray) -> complex | np.ndarray:
    """Return -Σ_α (-w)^{-α} g1_{ℓ+α}, a finite sum."""
    w_array: np.ndarray = np.asarray(w, dtype=complex)
    depth: int = max(ctx.n - ell, -1)
    if depth < 0:
        value: np.ndarray = np.zeros(w_array.shape, dtype=complex)
    else:
        table: GTable = g_table(ctx)
        coefficients: np.ndarray = table.first_slice(ell, ell + depth + 1)
        powers: np.ndarray = np.power((-1.0 / w_array)[..., None], np.arange(depth + 1))
        value = -(powers @ coefficients)
    return complex(value) if value.ndim == 0 else value


def _h1_contour(ctx: KernelContext, k: int, zinv: complex, around_pole: bool) -> complex:
    a: float = ctx.a
    if around_pole:
        z: complex = 1.0 / zinv
        radius: float = math.sqrt(max(a, abs(z)) / a)
    else:
        outer: float = 1.0 / a if zinv == 0 else min(1.0 / abs(zinv), 1.0 / a)
        if outer <= a:
            raise SeriesDivergence("h1 contour needs |z| > a")
        radius = math.sqrt(a * outer)
    sign: float = _sign(k + 1)

    def integrand(v: np.ndarray) -> np.ndarray:
        return sign * v ** (-k - 1) / (varphi(ctx, v) * (1.0 - v * zinv)) / (2j * np.pi)

    return zinv * complex(integrate_circle(integrand, CircleContour(radius), ctx.settings.quadrature).value)


def _h2_contour(ctx: KernelContext, ell: int, w: complex) -> complex:
    radius: float = 1.0 if w == 0 else min(1.0, 0.5 / abs(w))
    sign: float = _sign(ell + 1)

    def integrand(v: np.ndarray) -> np.ndarray:
        return sign * varphi(ctx, 1.0 / v) * v ** (-ell - 1) / (1.0 - v * w) / (2j * np.pi)

    return w * complex(integrate_circle(integrand, CircleContour(radius), ctx.settings.quadrature).value)


def _h2_bar_contour(ctx: KernelContext, ell: int, w: complex) -> complex:
    radius: float = 0.5 * abs(w)
    sign: float = _sign(ell)

    def integrand(u: np.ndarray) -> np.ndarray:
        return -w / (u - w) * sign * u**ell * varphi(ctx, u) / (2j * np.pi)

    return complex(integrate_circle(integrand, CircleContour(radius), ctx.settings.quadrature).value)
