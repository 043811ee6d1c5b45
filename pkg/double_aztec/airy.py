"""Airy function, deformed Airy kernels and the Airy-resolvent quantities on [σ̃, ∞)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import scipy.linalg
import scipy.special

from double_aztec.config import AiryConfig, QuadratureConfig
from double_aztec.contour import RayContour, gauss_legendre, integrate_rays
from double_aztec.errors import IllConditioned, OutOfRange, TruncationUnstable

logger = logging.getLogger(__name__)

CUBE_ROOT_TWO = 2.0 ** (1.0 / 3.0)
AIRY_ROUTES = ("library", "contour", "series")
AIRY_ZERO = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
AIRY_PRIME_ZERO = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)
DIAGONAL_GAP = 1e-9
MAX_CONDITION = 1e12

Real = float | np.ndarray


def airy_series(x: Real, derivative: bool = False, tolerance: float = 1e-17, max_terms: int = 400) -> Real:
    """Return Ai(x) (or Ai'(x)) from the Maclaurin series; reliable for |x| <= 2."""
    values = np.asarray(x, dtype=float)
    cube: np.ndarray = values**3
    if derivative:
        first = 0.5 * values**2
        second = np.ones_like(values)
        first_sum, second_sum = first.copy(), second.copy()
        for k in range(1, max_terms):
            if k >= 2:
                first = first * cube / ((3 * k - 3) * (3 * k - 1))
                first_sum += first
            second = second * cube / (3 * k * (3 * k - 2))
            second_sum += second
            if np.all(np.abs(first) + np.abs(second) <= tolerance * (1.0 + np.abs(first_sum) + np.abs(second_sum))):
                break
        result = AIRY_ZERO * first_sum + AIRY_PRIME_ZERO * second_sum
    else:
        first = np.ones_like(values)
        second = values.copy()
        first_sum, second_sum = first.copy(), second.copy()
        for k in range(1, max_terms):
            first = first * cube / ((3 * k - 1) * (3 * k))
            second = second * cube / ((3 * k) * (3 * k + 1))
            first_sum += first
            second_sum += second
            if np.all(np.abs(first) + np.abs(second) <= tolerance * (1.0 + np.abs(first_sum) + np.abs(second_sum))):
                break
        result = AIRY_ZERO * first_sum + AIRY_PRIME_ZERO * second_sum
    return float(result) if result.ndim == 0 else result


def _airy_contour(x: float, s: float, derivative: bool, config: QuadratureConfig) -> float:
    """Return (1/2πi)∫ e^{V³/3 + sV² - xV} dV (times -V for the derivative) over rays at ±π/3."""

    def integrand(v: np.ndarray) -> np.ndarray:
        weight: np.ndarray | float = -v if derivative else 1.0
        return weight * np.exp(v**3 / 3.0 + s * v**2 - x * v)

    result = integrate_rays(integrand, RayContour(vertex=-1.0 + 0j), config)
    return float((result.value / (2j * math.pi)).real)


def airy(x: Real, route: str = "library", config: QuadratureConfig | None = None) -> Real:
    """Return Ai(x) by the scipy routine, the ray-contour integral or the Maclaurin series.

    The scipy routine is the default; the ray-contour route evaluates the defining
    integral directly and serves as its cross-check.
    """
    if route == "library":
        value = scipy.special.airy(x)[0]
        return float(value) if np.ndim(value) == 0 else value
    if route == "contour":
        quadrature: QuadratureConfig = config or QuadratureConfig()
        values = np.vectorize(lambda point: _airy_contour(float(point), 0.0, False, quadrature))(x)
        return float(values) if np.ndim(values) == 0 else values
    if route == "series":
        return airy_series(x)
    raise ValueError(f"Unknown Airy route '{route}'. Available: {', '.join(AIRY_ROUTES)}")


def airy_deriv(x: Real, route: str = "library", config: QuadratureConfig | None = None) -> Real:
    """Return Ai'(x) on the same routes as airy."""
    if route == "library":
        value = scipy.special.airy(x)[1]
        return float(value) if np.ndim(value) == 0 else value
    if route == "contour":
        quadrature: QuadratureConfig = config or QuadratureConfig()
        values = np.vectorize(lambda point: _airy_contour(float(point), 0.0, True, quadrature))(x)
        return float(values) if np.ndim(values) == 0 else values
    if route == "series":
        return airy_series(x, derivative=True)
    raise ValueError(f"Unknown Airy route '{route}'. Available: {', '.join(AIRY_ROUTES)}")


def airy_s(s: float, x: Real, route: str = "closed", config: QuadratureConfig | None = None) -> Real:
    """Return Ai^{(s)}(x) = e^{sx + 2s³/3} Ai(x + s²), or the deformed contour integral."""
    if route == "closed":
        values = np.asarray(x, dtype=float)
        result = np.exp(s * values + 2.0 * s**3 / 3.0) * scipy.special.airy(values + s * s)[0]
        return float(result) if result.ndim == 0 else result
    if route == "contour":
        quadrature: QuadratureConfig = config or QuadratureConfig()
        values = np.vectorize(lambda point: _airy_contour(float(point), s, False, quadrature))(x)
        return float(values) if np.ndim(values) == 0 else values
    raise ValueError(f"Unknown deformed Airy route '{route}'. Available: closed, contour")


def airy_kernel(x: Real, y: Real) -> Real:
    """Return K_Ai(x, y) = (Ai(x)Ai'(y) - Ai'(x)Ai(y))/(x - y), with its diagonal limit."""
    xs, ys = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    ai_x, aip_x, _, _ = scipy.special.airy(xs)
    ai_y, aip_y, _, _ = scipy.special.airy(ys)
    gap: np.ndarray = xs - ys
    near: np.ndarray = np.abs(gap) < DIAGONAL_GAP
    safe: np.ndarray = np.where(near, 1.0, gap)
    off: np.ndarray = (ai_x * aip_y - aip_x * ai_y) / safe
    diagonal: np.ndarray = aip_x**2 - xs * ai_x**2
    result: np.ndarray = np.where(near, diagonal, off)
    return float(result) if result.ndim == 0 else result


def _half_line(length: float, nodes: int, *starts: float) -> tuple[np.ndarray, np.ndarray]:
    """Return nodes on [0, U] with U long enough for every Ai(start + u) to decay."""
    reach: float = length + max([0.0, *(-start for start in starts)])
    return gauss_legendre(nodes, 0.0, reach)


def airy_kernel_ab(
    alpha: float,
    beta: float,
    x: float,
    y: float,
    route: str = "exponential",
    config: AiryConfig | None = None,
) -> float:
    """Return K_Ai^{(α,-β)}(x, y) = ∫₀^∞ Ai^{(α)}(x+u) Ai^{(-β)}(y+u) du."""
    settings: AiryConfig = config or AiryConfig()
    u, weights = _half_line(settings.length, settings.fine_nodes, x + alpha**2, y + beta**2)
    if route == "direct":
        return float(np.sum(weights * airy_s(alpha, x + u) * airy_s(-beta, y + u)))
    if route == "exponential":
        prefactor: float = math.exp(alpha * x + 2.0 * alpha**3 / 3.0 - beta * y - 2.0 * beta**3 / 3.0)
        integrand = np.exp(-(beta - alpha) * u) * airy(x + alpha**2 + u) * airy(y + beta**2 + u)
        return prefactor * float(np.sum(weights * integrand))
    raise ValueError(f"Unknown deformed kernel route '{route}'. Available: direct, exponential")


def heat_p(tau: float, xi1: float, xi2: float) -> float:
    """Return the heat kernel p(τ; ξ₁, ξ₂) = e^{-(ξ₁-ξ₂)²/4τ}/√(4πτ)."""
    if tau <= 0.0:
        raise OutOfRange(f"heat kernel needs positive time, got {tau}")
    return math.exp(-((xi1 - xi2) ** 2) / (4.0 * tau)) / math.sqrt(4.0 * math.pi * tau)


def airy_process_kernel(
    tau1: float,
    xi1: float,
    tau2: float,
    xi2: float,
    sigma: float,
    config: AiryConfig | None = None,
) -> float:
    """Return the extended Airy-process kernel with its σ-dependent heat term."""
    settings: AiryConfig = config or AiryConfig()
    lam, weights = _half_line(settings.length, settings.fine_nodes, xi1, xi2)
    value: float = float(np.sum(weights * np.exp(lam * (tau2 - tau1)) * airy(xi1 + lam) * airy(xi2 + lam)))
    if tau2 > tau1:
        gap: float = tau2 - tau1
        exponent: float = (
            -((xi1 - xi2) ** 2) / (4.0 * gap)
            + tau1 * (xi1 + sigma)
            - tau2 * (xi2 + sigma)
            + 2.0 * (tau1**3 - tau2**3) / 3.0
        )
        value -= math.exp(exponent) / math.sqrt(4.0 * math.pi * gap)
    return value


def conjugation_weight(sigma: float, tau: float, xi: float) -> float:
    """Return q_σ(τ, ξ) = e^{τ(σ-ξ) + 2τ³/3}."""
    return math.exp(tau * (sigma - xi) + 2.0 * tau**3 / 3.0)


def airy_process_identity(
    tau1: float,
    xi1: float,
    tau2: float,
    xi2: float,
    sigma: float,
    config: AiryConfig | None = None,
) -> tuple[float, float]:
    """Return both sides of the conjugation between the deformed Airy kernel and the Airy process.

    The left side is -1_{τ₁>τ₂} p + K_Ai^{(τ₁,-τ₂)}(σ-ξ₁, σ-ξ₂); the right side is the
    q_σ-conjugated Airy-process kernel at the transposed shifted arguments. The two
    integral parts coincide identically; any difference comes from the heat terms.
    """
    settings: AiryConfig = config or AiryConfig()
    lhs: float = airy_kernel_ab(tau1, tau2, sigma - xi1, sigma - xi2, config=settings)
    if tau1 > tau2:
        lhs -= heat_p(tau1 - tau2, xi1, xi2)
    ratio: float = conjugation_weight(sigma, tau1, xi1) / conjugation_weight(sigma, tau2, xi2)
    rhs: float = ratio * airy_process_kernel(
        tau2, sigma - xi2 + tau2**2, tau1, sigma - xi1 + tau1**2, sigma, config=settings
    )
    return lhs, rhs


@dataclass(slots=True, frozen=True)
class AiryContext:
    """Discretized L²(σ̃, σ̃+L) with the Airy-kernel resolvent cached on first use."""

    sigma: float
    config: AiryConfig = field(default_factory=AiryConfig)
    _cache: dict[Any, Any] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.sigma):
            raise OutOfRange(f"pressure parameter must be finite, got {self.sigma}")

    @property
    def sigma_tilde(self) -> float:
        """Return σ̃ = 2^{2/3}σ."""
        return CUBE_ROOT_TWO**2 * self.sigma

    def memo(self, key: Any, build: Any) -> Any:
        """Return a cached value, building it on first use."""
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the Nyström nodes and weights on [σ̃, σ̃+L]."""
        return self.memo(
            "grid", lambda: gauss_legendre(self.config.nodes, self.sigma_tilde, self.sigma_tilde + self.config.length)
        )

    def fine_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the refined nodes on [σ̃, σ̃+L] used for oscillatory transforms."""
        return self.memo(
            "fine_grid",
            lambda: gauss_legendre(self.config.fine_nodes, self.sigma_tilde, self.sigma_tilde + self.config.length),
        )

    def shift_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return nodes on [0, L] for the inner half-line integrals."""
        return self.memo("shift_grid", lambda: gauss_legendre(self.config.fine_nodes, 0.0, self.config.length))

    def kernel_matrix(self) -> np.ndarray:
        """Return K_Ai on the Nyström nodes."""
        nodes, _ = self.grid()
        return self.memo("kernel", lambda: airy_kernel(nodes[:, None], nodes[None, :]))

    def operator_norm(self) -> float:
        """Return the spectral norm of the symmetrized discrete χK_Aiχ."""

        def build() -> float:
            _, weights = self.grid()
            root: np.ndarray = np.sqrt(weights)
            symmetric: np.ndarray = root[:, None] * self.kernel_matrix() * root[None, :]
            return float(np.max(np.abs(scipy.linalg.eigvalsh(symmetric))))

        return self.memo("norm", build)

    def _factor(self) -> tuple[np.ndarray, np.ndarray]:
        def build() -> tuple[np.ndarray, np.ndarray]:
            norm: float = self.operator_norm()
            if norm >= 1.0:
                raise IllConditioned(f"discrete Airy kernel on [{self.sigma_tilde:.3g}, ∞) has norm {norm:.3g} >= 1", norm)
            _, weights = self.grid()
            system: np.ndarray = np.eye(weights.size) - self.kernel_matrix() * weights[None, :]
            condition: float = float(np.linalg.cond(system))
            if condition > MAX_CONDITION:
                raise IllConditioned(f"Airy resolvent system has condition {condition:.3g}", condition)
            return scipy.linalg.lu_factor(system)

        return self.memo("lu", build)

    def resolve(self, values: np.ndarray) -> np.ndarray:
        """Return (1 - χK_Aiχ)^{-1} applied to node values."""
        return scipy.linalg.lu_solve(self._factor(), np.asarray(values, dtype=float))

    def inner(self, first: np.ndarray, second: np.ndarray) -> float:
        """Return ∫_{σ̃} f g on the Nyström nodes."""
        _, weights = self.grid()
        return float(np.sum(weights * first * second))


def resolvent_q(ctx: AiryContext) -> np.ndarray:
    """Return 𝒬 = (1 - χK_Aiχ)^{-1} χAi on the Nyström nodes."""
    nodes, _ = ctx.grid()
    return ctx.memo("q", lambda: ctx.resolve(airy(nodes)))


def q_function(ctx: AiryContext, kappa: Real) -> Real:
    """Return 𝒬(κ) anywhere on [σ̃, ∞) by Nyström interpolation."""
    nodes, weights = ctx.grid()
    points = np.asarray(kappa, dtype=float)
    if np.any(points < ctx.sigma_tilde - 1e-12):
        raise OutOfRange(f"𝒬 is defined on [{ctx.sigma_tilde:.4g}, ∞)")
    result = airy(points) + airy_kernel(points[..., None], nodes) @ (weights * resolvent_q(ctx))
    return float(result) if np.ndim(result) == 0 else result


def _q_fine(ctx: AiryContext) -> np.ndarray:
    nodes, _ = ctx.fine_grid()
    return ctx.memo("q_fine", lambda: q_function(ctx, nodes))


def q_hat(ctx: AiryContext, zeta: complex | np.ndarray) -> complex | np.ndarray:
    """Return Q̂(ζ) = ∫ 𝒬(κ) e^{2^{1/3}κζ} dκ."""
    nodes, weights = ctx.fine_grid()
    points = np.asarray(zeta, dtype=complex)
    result = np.exp(CUBE_ROOT_TWO * points[..., None] * nodes) @ (weights * _q_fine(ctx))
    return complex(result) if result.ndim == 0 else result


def _p_moments(ctx: AiryContext) -> np.ndarray:
    """Return ∫ 𝒬(κ) Ai(κ+β) dκ on the shift nodes β."""

    def build() -> np.ndarray:
        nodes, weights = ctx.fine_grid()
        shifts, _ = ctx.shift_grid()
        return airy(shifts[:, None] + nodes[None, :]) @ (weights * _q_fine(ctx))

    return ctx.memo("p_moments", build)


def p_hat(ctx: AiryContext, zeta: complex | np.ndarray) -> complex | np.ndarray:
    """Return 𝒫̂(ζ) = -∫ 𝒬(κ) dκ ∫₀^∞ e^{-2^{1/3}ζβ} Ai(κ+β) dβ."""
    shifts, weights = ctx.shift_grid()
    points = np.asarray(zeta, dtype=complex)
    result = -(np.exp(-CUBE_ROOT_TWO * points[..., None] * shifts) @ (weights * _p_moments(ctx)))
    return complex(result) if result.ndim == 0 else result


def p_hat_double_quadrature(ctx: AiryContext, zeta: complex) -> complex:
    """Return 𝒫̂(ζ) with the κ-integral on the Nyström nodes instead of the refined ones."""
    nodes, weights = ctx.grid()
    shifts, shift_weights = ctx.shift_grid()
    table: np.ndarray = airy(nodes[:, None] + shifts[None, :])
    inner: np.ndarray = table @ (shift_weights * np.exp(-CUBE_ROOT_TWO * zeta * shifts))
    return complex(-np.sum(weights * resolvent_q(ctx) * inner))


def cal_a(ctx: AiryContext, tau: float, xi: float, kappa: Real) -> Real:
    """Return 𝒜^τ_ξ(κ) = Ai^{(τ)}(ξ + 2^{1/3}κ) - ∫₀^∞ Ai^{(τ)}(-ξ + 2^{1/3}β) Ai(κ+β) dβ."""
    shifts, weights = ctx.shift_grid()
    points = np.asarray(kappa, dtype=float)
    reflected: np.ndarray = airy_s(tau, -xi + CUBE_ROOT_TWO * shifts)
    tail = airy(points[..., None] + shifts) @ (weights * reflected)
    result = airy_s(tau, xi + CUBE_ROOT_TWO * points) - tail
    return float(result) if np.ndim(result) == 0 else result


def cal_c(ctx: AiryContext, s: float, xi: float) -> float:
    """Return 𝒞(s, ξ), the resolvent-weighted deformed Airy pairing plus its ξ → -ξ mirror."""
    nodes, weights = ctx.grid()
    shifts, shift_weights = ctx.shift_grid()
    q: np.ndarray = resolvent_q(ctx)
    time: float = CUBE_ROOT_TWO ** (-2) * s
    coupling: np.ndarray = ctx.memo("c_coupling", lambda: (weights * q) @ airy(nodes[:, None] + shifts[None, :]))

    def one_side(space: float) -> float:
        direct: np.ndarray = airy_s(time, nodes + space)
        deformed: np.ndarray = airy_s(time, shifts[:, None] + nodes[None, :] + space)
        folded: np.ndarray = (coupling * shift_weights) @ deformed
        return float(np.sum(weights * q * (direct + folded)))

    offset: float = xi / CUBE_ROOT_TWO
    return (one_side(offset) + one_side(-offset)) / CUBE_ROOT_TWO


def neumann_residual(ctx: AiryContext) -> float:
    """Return max |𝒬 - Ai - χK_Aiχ𝒬| evaluated off the Nyström nodes."""
    nodes, weights = ctx.fine_grid()
    q: np.ndarray = _q_fine(ctx)
    applied: np.ndarray = airy_kernel(nodes[:, None], nodes[None, :]) @ (weights * q)
    return float(np.max(np.abs(q - airy(nodes) - applied)))


def t_squared_residual(ctx: AiryContext) -> float:
    """Return max |T² - K_Ai| on the Nyström nodes, with T(κ,β) = Ai(κ+β-σ̃)."""
    nodes, _ = ctx.grid()
    inner, inner_weights = ctx.fine_grid()
    shifted: np.ndarray = airy(nodes[:, None] + inner[None, :] - ctx.sigma_tilde)
    squared: np.ndarray = (shifted * inner_weights) @ shifted.T
    return float(np.max(np.abs(squared - ctx.kernel_matrix())))


def truncation_drift(ctx: AiryContext) -> float:
    """Return the change in 𝒬 at the Nyström nodes when both L and the node count double."""
    doubled = AiryContext(
        ctx.sigma,
        replace(ctx.config, length=2.0 * ctx.config.length, nodes=2 * ctx.config.nodes),
    )
    nodes, _ = ctx.grid()
    drift: float = float(np.max(np.abs(q_function(doubled, nodes) - resolvent_q(ctx))))
    logger.debug("Airy resolvent drift under L doubling: %.3g", drift)
    return drift


def check_truncation(ctx: AiryContext, tolerance: float | None = None) -> float:
    """Raise TruncationUnstable unless doubling L leaves 𝒬 unchanged."""
    limit: float = tolerance if tolerance is not None else 100.0 * ctx.config.tolerance
    drift: float = truncation_drift(ctx)
    if drift > limit:
        raise TruncationUnstable(f"𝒬 moved by {drift:.3g} when L doubled (limit {limit:.1g})")
    return drift
