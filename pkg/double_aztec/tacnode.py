"""The tacnode kernel in its perturbed-Airy, symmetrized, double-integral and Brownian forms."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from double_aztec.airy import (
    CUBE_ROOT_TWO,
    AiryContext,
    airy_kernel_ab,
    airy_s,
    cal_a,
    cal_c,
    heat_p,
    p_hat,
    q_hat,
)
from double_aztec.contour import VerticalLineContour, integrate_vertical_cauchy
from double_aztec.errors import ImaginaryResidue, NoDecay
from double_aztec.interfaces import TacnodeForm
from double_aztec.types import TacnodePoint

logger = logging.getLogger(__name__)

TACNODE_FORMS = ("i", "ii", "iii", "brownian")


def heat_term(point: TacnodePoint) -> float:
    """Return -1_{τ₁>τ₂} p(τ₁-τ₂; ξ₁, ξ₂)."""
    if point.tau1 > point.tau2:
        return -heat_p(point.tau1 - point.tau2, point.xi1, point.xi2)
    return 0.0


def _s_values(ctx: AiryContext, tau: float, xi: float) -> np.ndarray:
    """Return S^τ_ξ(κ) = Ai^{(τ)}(ξ - σ + 2^{1/3}κ) on the Nyström nodes."""
    nodes, _ = ctx.grid()
    return airy_s(tau, xi - ctx.sigma + CUBE_ROOT_TWO * nodes)


def _a_values(ctx: AiryContext, tau: float, xi: float) -> np.ndarray:
    """Return 𝒜^τ_{ξ-σ} on the Nyström nodes."""
    nodes, _ = ctx.grid()
    return cal_a(ctx, tau, xi - ctx.sigma, nodes)


def resolvent_correction(ctx: AiryContext, point: TacnodePoint) -> float:
    """Return 2^{1/3}⟨(1-K_Ai)^{-1}𝒜^{τ₁}_{ξ₁-σ}, 𝒜^{-τ₂}_{ξ₂-σ}⟩ on L²(σ̃, ∞)."""
    resolved: np.ndarray = ctx.resolve(_a_values(ctx, point.tau1, point.xi1))
    return CUBE_ROOT_TWO * ctx.inner(resolved, _a_values(ctx, -point.tau2, point.xi2))


@dataclass(slots=True)
class PerturbedAiryForm:
    """Heat term plus deformed Airy kernel plus the resolvent correction."""

    ctx: AiryContext

    @property
    def name(self) -> str:
        return "i"

    def evaluate(self, point: TacnodePoint) -> float:
        base: float = airy_kernel_ab(
            point.tau1,
            point.tau2,
            self.ctx.sigma - point.xi1,
            self.ctx.sigma - point.xi2,
            config=self.ctx.config,
        )
        return heat_term(point) + base + resolvent_correction(self.ctx, point)


@dataclass(slots=True)
class SymmetrizedForm:
    """Resolvent pairing against plain deformed Airy functions, plus the ξ → -ξ mirror."""

    ctx: AiryContext

    @property
    def name(self) -> str:
        return "ii"

    def evaluate(self, point: TacnodePoint) -> float:
        total: float = 0.0
        for sign in (1.0, -1.0):
            resolved: np.ndarray = self.ctx.resolve(_a_values(self.ctx, point.tau1, sign * point.xi1))
            total += self.ctx.inner(resolved, _s_values(self.ctx, -point.tau2, sign * point.xi2))
        return heat_term(point) + CUBE_ROOT_TWO * total


@dataclass(slots=True)
class BrownianForm:
    """The kernel of two groups of non-colliding Brownian motions meeting at a tacnode."""

    ctx: AiryContext

    @property
    def name(self) -> str:
        return "brownian"

    def evaluate(self, point: TacnodePoint) -> float:
        ctx: AiryContext = self.ctx
        value: float = heat_term(point)
        for sign in (1.0, -1.0):
            value += airy_kernel_ab(
                point.tau1,
                point.tau2,
                ctx.sigma + sign * point.xi1,
                ctx.sigma + sign * point.xi2,
                config=ctx.config,
            )
            resolved: np.ndarray = ctx.resolve(_a_values(ctx, -point.tau2, sign * point.xi2))
            folded: np.ndarray = _a_values(ctx, point.tau1, sign * point.xi1) - _s_values(ctx, point.tau1, sign * point.xi1)
            value += CUBE_ROOT_TWO * ctx.inner(resolved, folded)
        return value


def _decay_half_width(rate: float, tail_exponent: float, where: str) -> float:
    if rate <= 0.0:
        raise NoDecay(f"integrand does not decay along {where}; increase the contour offset")
    return math.sqrt(tail_exponent / rate) + 1.0


Factors = Callable[[np.ndarray, np.ndarray], list[tuple[np.ndarray, np.ndarray]]]


@dataclass(slots=True)
class DoubleIntegralForm:
    """Heat term, the 𝒞 function and four vertical-line double integrals in 𝒫̂ and Q̂."""

    ctx: AiryContext

    @property
    def name(self) -> str:
        return "iii"

    def _u_factor(self, point: TacnodePoint, u: np.ndarray, cubic: float) -> np.ndarray:
        return np.exp(cubic * u**3 / 3.0 - self.ctx.sigma * u + point.tau1 * u**2)

    def _v_factor(self, point: TacnodePoint, v: np.ndarray, cubic: float) -> np.ndarray:
        return np.exp(-(cubic * v**3 / 3.0 - self.ctx.sigma * v) - point.tau2 * v**2)

    def _term(
        self,
        point: TacnodePoint,
        first: float,
        second: float,
        u_cubic: float,
        v_cubic: float,
        u_extra: Callable[[np.ndarray], np.ndarray],
        v_extra: Callable[[np.ndarray], np.ndarray],
    ) -> complex:
        tail: float = self.ctx.config.tail_exponent
        u_line = VerticalLineContour(first, _decay_half_width(abs(first) + point.tau1, tail, f"Re u = {first}"))
        v_line = VerticalLineContour(second, _decay_half_width(abs(second) - point.tau2, tail, f"Re v = {second}"))

        def factors(u: np.ndarray, v: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
            left: np.ndarray = self._u_factor(point, u, u_cubic) * u_extra(u)
            right: np.ndarray = self._v_factor(point, v, v_cubic) * v_extra(v)
            return [
                (left * np.exp(point.xi1 * u), right * np.exp(-point.xi2 * v)),
                (left * np.exp(-point.xi1 * u), right * np.exp(point.xi2 * v)),
            ]

        result = integrate_vertical_cauchy(
            factors,
            u_line,
            v_line,
            self.ctx.config.vertical_step,
            self.ctx.config.tolerance,
            self.ctx.config.max_halvings,
        )
        return result.value / (2j * math.pi) ** 2

    def double_integrals(self, point: TacnodePoint) -> list[complex]:
        """Return the four double integrals with their signs applied."""
        ctx: AiryContext = self.ctx
        delta: float = point.delta

        def one_minus_p(u: np.ndarray) -> np.ndarray:
            return 1.0 - p_hat(ctx, u)

        def one_minus_p_reflected(v: np.ndarray) -> np.ndarray:
            return 1.0 - p_hat(ctx, -v)

        def q_direct(u: np.ndarray) -> np.ndarray:
            return q_hat(ctx, u)

        def q_reflected(v: np.ndarray) -> np.ndarray:
            return q_hat(ctx, -v)

        return [
            self._term(point, delta, -delta, 1.0, 1.0, one_minus_p, one_minus_p_reflected),
            -self._term(point, 2.0 * delta, delta, 1.0, -1.0, one_minus_p, q_reflected),
            -self._term(point, -delta, -2.0 * delta, -1.0, 1.0, q_direct, one_minus_p_reflected),
            self._term(point, -delta, delta, -1.0, -1.0, q_direct, q_reflected),
        ]

    def evaluate(self, point: TacnodePoint) -> float:
        total: complex = sum(self.double_integrals(point), 0j)
        total += cal_c(self.ctx, point.tau1 - point.tau2, point.xi1 - point.xi2)
        if abs(total.imag) > max(self.ctx.config.tolerance, 1e-8) * (1.0 + abs(total.real)):
            raise ImaginaryResidue(f"form (iii) carries imaginary part {total.imag:.3g}")
        return heat_term(point) + total.real


@dataclass(slots=True)
class TacnodeFormRegistry:
    """Maps form names to factories building them over one Airy context."""

    _factories: dict[str, Callable[[AiryContext], TacnodeForm]] = field(default_factory=dict)

    def register(self, name: str, factory: Callable[[AiryContext], TacnodeForm]) -> None:
        """Register or replace a form factory."""
        self._factories[name] = factory

    def create(self, name: str, ctx: AiryContext) -> TacnodeForm:
        """Build one form by name."""
        factory = self._factories.get(name)
        if factory is None:
            available: str = ", ".join(sorted(self._factories))
            raise ValueError(f"Unknown tacnode form '{name}'. Available: {available}")
        return factory(ctx)

    def create_many(self, names: Iterable[str], ctx: AiryContext) -> list[TacnodeForm]:
        """Build several forms, expanding 'all' to every registered name."""
        selected: list[str] = list(names)
        if selected == ["all"]:
            selected = self.names()
        return [self.create(name, ctx) for name in selected]

    def names(self) -> list[str]:
        """Return registered names in registration order."""
        return list(self._factories)


def build_default_form_registry() -> TacnodeFormRegistry:
    """Create the registry with the four equivalent forms."""
    registry = TacnodeFormRegistry()
    registry.register("i", PerturbedAiryForm)
    registry.register("ii", SymmetrizedForm)
    registry.register("iii", DoubleIntegralForm)
    registry.register("brownian", BrownianForm)
    return registry


def tacnode(form: str, point: TacnodePoint, ctx: AiryContext) -> float:
    """Return K^tac(τ₁, ξ₁; τ₂, ξ₂) in the named form."""
    return build_default_form_registry().create(form, ctx).evaluate(point)


def tacnode_grid(ctx: AiryContext, forms: Sequence[TacnodeForm], points: Sequence[TacnodePoint]) -> list[dict[str, float]]:
    """Evaluate every form on every point; err_est is the largest pairwise spread."""
    rows: list[dict[str, float]] = []
    for point in points:
        values: dict[str, float] = {form.name: form.evaluate(point) for form in forms}
        spread: float = max(values.values()) - min(values.values()) if values else 0.0
        rows.append(
            {
                "tau1": point.tau1,
                "xi1": point.xi1,
                "tau2": point.tau2,
                "xi2": point.xi2,
                **{f"form_{name}": value for name, value in values.items()},
                "err_est": spread,
            }
        )
        logger.debug("Tacnode point %s: spread %.3g", point, spread)
    return rows
