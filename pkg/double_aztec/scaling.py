"""Tacnode scaling: constants, the integer scaling map, rescaled finite kernels and convergence tables."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field


from double_aztec.airy import CUBE_ROOT_TWO, AiryContext, airy
from double_aztec.config import AiryConfig, KernelSettings
from double_aztec.errors import InvalidShape, OutOfRange
from double_aztec.extended import build_default_representation_registry
from double_aztec.symbols import KernelContext, build_context, g_function
from double_aztec.tacnode import build_default_form_registry
from double_aztec.types import ModelShape, TacnodePoint

logger = logging.getLogger(__name__)

DEFAULT_T_VALUES = (16, 24, 32)


@dataclass(slots=True, frozen=True)
class ScalingConstants:
    """The saddle v₀ and the scales A, ρ, θ attached to the weight a."""

    a: float
    v0: float
    big_a: float
    rho: float
    theta: float

    def identity_residuals(self) -> dict[str, float]:
        """Return the residuals of the four cross-identities between the constants."""
        a: float = self.a
        inverse: float = a + 1.0 / a
        return {
            "rho": abs(self.rho - (1.0 - a * a) ** (2.0 / 3.0) / inverse ** (1.0 / 3.0)),
            "theta_rho": abs(self.theta - math.sqrt(self.rho * inverse)),
            "theta_cube": abs(self.theta**3 - (1.0 - a**4) / a),
            "a_square": abs(self.big_a**2 - self.theta * a * (1.0 + a) ** 3 / ((1.0 - a) * (1.0 + a * a))),
        }

    @property
    def saddle_value(self) -> float:
        """Return F(v₀) = log(1+av₀) + log(1-a/v₀) + 2 log(-v₀)/(a+a⁻¹)."""
        a, v0 = self.a, self.v0
        return math.log1p(a * v0) + math.log(1.0 - a / v0) + 2.0 * math.log(-v0) / (a + 1.0 / a)


def constants(a: float) -> ScalingConstants:
    """Return the scaling constants for 0 < a < 1."""
    if not 0.0 < a < 1.0:
        raise InvalidShape(f"a must lie in (0, 1), got {a}")
    v0: float = -(1.0 - a) / (1.0 + a)
    big_a: float = (a * (1.0 + a) ** 5 / ((1.0 - a) * (1.0 + a * a))) ** (1.0 / 3.0)
    rho: float = -big_a * v0
    theta: float = ((1.0 - a**4) / a) ** (1.0 / 3.0)
    return ScalingConstants(a=a, v0=v0, big_a=big_a, rho=rho, theta=theta)


def m_exponent(consts: ScalingConstants, tau: float, lam: float, t: float) -> float:
    """Return M^τ_λ(t) = 2tF(v₀) + ((1-a²)θτ(2t)^{2/3} + ρλ(2t)^{1/3}) log(-v₀)."""
    scale: float = 2.0 * t
    shift: float = (1.0 - consts.a**2) * consts.theta * tau * scale ** (2.0 / 3.0) + consts.rho * lam * scale ** (1.0 / 3.0)
    return scale * consts.saddle_value + shift * math.log(-consts.v0)


def m_identity_residual(
    consts: ScalingConstants, tau: float, xi: float, sigma: float, beta: float, kappa: float, t: float
) -> float:
    """Return |M^τ_{σ-ξ+2^{1/3}β}(t/2) + M^{-τ}_{-σ+ξ+2^{1/3}κ}(t/2) - M_{κ+β}(t)|."""
    left: float = m_exponent(consts, tau, sigma - xi + CUBE_ROOT_TWO * beta, t / 2.0)
    right: float = m_exponent(consts, -tau, -sigma + xi + CUBE_ROOT_TWO * kappa, t / 2.0)
    return abs(left + right - m_exponent(consts, 0.0, kappa + beta, t))


@dataclass(slots=True, frozen=True)
class ScalingPoint:
    """Rounded finite-size coordinates of a tacnode point, with rounding residuals."""

    a: float
    t: int
    sigma: float
    tau1: float
    xi1: float
    tau2: float
    xi2: float
    n: int
    m: int
    r: int
    x: int
    s: int
    y: int
    residuals: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def shape(self) -> ModelShape:
        return ModelShape(a=self.a, n=self.n, m=self.m)


def _continuous_coordinates(
    consts: ScalingConstants, t: int, sigma: float, tau1: float, xi1: float, tau2: float, xi2: float
) -> dict[str, float]:
    a: float = consts.a
    third: float = t ** (1.0 / 3.0)
    two_thirds: float = t ** (2.0 / 3.0)
    return {
        "m": 2.0 * t / (a + 1.0 / a) + sigma * consts.rho * third,
        "r": t + (1.0 + a * a) * consts.theta * tau1 * two_thirds,
        "s": t + (1.0 + a * a) * consts.theta * tau2 * two_thirds,
        "x": 2.0 * a * a * consts.theta * tau1 * two_thirds + xi1 * consts.rho * third,
        "y": 2.0 * a * a * consts.theta * tau2 * two_thirds + xi2 * consts.rho * third,
    }


def scale_map(a: float, t: int, sigma: float, tau1: float, xi1: float, tau2: float, xi2: float) -> ScalingPoint:
    """Round the tacnode scaling to integers; n = 2t exactly and the shape must overlap."""
    if t < 1:
        raise OutOfRange(f"t must be a positive integer, got {t}")
    consts: ScalingConstants = constants(a)
    exact: dict[str, float] = _continuous_coordinates(consts, t, sigma, tau1, xi1, tau2, xi2)
    rounded: dict[str, int] = {key: int(round(value)) for key, value in exact.items()}
    shape = ModelShape(a=a, n=2 * t, m=rounded["m"])
    shape.require_overlap()
    residuals: dict[str, float] = {key: rounded[key] - value for key, value in exact.items()}
    logger.debug("Scaling residuals at t=%d: %s", t, residuals)
    return ScalingPoint(
        a=a,
        t=t,
        sigma=sigma,
        tau1=tau1,
        xi1=xi1,
        tau2=tau2,
        xi2=xi2,
        n=2 * t,
        m=rounded["m"],
        r=rounded["r"],
        x=rounded["x"],
        s=rounded["s"],
        y=rounded["y"],
        residuals=residuals,
    )


def effective_parameters(consts: ScalingConstants, point: ScalingPoint) -> tuple[float, TacnodePoint]:
    """Invert the scaling at the rounded integers: return (σ, tacnode point) they represent exactly."""
    a: float = consts.a
    t: int = point.t
    third: float = t ** (1.0 / 3.0)
    two_thirds: float = t ** (2.0 / 3.0)
    sigma: float = (point.m - 2.0 * t / (a + 1.0 / a)) / (consts.rho * third)
    tau1: float = (point.r - t) / ((1.0 + a * a) * consts.theta * two_thirds)
    tau2: float = (point.s - t) / ((1.0 + a * a) * consts.theta * two_thirds)
    xi1: float = (point.x - 2.0 * a * a * consts.theta * tau1 * two_thirds) / (consts.rho * third)
    xi2: float = (point.y - 2.0 * a * a * consts.theta * tau2 * two_thirds) / (consts.rho * third)
    return sigma, TacnodePoint(tau1, xi1, tau2, xi2)


def rescaled_kernel(point: ScalingPoint, ctx: KernelContext, representation: str = "k1") -> float:
    """Return (-v₀)^{y-x+r-s} (-1)^{y-x} K̃(2r, x; 2s, y) ρ t^{1/3}."""
    consts: ScalingConstants = constants(ctx.a)
    kernel = build_default_representation_registry().create(representation, ctx)
    value: float = kernel.evaluate(point.r, point.x, point.s, point.y)
    exponent: int = point.y - point.x + point.r - point.s
    sign: float = -1.0 if (point.y - point.x) % 2 else 1.0
    return (-consts.v0) ** exponent * sign * value * consts.rho * point.t ** (1.0 / 3.0)


@dataclass(slots=True)
class ConvergenceStudy:
    """Compares rescaled finite kernels with the tacnode kernel over a range of t."""

    a: float
    sigma: float
    representation: str = "k1"
    form: str = "i"
    effective: bool = True
    settings: KernelSettings = field(default_factory=KernelSettings)
    airy_config: AiryConfig = field(default_factory=AiryConfig)
    logger: logging.Logger = logging.getLogger(__name__)
    _airy: dict[float, AiryContext] = field(default_factory=dict, repr=False)

    def _airy_context(self, sigma: float) -> AiryContext:
        key: float = round(sigma, 12)
        if key not in self._airy:
            self._airy[key] = AiryContext(sigma, self.airy_config)
        return self._airy[key]

    def cell(self, t: int, tau1: float, xi1: float, tau2: float, xi2: float) -> dict[str, float]:
        """Return one table row for a (point, t) pair."""
        point: ScalingPoint = scale_map(self.a, t, self.sigma, tau1, xi1, tau2, xi2)
        ctx: KernelContext = build_context(self.a, point.n, point.m, self.settings)
        finite: float = rescaled_kernel(point, ctx, self.representation)
        if self.effective:
            sigma, target_point = effective_parameters(constants(self.a), point)
        else:
            sigma, target_point = self.sigma, TacnodePoint(tau1, xi1, tau2, xi2)
        target: float = build_default_form_registry().create(self.form, self._airy_context(sigma)).evaluate(target_point)
        row: dict[str, float] = {
            "t": t,
            "tau1": tau1,
            "xi1": xi1,
            "tau2": tau2,
            "xi2": xi2,
            "finite_value": finite,
            "tacnode_value": target,
            "abs_error": abs(finite - target),
        }
        row.update({f"residual_{key}": value for key, value in point.residuals.items()})
        return row

    def table(self, points: Iterable[tuple[float, float, float, float]], t_values: Sequence[int] = DEFAULT_T_VALUES) -> list[dict[str, float]]:
        """Return rows for every point and t; shapes without overlap are skipped."""
        rows: list[dict[str, float]] = []
        for tau1, xi1, tau2, xi2 in points:
            for t in t_values:
                try:
                    rows.append(self.cell(t, tau1, xi1, tau2, xi2))
                except InvalidShape as error:
                    self.logger.warning("Skipping t=%d at (%g, %g, %g, %g): %s", t, tau1, xi1, tau2, xi2, error)
        return rows


def convergence_table(
    a: float,
    sigma: float,
    points: Iterable[tuple[float, float, float, float]],
    t_values: Sequence[int] = DEFAULT_T_VALUES,
    representation: str = "k1",
    settings: KernelSettings | None = None,
    airy_config: AiryConfig | None = None,
) -> list[dict[str, float]]:
    """Return |rescaled finite kernel - tacnode form (i)| per point and t."""
    study = ConvergenceStudy(
        a=a,
        sigma=sigma,
        representation=representation,
        settings=settings or KernelSettings(),
        airy_config=airy_config or AiryConfig(),
    )
    return study.table(points, t_values)


def trend_fraction(rows: Sequence[dict[str, float]]) -> float:
    """Return the share of points whose error at the largest t is below the error at the smallest t."""
    by_point: dict[tuple[float, ...], list[tuple[float, float]]] = {}
    for row in rows:
        key = (row["tau1"], row["xi1"], row["tau2"], row["xi2"])
        by_point.setdefault(key, []).append((row["t"], row["abs_error"]))
    compared: int = 0
    improved: int = 0
    for series in by_point.values():
        if len(series) < 2:
            continue
        series.sort()
        compared += 1
        improved += series[-1][1] < series[0][1]
    return improved / compared if compared else 0.0


def scaling_index(consts: ScalingConstants, lam: float, t: int) -> int:
    """Return ℓ = [4t/(a+a⁻¹) + λρ(2t)^{1/3} + 1]."""
    return math.floor(4.0 * t / (consts.a + 1.0 / consts.a) + lam * consts.rho * (2.0 * t) ** (1.0 / 3.0) + 1.0)


def g_limit_diagnostic(
    a: float,
    lambdas: Iterable[float],
    t_values: Sequence[int] = DEFAULT_T_VALUES,
    settings: KernelSettings | None = None,
) -> list[dict[str, float]]:
    """Compare the rescaled g1_ℓ(2t) and g2_ℓ(2t) with -Ai at the λ their integer ℓ represents."""
    consts: ScalingConstants = constants(a)
    rows: list[dict[str, float]] = []
    for t in t_values:
        ctx: KernelContext = build_context(a, 2 * t, 0, settings)
        scale: float = (2.0 * t) ** (1.0 / 3.0)
        for lam in lambdas:
            ell: int = scaling_index(consts, lam, t)
            effective: float = (ell - 1.0 - 4.0 * t / (a + 1.0 / a)) / (consts.rho * scale)
            exponent: float = m_exponent(consts, 0.0, effective, t)
            first: float = scale * consts.big_a / (consts.v0 - a) * math.exp(-exponent) * g_function(ctx, "g1", ell)
            second: float = (
                scale * consts.big_a * (consts.v0 - a) * consts.v0**2 * math.exp(exponent) * g_function(ctx, "g2", ell)
            )
            target: float = -float(airy(effective))
            rows.append(
                {
                    "t": t,
                    "lambda": lam,
                    "ell": ell,
                    "lambda_effective": effective,
                    "scaled_g1": first,
                    "scaled_g2": second,
                    "target": target,
                    "error_g1": abs(first - target),
                    "error_g2": abs(second - target),
                }
            )
    return rows
