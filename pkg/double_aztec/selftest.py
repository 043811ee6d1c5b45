"""Deterministic self-test: a fixed subset of the acceptance checks with a plain-text report."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from double_aztec import __version__
from double_aztec.airy import AiryContext, neumann_residual, t_squared_residual
from double_aztec.config import AiryConfig, ChainConfig, KernelSettings
from double_aztec.errors import DoubleAztecError
from double_aztec.extended import (
    EynardMehtaKernel,
    SaddleKernel,
    build_default_representation_registry,
    c1_star,
    c_function,
    gap_probability,
    line_trace,
)
from double_aztec.geometry import (
    TransferCounter,
    all_horizontal_tiling,
    build_region,
    single_aztec_region,
    weighted_tilings,
)
from double_aztec.operators import (
    biorth_pairing,
    christoffel_darboux_check,
    norm_identity,
    rank_identity_checks,
    toeplitz_tau,
)
from double_aztec.sampler import TilingSampler, observe_gap, shuffle_single_aztec
from double_aztec.scaling import DEFAULT_T_VALUES, constants, convergence_table, m_identity_residual, trend_fraction
from double_aztec.symbols import build_context
from double_aztec.tacnode import build_default_form_registry
from double_aztec.types import ModelShape, TacnodePoint

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601
SHUFFLE_SAMPLES = 4000
CHAIN_SAMPLES = 4000
TACNODE_POINT = TacnodePoint(-0.2, 0.3, 0.1, -0.4)
CONVERGENCE_POINTS = ((0.0, 0.0, 0.0, 0.0), (0.0, 0.5, 0.0, -0.5), (-0.2, 0.3, 0.2, 0.3), (0.1, -0.4, 0.3, 0.2), (0.0, 1.0, 0.0, 1.0))


@dataclass(slots=True, frozen=True)
class Check:
    """A named residual with the threshold it must stay below (or above, for p-values)."""

    name: str
    compute: Callable[[], float]
    tolerance: float
    lower_bound: bool = False


@dataclass(slots=True, frozen=True)
class CheckResult:
    """Outcome of one check."""

    name: str
    value: float | None
    tolerance: float
    passed: bool
    message: str = ""


def _enumeration_gap(n: int, m: int, a: float, settings: KernelSettings) -> float:
    shape = ModelShape(a=a, n=n, m=m)
    counter = TransferCounter(build_region(shape), a)
    ctx = build_context(a, n, m, settings)
    width: int = shape.half_width
    worst: float = 0.0
    for x in range(-width, width + 1):
        exact: float = counter.gap_probability({n: [x]})
        worst = max(worst, abs(gap_probability(ctx, [n], [(x, x)]) - exact))
    for x in range(-width, width):
        exact = counter.gap_probability({n: [x, x + 1]})
        worst = max(worst, abs(gap_probability(ctx, [n], [(x, x + 1)]) - exact))
    for x in range(-width, width - 1):
        exact = counter.gap_probability({n: [x, x + 2]})
        worst = max(worst, abs(gap_probability(ctx, [n, n], [(x, x), (x + 2, x + 2)]) - exact))
    last: int = 2 * n
    for x in range(-width, width + 1):
        exact = counter.gap_probability({2: [x], last: [-x]})
        worst = max(worst, abs(gap_probability(ctx, [2, last], [(x, x), (-x, -x)]) - exact))
    return worst


def _trace(n: int, m: int, a: float, settings: KernelSettings) -> float:
    ctx = build_context(a, n, m, settings)
    rep = build_default_representation_registry().create("em", ctx)
    return abs(line_trace(ctx, rep, n // 2) - 2 * n)


def _representations(n: int, m: int, a: float, settings: KernelSettings, seed: int) -> float:
    ctx = build_context(a, n, m, settings)
    reps = build_default_representation_registry().create_many(["em", "k1", "k2"], ctx)
    rng: np.random.Generator = np.random.default_rng(seed)
    width: int = n + m
    worst: float = 0.0
    for _ in range(5):
        r, s = (int(value) for value in rng.integers(1, n + 1, size=2))
        x, y = (int(value) for value in rng.integers(-width, width + 1, size=2))
        values: list[float] = [rep.evaluate(r, x, s, y) for rep in reps]
        scale: float = max(1.0, max(abs(value) for value in values))
        worst = max(worst, (max(values) - min(values)) / scale)
    return worst


def _saddle(n: int, m: int, a: float, settings: KernelSettings) -> float:
    ctx = build_context(a, n, m, settings)
    saddle, exact = SaddleKernel(ctx), EynardMehtaKernel(ctx)
    r: int = n // 2
    worst: float = 0.0
    for x, y in [(0, 0), (0, 1), (-2, 1), (3, -1)]:
        worst = max(worst, abs(saddle.evaluate(r, x, r, y) - exact.evaluate(r, x, r, y)))
    return worst


def _orthogonality(n: int, m: int, a: float, settings: KernelSettings) -> float:
    ctx = build_context(a, n, m, settings)
    size: int = ctx.shape.inliers + 1
    worst: float = max(
        abs(biorth_pairing(ctx, k, ell) - (1.0 if k == ell else 0.0)) for k in range(size) for ell in range(size)
    )
    return max(worst, christoffel_darboux_check(ctx, 0.8 * np.exp(1j * np.pi / 3.0), 0.6))


def _norm_identity(n: int, m: int, a: float, settings: KernelSettings) -> float:
    return abs(norm_identity(build_context(a, n, m, settings)) - 1.0)


def _c_function(n: int, m: int, a: float, settings: KernelSettings) -> float:
    ctx = build_context(a, n, m, settings)
    worst: float = abs(c1_star(ctx, 0))
    for x in (-2, -1, 1, 2):
        worst = max(worst, abs(c_function(ctx, 0, x, "integral") - c_function(ctx, 0, x, "sum")))
    return worst


def _toeplitz(n: int, a: float, settings: KernelSettings) -> float:
    ctx = build_context(a, n, 0, settings)
    worst: float = 0.0
    for p in range(1, n + 1):
        direct: float = toeplitz_tau(ctx, p, "direct")
        worst = max(worst, abs(toeplitz_tau(ctx, p, "fredholm") - direct) / abs(direct))
    return worst


def _tacnode_spread(sigma: float, config: AiryConfig) -> float:
    ctx = AiryContext(sigma, config)
    forms = build_default_form_registry().create_many(["i", "ii", "brownian"], ctx)
    values: list[float] = [form.evaluate(TACNODE_POINT) for form in forms]
    return max(values) - min(values)


def _double_integral_form(sigma: float, config: AiryConfig) -> float:
    ctx = AiryContext(sigma, config)
    forms = build_default_form_registry().create_many(["i", "iii"], ctx)
    first, second = (form.evaluate(TACNODE_POINT) for form in forms)
    return abs(first - second)


def _chain_p_value(a: float, seed: int) -> float:
    """Return the two-sided p-value of the chain gap frequency on (2,0) against the exact probability."""
    region = build_region(ModelShape(a=a, n=2, m=0))
    windows: dict[int, list[int]] = {2: [0]}
    exact: float = TransferCounter(region, a).gap_probability(windows)
    config = ChainConfig(seed=seed, burn_in=1000, samples=CHAIN_SAMPLES, thinning=10, chains=2)
    result = TilingSampler(all_horizontal_tiling(region), a, config).estimate(observe_gap(windows))
    if result.stderr == 0.0:
        return 1.0 if result.mean == exact else 0.0
    return float(2.0 * stats.norm.sf(abs(result.mean - exact) / result.stderr))


def _shuffle_p_value(n: int, a: float, seed: int) -> float:
    exact = weighted_tilings(single_aztec_region(n), a)
    index: dict[tuple, int] = {tiling.dominoes: k for k, (tiling, _) in enumerate(exact)}
    rng: np.random.Generator = np.random.default_rng(seed)
    counts: Counter[int] = Counter(index[shuffle_single_aztec(n, a, rng).dominoes] for _ in range(SHUFFLE_SAMPLES))
    observed: np.ndarray = np.array([counts.get(k, 0) for k in range(len(exact))], dtype=float)
    expected: np.ndarray = np.array([weight for _, weight in exact]) * SHUFFLE_SAMPLES
    return float(stats.chisquare(observed, expected).pvalue)


@dataclass(slots=True)
class SelfTest:
    """Runs the checks in a fixed order; slow convergence checks only with full=True."""

    a: float = 0.5
    seed: int = DEFAULT_SEED
    full: bool = False
    settings: KernelSettings = field(default_factory=KernelSettings)
    airy_config: AiryConfig = field(default_factory=AiryConfig)
    logger: logging.Logger = logging.getLogger(__name__)

    def checks(self) -> list[Check]:
        """Return the check list for this configuration."""
        a, settings, seed = self.a, self.settings, self.seed
        selected: list[Check] = [
            Check("scaling_constants", lambda: max(constants(a).identity_residuals().values()), 1e-12),
            Check("m_exponent_identity", lambda: m_identity_residual(constants(a), 0.3, -0.7, 1.1, 0.4, -0.9, 32), 1e-10),
            Check("rank_one_identities", lambda: max(rank_identity_checks(seed).values()), 1e-10),
            Check("gap_vs_enumeration_2_0", lambda: _enumeration_gap(2, 0, a, settings), 1e-8),
            Check("gap_vs_enumeration_4_1", lambda: _enumeration_gap(4, 1, a, settings), 1e-8),
            Check("line_trace_8_2", lambda: _trace(8, 2, a, settings), 1e-8),
            Check("representations_8_2", lambda: _representations(8, 2, a, settings, seed), 1e-8),
            Check("representations_12_3", lambda: _representations(12, 3, a, settings, seed), 1e-8),
            Check("saddle_vs_em_8_2", lambda: _saddle(8, 2, a, settings), 1e-8),
            Check("orthogonality_8_2", lambda: _orthogonality(8, 2, a, settings), 1e-8),
            Check("norm_identity_8_2", lambda: _norm_identity(8, 2, a, settings), 1e-8),
            Check("c_function_8_2", lambda: _c_function(8, 2, a, settings), 1e-9),
            Check("toeplitz_borodin_okounkov", lambda: _toeplitz(10, a, settings), 1e-10),
            Check("airy_t_squared", lambda: t_squared_residual(AiryContext(1.0, self.airy_config)), 1e-8),
            Check("airy_resolvent_equation", lambda: neumann_residual(AiryContext(1.0, self.airy_config)), 1e-8),
            Check("tacnode_forms", lambda: _tacnode_spread(1.0, self.airy_config), 1e-6),
            Check("tacnode_form_iii", lambda: _double_integral_form(1.0, self.airy_config), 1e-6),
            Check("shuffle_chi_square_az2", lambda: _shuffle_p_value(2, a, seed), 0.01, lower_bound=True),
            Check("mcmc_vs_exact_2_0", lambda: _chain_p_value(a, seed), 1e-3, lower_bound=True),
        ]
        if self.full:
            selected.append(
                Check(
                    "convergence_trend",
                    lambda: trend_fraction(
                        convergence_table(a, 1.0, CONVERGENCE_POINTS, DEFAULT_T_VALUES, settings=settings, airy_config=self.airy_config)
                    ),
                    0.8,
                    lower_bound=True,
                )
            )
        return selected

    def run(self) -> list[CheckResult]:
        """Run every check; failures are collected, not raised."""
        results: list[CheckResult] = []
        for check in self.checks():
            try:
                value: float = float(check.compute())
            except DoubleAztecError as error:
                self.logger.warning("Check %s raised %s: %s", check.name, type(error).__name__, error)
                results.append(CheckResult(check.name, None, check.tolerance, False, f"{type(error).__name__}: {error}"))
                continue
            passed: bool = value >= check.tolerance if check.lower_bound else value <= check.tolerance
            self.logger.info("Check %s: %s (%.3e)", check.name, "pass" if passed else "FAIL", value)
            results.append(CheckResult(check.name, value, check.tolerance, passed))
        return results


def format_report(results: Sequence[CheckResult], seed: int) -> str:
    """Render results as a fixed-width report without timestamps."""
    lines: list[str] = [f"double-aztec {__version__} selftest, seed {seed}"]
    for result in results:
        status: str = "PASS" if result.passed else "FAIL"
        value: str = f"{result.value:.3e}" if result.value is not None else result.message
        lines.append(f"{status}  {result.name:<28} {value:>12}  tol {result.tolerance:.1e}")
    passed: int = sum(result.passed for result in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
