from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
import pytest
from scipy.special import airy

from double_aztec.config import QuadratureConfig
from double_aztec.contour import (
    MAX_PAIR_NODES,
    CircleContour,
    RayContour,
    VerticalLineContour,
    gauss_legendre,
    integrate_cauchy_pair,
    integrate_circle,
    integrate_double_circle,
    integrate_rays,
    integrate_vertical,
    integrate_vertical_cauchy,
    laurent_coefficients,
)
from double_aztec.errors import NonConvergence, OutOfRange


def test_circle_residue() -> None:
    result = integrate_circle(lambda z: 1.0 / z, CircleContour(1.0), QuadratureConfig())
    assert result.value == pytest.approx(2j * math.pi, abs=1e-12)


def test_circle_polynomial_vanishes() -> None:
    result = integrate_circle(lambda z: z**2 + 3.0 * z, CircleContour(0.7), QuadratureConfig())
    assert abs(result.value) < 1e-12


def test_laurent_coefficients_of_polynomial() -> None:
    coefficients = laurent_coefficients(lambda z: (1.0 + 0.5 * z) ** 3, 1.0, 64, 0, 3)
    np.testing.assert_allclose(coefficients, [1.0, 1.5, 0.75, 0.125], atol=1e-13)


def test_gauss_legendre_exact_for_cubics() -> None:
    nodes, weights = gauss_legendre(20, 0.0, 2.0)
    assert float(np.sum(weights * nodes**3)) == pytest.approx(4.0, rel=1e-13)


def test_vertical_gaussian() -> None:
    result = integrate_vertical(lambda u: np.exp(u**2 / 2.0), VerticalLineContour(0.0), QuadratureConfig())
    assert result.value == pytest.approx(1j * math.sqrt(2.0 * math.pi), abs=1e-10)


def test_vertical_cauchy_residue_jump() -> None:
    def factors(u: np.ndarray, v: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(np.exp(u**2), np.exp(v**2))]

    v_line = VerticalLineContour(0.0, 7.0)
    right = integrate_vertical_cauchy(factors, VerticalLineContour(1.0, 7.0), v_line, 0.1, 1e-10, 6)
    left = integrate_vertical_cauchy(factors, VerticalLineContour(-1.0, 7.0), v_line, 0.1, 1e-10, 6)
    # moving the u-line across the v-line picks up 2πi ∫ e^{2v²} dv
    expected = -2.0 * math.pi * math.sqrt(math.pi / 2.0)
    assert right.value - left.value == pytest.approx(expected, abs=1e-8)


def test_vertical_cauchy_needs_distinct_lines() -> None:
    line = VerticalLineContour(0.5)
    with pytest.raises(OutOfRange):
        integrate_vertical_cauchy(lambda u, v: [(u, v)], line, line, 0.1, 1e-10, 4)


def test_double_circle_order_of_contours() -> None:
    def f(z: np.ndarray, w: np.ndarray) -> np.ndarray:
        return np.exp(z) / (w * (w - z))

    config = QuadratureConfig()
    inside = integrate_double_circle(f, CircleContour(0.5), CircleContour(0.8), config)
    outside = integrate_double_circle(f, CircleContour(0.8), CircleContour(0.5), config)
    assert abs(inside.value) < 1e-10
    assert outside.value == pytest.approx(4.0 * math.pi**2, rel=1e-10)


def test_double_circle_separable_product() -> None:
    def f(z: np.ndarray, w: np.ndarray) -> np.ndarray:
        return np.exp(z) / z / (w - 0.2)

    result = integrate_double_circle(f, CircleContour(0.5), CircleContour(0.8), QuadratureConfig())
    assert result.value == pytest.approx((2j * math.pi) ** 2, rel=1e-10)


def test_cauchy_pair_residues() -> None:
    def factors(z: np.ndarray, w: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(np.exp(z) / z, 1.0 / w)]

    result = integrate_cauchy_pair(factors, CircleContour(0.8), CircleContour(0.5), QuadratureConfig())
    assert result.value == pytest.approx(-4.0 * math.pi**2, rel=1e-10)


def test_double_circle_stops_at_node_cap() -> None:
    noise = np.random.default_rng(5)

    def f(z: np.ndarray, w: np.ndarray) -> np.ndarray:
        return noise.standard_normal(np.broadcast(z, w).shape)

    config = QuadratureConfig(initial_nodes=MAX_PAIR_NODES // 2, max_doublings=3)
    with pytest.raises(NonConvergence, match=f"{MAX_PAIR_NODES} nodes"):
        integrate_double_circle(f, CircleContour(0.5), CircleContour(0.8), config)


def airy_integrand(x: float) -> Callable[[np.ndarray], np.ndarray]:
    def f(v: np.ndarray) -> np.ndarray:
        return np.exp(v**3 / 3.0 - x * v) / (2j * math.pi)

    return f


def test_rays_give_airy_at_zero() -> None:
    result = integrate_rays(airy_integrand(0.0), RayContour(-1.0), QuadratureConfig())
    assert result.value.real == pytest.approx(airy(0.0)[0], rel=1e-10)
    assert abs(result.value.imag) < 1e-11


def test_rays_independent_of_angle() -> None:
    config = QuadratureConfig()
    steep = integrate_rays(airy_integrand(0.7), RayContour(-1.0, angle=5.0 * math.pi / 12.0), config)
    default = integrate_rays(airy_integrand(0.7), RayContour(-1.0), config)
    assert steep.value == pytest.approx(default.value, abs=1e-10)


def test_rays_resolve_small_airy_tail() -> None:
    result = integrate_rays(airy_integrand(8.0), RayContour(2.0), QuadratureConfig())
    assert 0.0 < result.value.real < 1e-6
    assert result.value.real == pytest.approx(airy(8.0)[0], rel=1e-6)
