from __future__ import annotations

import math

import pytest

from double_aztec.errors import InvalidShape, OutOfRange
from double_aztec.scaling import (
    ConvergenceStudy,
    constants,
    effective_parameters,
    g_limit_diagnostic,
    m_identity_residual,
    scale_map,
    scaling_index,
    trend_fraction,
)


def test_constants_at_half() -> None:
    consts = constants(0.5)
    assert consts.v0 == pytest.approx(-1.0 / 3.0)
    assert consts.big_a**3 == pytest.approx(6.075)
    assert consts.theta**3 == pytest.approx(1.875)
    assert consts.rho == pytest.approx(0.6082, abs=1e-4)


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_constant_identities(a: float) -> None:
    assert max(constants(a).identity_residuals().values()) < 1e-12


@pytest.mark.parametrize("a", [0.0, 1.0, 1.5])
def test_constants_reject_weight(a: float) -> None:
    with pytest.raises(InvalidShape):
        constants(a)


@pytest.mark.parametrize(
    ("tau", "xi", "sigma", "beta", "kappa", "t"),
    [(0.3, -0.7, 1.1, 0.4, -0.9, 32), (-1.2, 0.5, 2.0, 1.5, 0.1, 7), (0.0, 0.0, 0.5, 0.0, 0.0, 100)],
)
def test_exponent_identity(tau: float, xi: float, sigma: float, beta: float, kappa: float, t: int) -> None:
    assert m_identity_residual(constants(0.5), tau, xi, sigma, beta, kappa, t) < 1e-9


def test_scale_map_at_origin() -> None:
    point = scale_map(0.5, 16, 1.0, 0.0, 0.0, 0.0, 0.0)
    assert (point.n, point.r, point.s, point.x, point.y) == (32, 16, 16, 0, 0)
    expected_m = round(2.0 * 16 / 2.5 + constants(0.5).rho * 16 ** (1.0 / 3.0))
    assert point.m == expected_m == 14
    assert point.shape.overlaps


def test_scale_map_rejects() -> None:
    with pytest.raises(InvalidShape):
        scale_map(0.5, 8, 1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(OutOfRange):
        scale_map(0.5, 0, 1.0, 0.0, 0.0, 0.0, 0.0)


def test_effective_parameters_reproduce_integers() -> None:
    consts = constants(0.5)
    point = scale_map(0.5, 24, 1.0, -0.2, 0.3, 0.1, -0.4)
    sigma, target = effective_parameters(consts, point)
    again = scale_map(0.5, 24, sigma, target.tau1, target.xi1, target.tau2, target.xi2)
    assert (again.m, again.r, again.x, again.s, again.y) == (point.m, point.r, point.x, point.s, point.y)
    assert max(abs(value) for value in again.residuals.values()) < 1e-9


def test_scaling_index() -> None:
    consts = constants(0.5)
    assert scaling_index(consts, 0.0, 16) == 26
    assert scaling_index(consts, 1.0, 16) == math.floor(26.6 + consts.rho * 32 ** (1.0 / 3.0))


def test_trend_fraction() -> None:
    rows = [
        {"t": 16, "tau1": 0.0, "xi1": 0.0, "tau2": 0.0, "xi2": 0.0, "abs_error": 0.1},
        {"t": 32, "tau1": 0.0, "xi1": 0.0, "tau2": 0.0, "xi2": 0.0, "abs_error": 0.05},
        {"t": 16, "tau1": 0.1, "xi1": 0.0, "tau2": 0.0, "xi2": 0.0, "abs_error": 0.1},
        {"t": 32, "tau1": 0.1, "xi1": 0.0, "tau2": 0.0, "xi2": 0.0, "abs_error": 0.2},
        {"t": 16, "tau1": 0.2, "xi1": 0.0, "tau2": 0.0, "xi2": 0.0, "abs_error": 0.1},
    ]
    assert trend_fraction(rows) == 0.5
    assert trend_fraction([]) == 0.0


def test_g_limit_rows() -> None:
    rows = g_limit_diagnostic(0.5, [0.0, 1.0], [16])
    assert [row["ell"] for row in rows] == [26, scaling_index(constants(0.5), 1.0, 16)]
    for row in rows:
        assert math.isfinite(row["scaled_g1"]) and math.isfinite(row["scaled_g2"])
        assert abs(row["lambda_effective"] - row["lambda"]) * constants(0.5).rho * 32 ** (1.0 / 3.0) <= 1.0


def test_study_skips_shapes_without_overlap() -> None:
    study = ConvergenceStudy(a=0.5, sigma=1.0)
    assert study.table([(0.0, 0.0, 0.0, 0.0)], t_values=[8]) == []


@pytest.mark.slow
def test_convergence_improves_with_t() -> None:
    study = ConvergenceStudy(a=0.5, sigma=1.0)
    rows = study.table([(0.0, 0.0, 0.0, 0.0), (0.0, 0.5, 0.0, -0.5)], t_values=[16, 32])
    assert len(rows) == 4
    assert trend_fraction(rows) >= 0.5
