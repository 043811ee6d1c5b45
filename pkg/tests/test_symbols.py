from __future__ import annotations

import numpy as np
import pytest

from double_aztec.errors import InvalidShape
from double_aztec.symbols import (
    BinomialSymbol,
    KernelContext,
    g_function,
    g_table,
    h_function,
    psi,
    psi_full,
    psi_half_steps,
    step_symbol,
)


def test_binomial_coefficients() -> None:
    np.testing.assert_allclose(BinomialSymbol(0.5, 2, 0).coefficients(0, 2), [1.0, 1.0, 0.25], atol=1e-15)
    assert BinomialSymbol(0.5, 0, 1).coefficient(-1) == pytest.approx(-0.5)


def test_step_symbol_identity() -> None:
    symbol = step_symbol(0.5, 0)
    assert symbol.coefficient(0) == pytest.approx(1.0)
    assert symbol.coefficient(1) == pytest.approx(0.0)


def test_psi_one_step(ctx_small: KernelContext) -> None:
    assert psi(ctx_small, 1, 0, 0) == pytest.approx(1.25, rel=1e-14)
    assert psi(ctx_small, 1, 0, 1) == pytest.approx(0.5, rel=1e-14)
    assert psi(ctx_small, 1, 0, 2) == pytest.approx(0.0, abs=1e-15)


def test_psi_routes_agree(ctx_small: KernelContext) -> None:
    for x, y in [(0, 0), (2, -1), (-1, 1)]:
        assert psi(ctx_small, 2, x, y, route="contour") == pytest.approx(psi(ctx_small, 2, x, y), abs=1e-10)


def test_psi_composes(ctx_small: KernelContext) -> None:
    x, y = 3, 0
    composed = sum(psi(ctx_small, 1, x, z) * psi(ctx_small, 1, z, y) for z in range(y - 1, x + 2))
    assert composed == pytest.approx(psi(ctx_small, 2, x, y), rel=1e-12)


def test_g_table_matches_direct(ctx_small: KernelContext) -> None:
    table = g_table(ctx_small)
    for ell in range(-3, 7):
        assert table.first(ell) == pytest.approx(g_function(ctx_small, "g1", ell), abs=1e-14)
        assert table.second(ell) == pytest.approx(g_function(ctx_small, "g2", ell), abs=1e-14)


def test_g_variant_errors(ctx_small: KernelContext) -> None:
    with pytest.raises(ValueError, match="needs both"):
        g_function(ctx_small, "g1_ext", 0)
    with pytest.raises(ValueError, match="Unknown g variant"):
        g_function(ctx_small, "g3", 0)


@pytest.mark.parametrize(("variant", "arg"), [("h1", 0.3 + 0.1j), ("h2", 0.4 - 0.2j)])
def test_h_routes_agree(ctx_small: KernelContext, variant: str, arg: complex) -> None:
    for k in (1, 2, 4):
        series = h_function(ctx_small, variant, k, arg)
        contour = h_function(ctx_small, variant, k, arg, route="contour")
        assert contour == pytest.approx(series, abs=1e-9)


def test_h_unknown_route(ctx_small: KernelContext) -> None:
    with pytest.raises(ValueError, match="Unknown h route"):
        h_function(ctx_small, "h1", 1, 0.3, route="fft")


def test_half_steps_compose_to_full_transition(ctx_mid: KernelContext) -> None:
    count = ctx_mid.shape.inliers
    for k in (2, 4, 6):
        for j in range(1, count + 1):
            for i in range(1, count + 1):
                composed = sum(
                    psi_half_steps(ctx_mid, k, x, j)[0] * psi_half_steps(ctx_mid, k, x, i)[1] for x in range(-12, 13)
                )
                expected = psi_full(ctx_mid, -ctx_mid.m + j - 1, -ctx_mid.m + i - 1)
                assert composed == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_half_steps_start_at_anchor(ctx_mid: KernelContext) -> None:
    for j in (1, 2, 3):
        anchor = -ctx_mid.m + j - 1
        starts = [psi_half_steps(ctx_mid, 0, x, j)[0] for x in range(-3, 4)]
        assert starts == pytest.approx([1.0 if x == anchor else 0.0 for x in range(-3, 4)], abs=1e-15)
    with pytest.raises(InvalidShape):
        psi_half_steps(ctx_mid, 3, 0, 1)
