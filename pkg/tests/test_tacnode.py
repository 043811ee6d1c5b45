from __future__ import annotations

import pytest

from double_aztec.airy import AiryContext, heat_p
from double_aztec.errors import NoDecay
from double_aztec.tacnode import (
    DoubleIntegralForm,
    build_default_form_registry,
    heat_term,
    tacnode,
    tacnode_grid,
)
from double_aztec.types import TacnodePoint

POINTS = [TacnodePoint(-0.2, 0.3, 0.1, -0.4), TacnodePoint(0.3, 0.2, -0.1, 0.5), TacnodePoint(0.0, 0.0, 0.0, 0.0)]


def test_registry(airy_ctx: AiryContext) -> None:
    registry = build_default_form_registry()
    assert registry.names() == ["i", "ii", "iii", "brownian"]
    assert [form.name for form in registry.create_many(["all"], airy_ctx)] == ["i", "ii", "iii", "brownian"]
    with pytest.raises(ValueError, match="Unknown tacnode form"):
        registry.create("iv", airy_ctx)


def test_heat_term() -> None:
    assert heat_term(TacnodePoint(0.1, 0.0, 0.2, 0.5)) == 0.0
    assert heat_term(TacnodePoint(0.3, 0.0, 0.1, 0.5)) == pytest.approx(-heat_p(0.2, 0.0, 0.5))


@pytest.mark.parametrize("point", POINTS)
def test_forms_agree(airy_ctx: AiryContext, point: TacnodePoint) -> None:
    values = [tacnode(name, point, airy_ctx) for name in ("i", "ii", "brownian")]
    assert max(values) - min(values) < 1e-6


@pytest.mark.parametrize("form", ["i", "ii", "brownian"])
def test_reflection_symmetry(airy_ctx: AiryContext, form: str) -> None:
    for point in POINTS[:2]:
        assert tacnode(form, point.reflected(), airy_ctx) == pytest.approx(tacnode(form, point, airy_ctx), abs=1e-8)


def test_forms_agree_without_pressure() -> None:
    ctx = AiryContext(0.0)
    values = [tacnode(name, POINTS[1], ctx) for name in ("i", "ii", "brownian")]
    assert max(values) - min(values) < 1e-6


def test_double_integral_needs_decay(airy_ctx: AiryContext) -> None:
    with pytest.raises(NoDecay):
        DoubleIntegralForm(airy_ctx).evaluate(TacnodePoint(0.0, 0.0, 1.0, 0.0, delta=0.5))


def test_double_integral_form_agrees(airy_ctx: AiryContext) -> None:
    point = POINTS[0]
    assert tacnode("iii", point, airy_ctx) == pytest.approx(tacnode("i", point, airy_ctx), abs=1e-6)


def test_double_integral_form_independent_of_offset(airy_ctx: AiryContext) -> None:
    point = POINTS[0]
    moved = TacnodePoint(point.tau1, point.xi1, point.tau2, point.xi2, delta=0.8)
    assert tacnode("iii", moved, airy_ctx) == pytest.approx(tacnode("iii", point, airy_ctx), abs=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize("point", POINTS[1:])
def test_double_integral_form_agrees_across_points(airy_ctx: AiryContext, point: TacnodePoint) -> None:
    assert tacnode("iii", point, airy_ctx) == pytest.approx(tacnode("i", point, airy_ctx), abs=1e-6)


def test_grid_reports_spread(airy_ctx: AiryContext) -> None:
    forms = build_default_form_registry().create_many(["i", "ii"], airy_ctx)
    rows = tacnode_grid(airy_ctx, forms, POINTS[:1])
    assert set(rows[0]) == {"tau1", "xi1", "tau2", "xi2", "form_i", "form_ii", "err_est"}
    assert rows[0]["err_est"] < 1e-6
