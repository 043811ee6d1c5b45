from __future__ import annotations

import pytest

from double_aztec.errors import OutOfRange
from double_aztec.extended import (
    EynardMehtaKernel,
    SaddleKernel,
    build_default_representation_registry,
    c1_star,
    c_function,
    exchange_identity,
    ext_kernel,
    gap_probability,
    inlier_kernel,
    kernel_grid,
    line_trace,
    one_aztec_kernel,
)
from double_aztec.geometry import TransferCounter, build_region, empirical_correlations, weighted_tilings
from double_aztec.symbols import KernelContext, build_context


def test_registry_names(ctx_small: KernelContext) -> None:
    registry = build_default_representation_registry()
    assert registry.names() == ["em", "k1", "k2", "saddle"]
    assert [rep.name for rep in registry.create_many(["all"], ctx_small)] == ["em", "k1", "k2", "saddle"]
    with pytest.raises(ValueError, match="Unknown kernel representation"):
        registry.create("k9", ctx_small)


def test_one_point_function_matches_enumeration(ctx_small: KernelContext) -> None:
    weighted = weighted_tilings(build_region(ctx_small.shape), ctx_small.a)
    kernel = EynardMehtaKernel(ctx_small)
    for x in (-1, 0, 1):
        assert kernel.evaluate(1, x, 1, x) == pytest.approx(empirical_correlations(weighted, 2, [x]), abs=1e-8)


def test_gap_matches_transfer_counter(ctx_mid: KernelContext) -> None:
    counter = TransferCounter(build_region(ctx_mid.shape), ctx_mid.a)
    line: int = ctx_mid.n
    for lo, hi in [(0, 0), (-1, 0), (1, 2)]:
        exact = counter.gap_probability({line: range(lo, hi + 1)})
        assert gap_probability(ctx_mid, [line], [(lo, hi)]) == pytest.approx(exact, abs=1e-8)


def test_representations_agree(ctx_mid: KernelContext) -> None:
    reps = build_default_representation_registry().create_many(["em", "k1", "k2"], ctx_mid)
    for point in [(2, 0, 2, 1), (1, -2, 3, 0), (4, 1, 2, -1)]:
        values = [value.value for value in kernel_grid(ctx_mid, reps, [point])]
        scale = max(1.0, max(abs(value) for value in values))
        assert (max(values) - min(values)) / scale < 1e-8


def test_line_trace_counts_dots(ctx_mid: KernelContext) -> None:
    kernel = EynardMehtaKernel(ctx_mid)
    for r in range(1, ctx_mid.n + 1):
        assert line_trace(ctx_mid, kernel, r) == pytest.approx(2 * ctx_mid.n, abs=1e-8)


def test_gap_conjugation_invariant(ctx_mid: KernelContext) -> None:
    plain = gap_probability(ctx_mid, [2, 4], [(-1, 1), (0, 2)])
    assert gap_probability(ctx_mid, [2, 4], [(-1, 1), (0, 2)], conjugation=0.7) == pytest.approx(plain, abs=1e-12)


def test_gap_monotone(ctx_mid: KernelContext) -> None:
    nested = [gap_probability(ctx_mid, [4], [(-k, k)]) for k in range(3)]
    assert 1.0 >= nested[0] >= nested[1] >= nested[2] >= -1e-12
    assert gap_probability(ctx_mid, [], []) == 1.0


def test_gap_argument_errors(ctx_mid: KernelContext) -> None:
    with pytest.raises(OutOfRange):
        gap_probability(ctx_mid, [3], [(0, 0)])
    with pytest.raises(OutOfRange):
        gap_probability(ctx_mid, [2, 4], [(0, 0)])
    with pytest.raises(OutOfRange):
        gap_probability(ctx_mid, [2], [(0, 9)])


def test_ext_kernel_checks_sites(ctx_small: KernelContext) -> None:
    kernel = EynardMehtaKernel(ctx_small)
    value = ext_kernel(ctx_small, kernel, 1, 0, 2, 1)
    assert (value.r, value.x, value.s, value.y, value.representation) == (1, 0, 2, 1, "em")
    with pytest.raises(OutOfRange):
        ext_kernel(ctx_small, kernel, 0, 0, 1, 0)
    with pytest.raises(OutOfRange):
        ext_kernel(ctx_small, kernel, 1, 5, 1, 0)


def test_representations_agree_far_from_the_edge() -> None:
    ctx = build_context(0.5, 12, 3)
    reps = build_default_representation_registry().create_many(["em", "k1", "k2"], ctx)
    values = [value.value for value in kernel_grid(ctx, reps, [(2, -5, 9, 4)])]
    assert values[0] == pytest.approx(-0.23779452994, abs=1e-9)
    for value in values[1:]:
        assert value == pytest.approx(values[0], rel=1e-8)


def test_saddle_matches_eynard_mehta_on_middle_line(ctx_mid: KernelContext) -> None:
    saddle = SaddleKernel(ctx_mid)
    exact = EynardMehtaKernel(ctx_mid)
    r = ctx_mid.n // 2
    for x, y in [(0, 1), (-1, 1), (2, 0)]:
        assert saddle.evaluate(r, x, r, y) == pytest.approx(exact.evaluate(r, x, r, y), abs=1e-9)


def test_c_function_routes_agree(ctx_mid: KernelContext) -> None:
    assert abs(c1_star(ctx_mid, 0)) < 1e-10
    for x in (-2, -1, 1, 2):
        assert c_function(ctx_mid, 0, x, "integral") == pytest.approx(c_function(ctx_mid, 0, x, "sum"), abs=1e-9)


def test_exchange_identity(ctx_mid: KernelContext) -> None:
    lhs, rhs = exchange_identity(ctx_mid, 1)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_one_aztec_routes_agree(ctx_mid: KernelContext) -> None:
    order = ctx_mid.n
    for r, x, s, y in [(2, 0, 2, 1), (1, -1, 3, 0), (3, 1, 1, 2)]:
        series = one_aztec_kernel(ctx_mid, order, r, x, s, y)
        assert one_aztec_kernel(ctx_mid, order, r, x, s, y, route="contour") == pytest.approx(series, abs=1e-10)


def test_inlier_kernel_trace_counts_inlier_paths(ctx_mid: KernelContext) -> None:
    width = ctx_mid.shape.half_width
    for r in (1, ctx_mid.n // 2, ctx_mid.n):
        trace = sum(inlier_kernel(ctx_mid, r, x, r, x) for x in range(-width, width + 1))
        assert trace == pytest.approx(ctx_mid.shape.inliers, abs=1e-8)


def test_split_and_multi_line_gaps_match_transfer_counter(ctx_mid: KernelContext) -> None:
    counter = TransferCounter(build_region(ctx_mid.shape), ctx_mid.a)
    line = ctx_mid.n
    split = gap_probability(ctx_mid, [line, line], [(-1, -1), (1, 1)])
    assert split == pytest.approx(counter.gap_probability({line: [-1, 1]}), abs=1e-8)
    last = 2 * ctx_mid.n
    joint = gap_probability(ctx_mid, [2, last], [(0, 1), (-1, 0)])
    assert joint == pytest.approx(counter.gap_probability({2: [0, 1], last: [-1, 0]}), abs=1e-8)
