from __future__ import annotations

import pytest

from double_aztec.errors import BudgetExceeded, InvalidShape, InvalidTiling, OutOfRange
from double_aztec.geometry import (
    Domino,
    Tiling,
    TransferCounter,
    all_horizontal_tiling,
    build_region,
    empirical_correlations,
    empirical_gap,
    enumerate_tilings,
    height_field,
    level_lines,
    particles,
    single_aztec_region,
    tiling_weight,
    weighted_tilings,
)
from double_aztec.types import ModelShape

SMALL = ModelShape(a=0.5, n=2, m=0)


@pytest.fixture(scope="module")
def small_tilings() -> list[tuple[Tiling, float]]:
    return weighted_tilings(build_region(SMALL), 0.5)


def test_single_diamond_counts() -> None:
    assert len(single_aztec_region(1).cells) == 4
    assert len(single_aztec_region(2).cells) == 12
    assert len(list(enumerate_tilings(single_aztec_region(1)))) == 2
    assert len(list(enumerate_tilings(single_aztec_region(2)))) == 8


def test_enumeration_orders_agree() -> None:
    region = single_aztec_region(2)
    first = {tiling.dominoes for tiling in enumerate_tilings(region, order="ij")}
    second = {tiling.dominoes for tiling in enumerate_tilings(region, order="ji")}
    assert first == second


def test_enumeration_budget() -> None:
    with pytest.raises(BudgetExceeded):
        list(enumerate_tilings(single_aztec_region(5)))


@pytest.mark.parametrize(
    ("domino", "compass"),
    [
        (Domino((0, 0), (1, 0)), "S"),
        (Domino((1, 0), (2, 0)), "N"),
        (Domino((0, 0), (0, 1)), "W"),
        (Domino((1, 0), (1, 1)), "E"),
    ],
)
def test_compass(domino: Domino, compass: str) -> None:
    assert domino.compass == compass
    assert domino.blue == (compass in {"S", "W"})


def test_domino_validation() -> None:
    with pytest.raises(InvalidTiling):
        Domino((0, 0), (2, 0))
    assert Domino.of((1, 0), (0, 0)) == Domino((0, 0), (1, 0))


def test_tiling_validation() -> None:
    region = single_aztec_region(1)
    with pytest.raises(InvalidTiling):
        Tiling.from_dominoes(region, [Domino((-1, -1), (0, -1))])
    with pytest.raises(InvalidTiling):
        Tiling.from_dominoes(region, [Domino((-1, -1), (0, -1)), Domino((-1, -1), (-1, 0))])
    with pytest.raises(InvalidTiling):
        Tiling.from_dominoes(region, [Domino((-1, -1), (0, -1)), Domino((0, 0), (1, 0))])


def test_shape_validation() -> None:
    with pytest.raises(InvalidShape):
        ModelShape(a=0.5, n=3, m=0)
    with pytest.raises(InvalidShape):
        ModelShape(a=1.0, n=2, m=0)
    with pytest.raises(InvalidShape):
        ModelShape(a=0.5, n=4, m=2).require_overlap()
    with pytest.raises(InvalidShape):
        build_region(ModelShape(a=0.5, n=4, m=2))


def test_site_bounds() -> None:
    region = build_region(SMALL)
    with pytest.raises(OutOfRange):
        region.site_cell(0, 0)
    with pytest.raises(OutOfRange):
        region.site_cell(2, 3)
    assert len(region.line_sites(2)) == 2 * SMALL.half_width + 1
    with pytest.raises(InvalidShape):
        single_aztec_region(2).site_cell(1, 0)


def test_all_horizontal_tiling() -> None:
    tiling = all_horizontal_tiling(build_region(ModelShape(a=0.5, n=4, m=1)))
    assert tiling.vertical_count == 0


def test_particle_counts(small_tilings: list[tuple[Tiling, float]]) -> None:
    for tiling, _ in small_tilings:
        config = particles(tiling)
        for line in (2, 4):
            assert len(config.dots(line)) == 2 * SMALL.n
        with pytest.raises(OutOfRange):
            config.dots(1)


def test_probabilities_normalized(small_tilings: list[tuple[Tiling, float]]) -> None:
    assert sum(weight for _, weight in small_tilings) == pytest.approx(1.0)


def test_transfer_counter_matches_enumeration() -> None:
    region = build_region(SMALL)
    counter = TransferCounter(region, 0.5)
    total = sum(tiling_weight(tiling, 0.5) for tiling in enumerate_tilings(region))
    assert counter.partition_function() == pytest.approx(total, rel=1e-12)


def test_transfer_gap_matches_enumeration(small_tilings: list[tuple[Tiling, float]]) -> None:
    counter = TransferCounter(build_region(SMALL), 0.5)
    for windows in ({2: [0]}, {2: [-1, 0]}, {2: [1], 4: [0]}):
        assert counter.gap_probability(windows) == pytest.approx(empirical_gap(small_tilings, windows), abs=1e-12)
    assert counter.correlation(2, [0]) == pytest.approx(empirical_correlations(small_tilings, 2, [0]), abs=1e-12)


def test_height_traversals_agree(small_tilings: list[tuple[Tiling, float]]) -> None:
    for tiling, _ in small_tilings:
        bfs = height_field(tiling, "h", "bfs")
        dfs = height_field(tiling, "h", "dfs")
        assert dict(bfs.values) == dict(dfs.values)


def test_level_lines(small_tilings: list[tuple[Tiling, float]]) -> None:
    tiling, _ = small_tilings[0]
    for kind, count in (("h", 2 * SMALL.n), ("h_dual", SMALL.inliers)):
        for line in level_lines(tiling, height_field(tiling, kind)):
            assert 1 <= line.level <= count
            assert line.cells


def test_unknown_height_kind(small_tilings: list[tuple[Tiling, float]]) -> None:
    with pytest.raises(ValueError, match="Unknown height kind"):
        height_field(small_tilings[0][0], "h3")  # type: ignore[arg-type]


@pytest.mark.parametrize(("kind", "extremes"), [("h", {0, 2 * SMALL.n}), ("h_dual", {0, SMALL.inliers})])
def test_height_boundary_rows(small_tilings: list[tuple[Tiling, float]], kind: str, extremes: set[int]) -> None:
    for tiling, _ in small_tilings:
        field = height_field(tiling, kind)  # type: ignore[arg-type]
        rows = [y for _, y in field.values]
        edges = {frozenset(field.row(min(rows)).values()), frozenset(field.row(max(rows)).values())}
        assert edges == {frozenset({value}) for value in extremes}


@pytest.mark.parametrize(("kind", "count"), [("h", 2 * SMALL.n), ("h_dual", SMALL.inliers)])
def test_one_level_line_per_level(small_tilings: list[tuple[Tiling, float]], kind: str, count: int) -> None:
    for tiling, _ in small_tilings:
        lines = level_lines(tiling, height_field(tiling, kind))  # type: ignore[arg-type]
        assert [line.level for line in lines] == list(range(1, count + 1))
        cells = [cell for line in lines for cell in line.cells]
        assert len(cells) == len(set(cells))


def test_red_particles_complement_blue(small_tilings: list[tuple[Tiling, float]]) -> None:
    region = build_region(SMALL)
    for tiling, _ in small_tilings:
        config = particles(tiling)
        for line in range(1, 2 * SMALL.n + 1):
            sites = [site for site, _ in region.line_sites(line)]
            assert not set(config.blue[line]) & set(config.red[line])
            assert sorted(config.blue[line] + config.red[line]) == sorted(sites)


def test_outlier_paths_carry_equal_dots_and_circles(small_tilings: list[tuple[Tiling, float]]) -> None:
    region = build_region(SMALL)
    even = {cell for line in range(2, 2 * SMALL.n + 1, 2) for _, cell in region.line_sites(line)}
    odd = {cell for line in range(1, 2 * SMALL.n + 1, 2) for _, cell in region.line_sites(line)}
    for tiling, _ in small_tilings:
        for line in level_lines(tiling, height_field(tiling, "h")):
            blue = [cell for cell in line.cells if tiling.domino_at(cell).blue]
            assert sum(cell in even for cell in blue) == SMALL.n
            assert sum(cell in odd for cell in blue) == SMALL.n
