"""Double Aztec diamond regions, domino tilings, height functions and particles."""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Literal

from double_aztec.errors import BudgetExceeded, InconsistentTiling, InvalidShape, InvalidTiling, OutOfRange
from double_aztec.types import ModelShape

logger = logging.getLogger(__name__)

Cell = tuple[int, int]
Vertex = tuple[int, int]
Edge = tuple[Vertex, Vertex]
HeightKind = Literal["h", "h_dual"]

DEFAULT_CELL_BUDGET = 40


def is_black(cell: Cell) -> bool:
    """Return whether a lattice square is black (i+j even)."""
    return (cell[0] + cell[1]) % 2 == 0


@dataclass(slots=True, frozen=True, order=True)
class Domino:
    """Two adjacent cells; first is the left or lower one."""

    first: Cell
    second: Cell

    def __post_init__(self) -> None:
        di: int = self.second[0] - self.first[0]
        dj: int = self.second[1] - self.first[1]
        if (di, dj) not in {(1, 0), (0, 1)}:
            raise InvalidTiling(f"cells {self.first} and {self.second} do not form a normalized domino")

    @classmethod
    def of(cls, one: Cell, other: Cell) -> "Domino":
        """Build a domino from two adjacent cells in any order."""
        first, second = sorted((one, other))
        return cls(first, second)

    @property
    def horizontal(self) -> bool:
        """Return whether the domino lies along a row."""
        return self.first[1] == self.second[1]

    @property
    def compass(self) -> str:
        """Return N, S, E or W from orientation and coloring."""
        if self.horizontal:
            return "S" if is_black(self.first) else "N"
        return "W" if is_black(self.first) else "E"

    @property
    def blue(self) -> bool:
        """Return whether the domino is of the first (dot-carrying) type."""
        return self.compass in {"S", "W"}

    @property
    def cells(self) -> tuple[Cell, Cell]:
        """Return both cells."""
        return self.first, self.second


@dataclass(slots=True, frozen=True)
class Region:
    """A set of lattice squares plus fixed extension dominoes outside the tiled part."""

    order: int
    cells: frozenset[Cell]
    shape: ModelShape | None = None
    extension: tuple[Domino, ...] = ()

    @property
    def is_double(self) -> bool:
        """Return whether this is a double diamond."""
        return self.shape is not None

    @property
    def extension_cells(self) -> frozenset[Cell]:
        """Return the cells covered by the fixed extension dominoes."""
        return frozenset(cell for domino in self.extension for cell in domino.cells)

    @property
    def all_cells(self) -> frozenset[Cell]:
        """Return tiled cells together with extension cells."""
        return self.cells | self.extension_cells

    def site_cell(self, line: int, site: int) -> Cell:
        """Return the square carrying site Y on oblique line ℓ."""
        shape: ModelShape = self._require_shape()
        if not 1 <= line <= 2 * shape.n:
            raise OutOfRange(f"line {line} outside 1..{2 * shape.n}")
        if abs(site) > shape.half_width:
            raise OutOfRange(f"site {site} outside [-{shape.half_width}, {shape.half_width}]")
        offset: int = line - shape.n - 1
        return offset - site, site - 1

    def line_sites(self, line: int) -> list[tuple[int, Cell]]:
        """Return (site, cell) pairs along one oblique line."""
        shape: ModelShape = self._require_shape()
        return [(site, self.site_cell(line, site)) for site in range(-shape.half_width, shape.half_width + 1)]

    def _require_shape(self) -> ModelShape:
        if self.shape is None:
            raise InvalidShape("oblique lines are defined on double diamonds only")
        return self.shape


def in_diamond_a(cell: Cell, n: int, m: int) -> bool:
    """Return membership in the upper diamond A."""
    i, j = cell
    return abs(2 * i + 1 + 2 * m) + abs(2 * j + 1 - 2 * m) <= 2 * n


def in_diamond_b(cell: Cell, n: int, m: int) -> bool:
    """Return membership in the lower diamond B."""
    i, j = cell
    return abs(2 * i + 1 - 2 * m) + abs(2 * j + 3 + 2 * m) <= 2 * n


def _diamond_cells(n: int, member: Callable[[Cell], bool], pad: int) -> set[Cell]:
    span: range = range(-n - pad, n + pad + 1)
    return {(i, j) for i in span for j in span if member((i, j))}


def _reflect(cell: Cell) -> Cell:
    return -cell[0] - 1, -cell[1] - 2


def _extension(n: int, m: int) -> tuple[Domino, ...]:
    """Return the horizontal dominoes completing every oblique line outside A∪B."""
    upper: list[Domino] = []
    for k in range(1, n + 1):
        row: int = m + n - k
        left: int = -m - k
        for step in range(1, n - k + 2):
            upper.append(Domino((left - 2 * step, row), (left - 2 * step + 1, row)))
    lower: list[Domino] = [Domino.of(_reflect(d.first), _reflect(d.second)) for d in upper]
    return tuple(sorted(upper + lower))


def build_region(shape: ModelShape) -> Region:
    """Construct the double diamond A∪B of type (n, m) with its line extension."""
    shape.require_overlap()
    n, m = shape.n, shape.m
    cells: set[Cell] = _diamond_cells(n, lambda c: in_diamond_a(c, n, m), 2 * m + 2)
    cells |= _diamond_cells(n, lambda c: in_diamond_b(c, n, m), 2 * m + 2)
    region = Region(order=n, cells=frozenset(cells), shape=shape, extension=_extension(n, m))
    _check_lines(region)
    return region


def _check_lines(region: Region) -> None:
    shape: ModelShape = region._require_shape()
    covered: frozenset[Cell] = region.all_cells
    if region.cells & region.extension_cells:
        raise InvalidShape("extension dominoes overlap the double diamond")
    for line in range(1, 2 * shape.n + 1):
        for site, cell in region.line_sites(line):
            if cell not in covered:
                raise InvalidShape(f"line {line} misses site {site} at square {cell}")
            if is_black(cell) != (line % 2 == 0):
                raise InvalidShape(f"line {line} crosses square {cell} of the wrong color")


def single_aztec_region(n: int) -> Region:
    """Construct the single Aztec diamond |i+½|+|j+½| <= n."""
    if n < 1:
        raise InvalidShape(f"single diamond order must be positive, got {n}")
    cells: set[Cell] = {
        (i, j) for i in range(-n, n) for j in range(-n, n) if abs(2 * i + 1) + abs(2 * j + 1) <= 2 * n
    }
    return Region(order=n, cells=frozenset(cells))


@dataclass(slots=True, frozen=True)
class Tiling:
    """A perfect domino matching of a region's tiled cells."""

    region: Region
    dominoes: tuple[Domino, ...]
    partner: Mapping[Cell, Cell] = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dominoes(cls, region: Region, dominoes: Iterable[Domino]) -> "Tiling":
        """Validate a matching and build the tiling."""
        ordered: tuple[Domino, ...] = tuple(sorted(dominoes))
        partner: dict[Cell, Cell] = {}
        for domino in ordered:
            for cell in domino.cells:
                if cell not in region.cells:
                    raise InvalidTiling(f"square {cell} lies outside the region")
                if cell in partner:
                    raise InvalidTiling(f"square {cell} is covered twice")
            partner[domino.first] = domino.second
            partner[domino.second] = domino.first
        missing: int = len(region.cells) - len(partner)
        if missing:
            raise InvalidTiling(f"{missing} squares are left uncovered")
        return cls(region=region, dominoes=ordered, partner=partner)

    @property
    def vertical_count(self) -> int:
        """Return the number of vertical dominoes."""
        return sum(1 for domino in self.dominoes if not domino.horizontal)

    def domino_at(self, cell: Cell) -> Domino:
        """Return the domino covering a cell, extension included."""
        other: Cell | None = self.partner.get(cell)
        if other is not None:
            return Domino.of(cell, other)
        for domino in self.region.extension:
            if cell in domino.cells:
                return domino
        raise OutOfRange(f"square {cell} is not covered")

    def full_partner(self) -> dict[Cell, Cell]:
        """Return the partner map including extension dominoes."""
        mapping: dict[Cell, Cell] = dict(self.partner)
        for domino in self.region.extension:
            mapping[domino.first] = domino.second
            mapping[domino.second] = domino.first
        return mapping


def tiling_weight(tiling: Tiling, a: float) -> float:
    """Return a^{#vertical dominoes}."""
    return a**tiling.vertical_count


def all_horizontal_tiling(region: Region) -> Tiling:
    """Pair every row from the left; each row of these regions has even contiguous length."""
    rows: dict[int, list[int]] = {}
    for i, j in region.cells:
        rows.setdefault(j, []).append(i)
    dominoes: list[Domino] = []
    for j, columns in rows.items():
        columns.sort()
        if len(columns) % 2 or columns[-1] - columns[0] + 1 != len(columns):
            raise InvalidTiling(f"row {j} cannot be tiled horizontally")
        dominoes.extend(Domino((i, j), (i + 1, j)) for i in columns[::2])
    return Tiling.from_dominoes(region, dominoes)


def enumerate_tilings(
    region: Region,
    order: Literal["ij", "ji"] = "ij",
    budget: int = DEFAULT_CELL_BUDGET,
) -> Iterator[Tiling]:
    """Yield every perfect matching once, by backtracking on the first uncovered cell."""
    if len(region.cells) > budget:
        raise BudgetExceeded(f"{len(region.cells)} squares exceed the enumeration budget {budget}")
    if order == "ij":
        cells: list[Cell] = sorted(region.cells)
    elif order == "ji":
        cells = sorted(region.cells, key=lambda cell: (cell[1], cell[0]))
    else:
        raise ValueError(f"Unknown enumeration order '{order}'. Available: ij, ji")
    covered: set[Cell] = set()
    chosen: list[Domino] = []

    def search(position: int) -> Iterator[Tiling]:
        while position < len(cells) and cells[position] in covered:
            position += 1
        if position == len(cells):
            yield Tiling.from_dominoes(region, chosen)
            return
        cell: Cell = cells[position]
        for other in ((cell[0] + 1, cell[1]), (cell[0], cell[1] + 1)):
            if other in region.cells and other not in covered:
                covered.update((cell, other))
                chosen.append(Domino(cell, other))
                yield from search(position + 1)
                chosen.pop()
                covered.difference_update((cell, other))

    yield from search(0)


def weighted_tilings(region: Region, a: float, budget: int = DEFAULT_CELL_BUDGET) -> list[tuple[Tiling, float]]:
    """Return every tiling with its normalized probability."""
    tilings: list[Tiling] = list(enumerate_tilings(region, budget=budget))
    weights: list[float] = [tiling_weight(tiling, a) for tiling in tilings]
    total: float = sum(weights)
    return [(tiling, weight / total) for tiling, weight in zip(tilings, weights)]


@dataclass(slots=True, frozen=True)
class HeightField:
    """Integer heights on the vertices of the extended region."""

    kind: HeightKind
    values: Mapping[Vertex, int]

    def at(self, vertex: Vertex) -> int:
        """Return the height at one vertex."""
        return self.values[vertex]

    def row(self, y: int) -> dict[int, int]:
        """Return x -> height along one horizontal vertex row."""
        return {x: h for (x, yy), h in self.values.items() if yy == y}


def _cell_edges(cell: Cell) -> tuple[Edge, Edge, Edge, Edge]:
    i, j = cell
    return (
        ((i, j), (i + 1, j)),
        ((i + 1, j), (i + 1, j + 1)),
        ((i, j + 1), (i + 1, j + 1)),
        ((i, j), (i, j + 1)),
    )


def _edge_cells(edge: Edge) -> tuple[Cell, Cell]:
    (x0, y0), (x1, _) = edge
    if x1 == x0 + 1:
        return (x0, y0 - 1), (x0, y0)
    return (x0 - 1, y0), (x0, y0)


def _increment(edge: Edge, internal: bool) -> int:
    """Return h(end) - h(start) for a rightward or upward unit edge."""
    (x0, y0), (x1, _) = edge
    even: bool = (x0 + y0) % 2 == 0
    if x1 == x0 + 1:
        if even:
            return -1 if internal else 0
        return 1 if internal else 0
    if even:
        return 0 if internal else -1
    return -1 if internal else 0


def _edge_graph(tiling: Tiling) -> dict[Edge, int]:
    partner: dict[Cell, Cell] = tiling.full_partner()
    increments: dict[Edge, int] = {}
    for cell in tiling.region.all_cells:
        for edge in _cell_edges(cell):
            if edge in increments:
                continue
            low, high = _edge_cells(edge)
            internal: bool = partner.get(low) == high
            increments[edge] = _increment(edge, internal)
    return increments


def height_field(tiling: Tiling, kind: HeightKind = "h", traversal: Literal["bfs", "dfs"] = "bfs") -> HeightField:
    """Integrate edge increments over a spanning tree and check every other edge."""
    shape: ModelShape = tiling.region._require_shape()
    increments: dict[Edge, int] = _edge_graph(tiling)
    neighbours: dict[Vertex, list[tuple[Vertex, int]]] = {}
    for (start, end), step in sorted(increments.items()):
        neighbours.setdefault(start, []).append((end, step))
        neighbours.setdefault(end, []).append((start, -step))
    top: int = max(y for _, y in neighbours)
    anchor: Vertex = min(vertex for vertex in neighbours if vertex[1] == top)
    heights: dict[Vertex, int] = {anchor: 0}
    frontier: deque[Vertex] = deque([anchor])
    while frontier:
        vertex: Vertex = frontier.popleft() if traversal == "bfs" else frontier.pop()
        for other, step in neighbours[vertex]:
            if other not in heights:
                heights[other] = heights[vertex] + step
                frontier.append(other)
    for (start, end), step in increments.items():
        if heights[end] - heights[start] != step:
            raise InconsistentTiling(f"height increments do not close on edge {start}->{end}")
    if kind == "h_dual":
        offset: int = shape.m - shape.n + 1
        heights = {vertex: h + vertex[1] + offset for vertex, h in heights.items()}
    elif kind != "h":
        raise ValueError(f"Unknown height kind '{kind}'. Available: h, h_dual")
    return HeightField(kind=kind, values=heights)


@dataclass(slots=True, frozen=True)
class LevelLine:
    """The cells crossed by the level set at height level-½, in walking order."""

    level: int
    cells: tuple[Cell, ...]


def level_lines(tiling: Tiling, heights: HeightField) -> list[LevelLine]:
    """Return the outlier (h) or inlier (h̃) level lines, one walk per boundary-to-boundary component."""
    shape: ModelShape = tiling.region._require_shape()
    count: int = 2 * shape.n if heights.kind == "h" else shape.inliers
    region_cells: frozenset[Cell] = tiling.region.all_cells
    lines: list[LevelLine] = []
    for level in range(1, count + 1):
        pair: set[int] = {level - 1, level}

        def crossing(edge: Edge) -> bool:
            return {heights.at(edge[0]), heights.at(edge[1])} == pair

        by_cell: dict[Cell, list[Edge]] = {}
        for cell in region_cells:
            edges: list[Edge] = [edge for edge in _cell_edges(cell) if crossing(edge)]
            if edges:
                by_cell[cell] = edges
        boundary: list[Edge] = sorted(
            {
                edge
                for edges in by_cell.values()
                for edge in edges
                if sum(side in region_cells for side in _edge_cells(edge)) == 1
            },
            key=lambda edge: (edge[0][0] + edge[1][0], edge[0][1] + edge[1][1]),
        )
        used: set[Edge] = set()
        for start in boundary:
            if start in used:
                continue
            used.add(start)
            cell: Cell = next(side for side in _edge_cells(start) if side in region_cells)
            path: list[Cell] = []
            edge: Edge = start
            while True:
                path.append(cell)
                exits: list[Edge] = [other for other in by_cell[cell] if other != edge]
                if len(exits) != 1:
                    raise InconsistentTiling(f"level {level} branches inside square {cell}")
                edge = exits[0]
                used.add(edge)
                low, high = _edge_cells(edge)
                following: Cell = high if low == cell else low
                if following not in region_cells:
                    break
                cell = following
            lines.append(LevelLine(level=level, cells=tuple(path)))
    return lines


@dataclass(slots=True, frozen=True)
class ParticleConfig:
    """Blue and red particle sites per oblique line: dots on even lines, circles on odd lines."""

    shape: ModelShape
    blue: Mapping[int, tuple[int, ...]]
    red: Mapping[int, tuple[int, ...]]

    def dots(self, line: int) -> tuple[int, ...]:
        """Return blue dot sites on an even line."""
        if line % 2:
            raise OutOfRange(f"dots live on even lines, got {line}")
        return self.blue[line]

    def circles(self, line: int) -> tuple[int, ...]:
        """Return blue circle sites on an odd line."""
        if line % 2 == 0:
            raise OutOfRange(f"circles live on odd lines, got {line}")
        return self.blue[line]


def particles(tiling: Tiling) -> ParticleConfig:
    """Read blue/red particles off every oblique line and check the even-line counts."""
    region: Region = tiling.region
    shape: ModelShape = region._require_shape()
    blue: dict[int, tuple[int, ...]] = {}
    red: dict[int, tuple[int, ...]] = {}
    for line in range(1, 2 * shape.n + 1):
        sites: list[tuple[int, Cell]] = region.line_sites(line)
        blue[line] = tuple(site for site, cell in sites if tiling.domino_at(cell).blue)
        red[line] = tuple(site for site, cell in sites if not tiling.domino_at(cell).blue)
        if line % 2 == 0 and (len(blue[line]) != 2 * shape.n or len(red[line]) != shape.inliers):
            raise InconsistentTiling(
                f"line {line} carries {len(blue[line])} blue and {len(red[line])} red dots"
            )
    return ParticleConfig(shape=shape, blue=blue, red=red)


def empirical_correlations(weighted: Iterable[tuple[Tiling, float]], line: int, positions: Iterable[int]) -> float:
    """Return the weighted probability that every listed site carries a blue dot."""
    wanted: tuple[int, ...] = tuple(positions)
    total: float = 0.0
    hit: float = 0.0
    for tiling, weight in weighted:
        total += weight
        if not wanted:
            hit += weight
            continue
        cells: list[Cell] = [tiling.region.site_cell(line, site) for site in wanted]
        if all(tiling.domino_at(cell).blue for cell in cells):
            hit += weight
    return hit / total if total else 0.0


def empirical_gap(weighted: Iterable[tuple[Tiling, float]], windows: Mapping[int, Iterable[int]]) -> float:
    """Return the weighted probability that no listed (line, site) carries a blue dot."""
    wanted: dict[int, tuple[int, ...]] = {line: tuple(sites) for line, sites in windows.items()}
    total: float = 0.0
    hit: float = 0.0
    for tiling, weight in weighted:
        total += weight
        region: Region = tiling.region
        if not any(
            tiling.domino_at(region.site_cell(line, site)).blue for line, sites in wanted.items() for site in sites
        ):
            hit += weight
    return hit / total if total else 0.0


@dataclass(slots=True)
class TransferCounter:
    """Exact weighted counting on a region by a broken-profile sweep over its squares."""

    region: Region
    a: float
    logger: logging.Logger = logging.getLogger(__name__)

    def weight(self, constraints: Mapping[Cell, bool] | None = None) -> float:
        """Return the total weight of tilings whose squares meet the blue/red constraints."""
        required: dict[Cell, bool] = dict(constraints or {})
        extension: frozenset[Cell] = self.region.extension_cells
        for cell, blue in list(required.items()):
            if cell in extension:
                if not blue:
                    return 0.0
                del required[cell]
            elif cell not in self.region.cells:
                raise OutOfRange(f"square {cell} lies outside the region")
        states: dict[frozenset[Cell], float] = {frozenset(): 1.0}
        for cell in sorted(self.region.cells):
            black: bool = is_black(cell)
            wanted: bool | None = required.get(cell)
            updated: dict[frozenset[Cell], float] = {}
            for state, value in states.items():
                if cell in state:
                    if wanted is not None and wanted != (not black):
                        continue
                    key: frozenset[Cell] = state - {cell}
                    updated[key] = updated.get(key, 0.0) + value
                    continue
                if wanted is not None and wanted != black:
                    continue
                for other, factor in (((cell[0] + 1, cell[1]), 1.0), ((cell[0], cell[1] + 1), self.a)):
                    if other in self.region.cells and other not in state:
                        key = state | {other}
                        updated[key] = updated.get(key, 0.0) + value * factor
            states = updated
        self.logger.debug("Transfer sweep over %d squares finished", len(self.region.cells))
        return states.get(frozenset(), 0.0)

    def partition_function(self) -> float:
        """Return Σ a^{#vertical} over all tilings."""
        return self.weight()

    def probability(self, constraints: Mapping[Cell, bool]) -> float:
        """Return the probability of the blue/red constraints."""
        return self.weight(constraints) / self.partition_function()

    def gap_probability(self, windows: Mapping[int, Iterable[int]]) -> float:
        """Return P(no blue dot at any listed (line, site))."""
        constraints: dict[Cell, bool] = {
            self.region.site_cell(line, site): False for line, sites in windows.items() for site in sites
        }
        return self.probability(constraints)

    def correlation(self, line: int, positions: Iterable[int]) -> float:
        """Return P(every listed site on the line carries a blue dot)."""
        return self.probability({self.region.site_cell(line, site): True for site in positions})
