"""Flip-chain sampling of double-diamond tilings and exact shuffling of single diamonds."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from double_aztec.config import ChainConfig
from double_aztec.errors import InconsistentTiling, OutOfRange
from double_aztec.geometry import Cell, Domino, Region, Tiling, is_black, particles, single_aztec_region
from double_aztec.types import Estimate

logger = logging.getLogger(__name__)

DEBUG_CHECK_EVERY = 1000
DEFAULT_BATCHES = 20


@dataclass(slots=True, frozen=True)
class FlipMove:
    """A 2×2 block with lower-left cell `anchor` covered by two parallel dominoes."""

    anchor: Cell
    to_vertical: bool

    @property
    def block(self) -> tuple[Cell, Cell, Cell, Cell]:
        i, j = self.anchor
        return (i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)

    def reverse(self) -> "FlipMove":
        """Return the move that undoes this one."""
        return FlipMove(self.anchor, not self.to_vertical)

    @property
    def vertical_change(self) -> int:
        return 2 if self.to_vertical else -2


def _block_state(partner: dict[Cell, Cell], anchor: Cell) -> bool | None:
    """Return True for a vertical pair, False for a horizontal pair, None otherwise."""
    i, j = anchor
    if partner.get((i, j)) == (i + 1, j) and partner.get((i, j + 1)) == (i + 1, j + 1):
        return False
    if partner.get((i, j)) == (i, j + 1) and partner.get((i + 1, j)) == (i + 1, j + 1):
        return True
    return None


def block_anchors(region: Region) -> list[Cell]:
    """Return lower-left corners of every 2×2 block inside the tiled cells."""
    cells = region.cells
    return sorted(
        (i, j)
        for i, j in cells
        if (i + 1, j) in cells and (i, j + 1) in cells and (i + 1, j + 1) in cells
    )


def list_flips(tiling: Tiling) -> list[FlipMove]:
    """Return every available flip, in anchor order."""
    partner: dict[Cell, Cell] = dict(tiling.partner)
    moves: list[FlipMove] = []
    for anchor in block_anchors(tiling.region):
        state: bool | None = _block_state(partner, anchor)
        if state is not None:
            moves.append(FlipMove(anchor, to_vertical=not state))
    return moves


def _flip_in_place(partner: dict[Cell, Cell], move: FlipMove) -> None:
    bottom_left, bottom_right, top_left, top_right = move.block
    if move.to_vertical:
        pairs = ((bottom_left, top_left), (bottom_right, top_right))
    else:
        pairs = ((bottom_left, bottom_right), (top_left, top_right))
    for one, other in pairs:
        partner[one] = other
        partner[other] = one


def apply_flip(tiling: Tiling, move: FlipMove) -> Tiling:
    """Return the tiling with one 2×2 block rotated."""
    partner: dict[Cell, Cell] = dict(tiling.partner)
    if _block_state(partner, move.anchor) != (not move.to_vertical):
        raise OutOfRange(f"no flippable pair at {move.anchor} for this move")
    _flip_in_place(partner, move)
    return Tiling.from_dominoes(tiling.region, _dominoes(partner))


def _dominoes(partner: dict[Cell, Cell]) -> list[Domino]:
    return [Domino(cell, other) for cell, other in partner.items() if cell < other]


@dataclass(slots=True)
class FlipChain:
    """Mutable Metropolis state on the tiling graph of one region.

    A proposal picks one 2×2 block uniformly; if the block holds a parallel pair it is rotated
    with probability min(1, a^{Δ#vertical}). The proposal is symmetric, so the a-weighted
    measure is stationary.
    """

    region: Region
    a: float
    rng: np.random.Generator
    partner: dict[Cell, Cell]
    vertical: int
    anchors: list[Cell] = field(default_factory=list)
    proposed: int = 0
    accepted: int = 0

    @classmethod
    def start(cls, tiling: Tiling, a: float, rng: np.random.Generator) -> "FlipChain":
        """Begin a chain at a given tiling."""
        anchors: list[Cell] = block_anchors(tiling.region)
        if not anchors:
            raise OutOfRange("region has no 2×2 blocks to flip")
        return cls(
            region=tiling.region,
            a=a,
            rng=rng,
            partner=dict(tiling.partner),
            vertical=tiling.vertical_count,
            anchors=anchors,
        )

    def step(self) -> bool:
        """Propose one flip and return whether the tiling changed."""
        self.proposed += 1
        anchor: Cell = self.anchors[int(self.rng.integers(len(self.anchors)))]
        state: bool | None = _block_state(self.partner, anchor)
        if state is None:
            return False
        move = FlipMove(anchor, to_vertical=not state)
        ratio: float = self.a**move.vertical_change
        if ratio < 1.0 and self.rng.random() >= ratio:
            return False
        _flip_in_place(self.partner, move)
        self.vertical += move.vertical_change
        self.accepted += 1
        return True

    def advance(self, steps: int) -> None:
        for index in range(steps):
            self.step()
            if (index + 1) % DEBUG_CHECK_EVERY == 0 and logger.isEnabledFor(logging.DEBUG):
                self.tiling()

    def tiling(self) -> Tiling:
        """Return the current state as a validated tiling."""
        tiling: Tiling = Tiling.from_dominoes(self.region, _dominoes(self.partner))
        if tiling.vertical_count != self.vertical:
            raise InconsistentTiling(
                f"vertical counter {self.vertical} disagrees with tiling ({tiling.vertical_count})"
            )
        return tiling

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


def mcmc_step(tiling: Tiling, a: float, rng: np.random.Generator) -> Tiling:
    """Perform one Metropolis proposal and return the resulting tiling."""
    chain: FlipChain = FlipChain.start(tiling, a, rng)
    return chain.tiling() if chain.step() else tiling


def _moving_direction(domino: Domino, order: int) -> str:
    """Return the sliding direction of a domino inside the order-`order` diamond."""
    black: bool = is_black(domino.first) != (order % 2 == 0)
    if domino.horizontal:
        return "S" if black else "N"
    return "W" if black else "E"


_SHIFT: dict[str, Cell] = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}


def _diamond_cells(order: int) -> list[Cell]:
    return [
        (i, j)
        for i in range(-order, order)
        for j in range(-order, order)
        if abs(2 * i + 1) + abs(2 * j + 1) <= 2 * order
    ]


def _shuffle_step(dominoes: list[Domino], order: int, a: float, rng: np.random.Generator) -> list[Domino]:
    """Grow a tiling of the order-`order` diamond into one of order+1."""
    direction: dict[Domino, str] = {domino: _moving_direction(domino, order) for domino in dominoes}
    by_first: dict[Cell, Domino] = {domino.first: domino for domino in dominoes}
    doomed: set[Domino] = set()
    for domino, heading in direction.items():
        i, j = domino.first
        if heading == "N":
            partner_domino = by_first.get((i, j + 1))
            if partner_domino is not None and direction[partner_domino] == "S" and partner_domino.horizontal:
                doomed.update((domino, partner_domino))
        elif heading == "E":
            partner_domino = by_first.get((i + 1, j))
            if partner_domino is not None and direction[partner_domino] == "W" and not partner_domino.horizontal:
                doomed.update((domino, partner_domino))

    moved: list[Domino] = []
    covered: set[Cell] = set()
    for domino in dominoes:
        if domino in doomed:
            continue
        di, dj = _SHIFT[direction[domino]]
        shifted = Domino((domino.first[0] + di, domino.first[1] + dj), (domino.second[0] + di, domino.second[1] + dj))
        moved.append(shifted)
        covered.update(shifted.cells)

    vertical_probability: float = a * a / (1.0 + a * a)
    for cell in _diamond_cells(order + 1):
        if cell in covered:
            continue
        i, j = cell
        block: tuple[Cell, ...] = ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1))
        if any(corner in covered for corner in block[1:]):
            raise InconsistentTiling(f"empty squares at {cell} do not form a 2×2 block")
        if rng.random() < vertical_probability:
            created = [Domino((i, j), (i, j + 1)), Domino((i + 1, j), (i + 1, j + 1))]
        else:
            created = [Domino((i, j), (i + 1, j)), Domino((i, j + 1), (i + 1, j + 1))]
        moved.extend(created)
        covered.update(block)
    return moved


def shuffle_single_aztec(n: int, a: float, rng: np.random.Generator) -> Tiling:
    """Draw an exact sample of the a-weighted measure on the order-n single diamond."""
    region: Region = single_aztec_region(n)
    dominoes: list[Domino] = []
    for order in range(n):
        dominoes = _shuffle_step(dominoes, order, a, rng)
    return Tiling.from_dominoes(region, dominoes)


def chain_seeds(config: ChainConfig) -> list[np.random.SeedSequence]:
    """Derive one independent seed per chain from the master seed."""
    return np.random.SeedSequence(config.seed).spawn(config.chains)


@dataclass(slots=True)
class TilingSampler:
    """Runs independent flip chains and records observables on thinned samples."""

    start: Tiling
    a: float
    config: ChainConfig = field(default_factory=ChainConfig)
    progress: bool = False
    logger: logging.Logger = logging.getLogger(__name__)

    def run(
        self,
        observables: Sequence[Callable[[Tiling], float]],
        on_sample: Callable[[int, Tiling], None] | None = None,
    ) -> list[np.ndarray]:
        """Return per-chain arrays of shape (samples, len(observables)), in chain order."""
        burn_in: int = self.config.burn_in_for(self.start.region.order)
        outputs: list[np.ndarray] = []
        for index, seed in enumerate(chain_seeds(self.config)):
            chain: FlipChain = FlipChain.start(self.start, self.a, np.random.default_rng(seed))
            chain.advance(burn_in)
            values = np.empty((self.config.samples, len(observables)))
            for sample in tqdm(
                range(self.config.samples),
                desc=f"chain {index}",
                disable=not self.progress,
                leave=False,
            ):
                chain.advance(self.config.thinning)
                tiling: Tiling = chain.tiling()
                values[sample] = [observable(tiling) for observable in observables]
                if on_sample is not None:
                    on_sample(index, tiling)
            self.logger.info(
                "Chain %d finished: %d proposals, acceptance %.3f.",
                index,
                chain.proposed,
                chain.acceptance_rate,
            )
            outputs.append(values)
        return outputs

    def estimate(self, observable: Callable[[Tiling], float]) -> Estimate:
        """Run the chains for one observable and summarize it."""
        streams: list[np.ndarray] = self.run([observable])
        return estimate(np.concatenate([stream[:, 0] for stream in streams]))


def estimate(samples: Iterable[float] | np.ndarray, batches: int = DEFAULT_BATCHES) -> Estimate:
    """Return the sample mean with a batch-means standard error."""
    values = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    count: int = values.size
    if count == 0:
        raise OutOfRange("cannot estimate from an empty sample stream")
    mean: float = float(values.mean())
    batches = min(batches, count)
    if batches < 2:
        return Estimate(mean=mean, stderr=0.0, samples=count)
    size: int = count // batches
    means = values[: size * batches].reshape(batches, size).mean(axis=1)
    stderr: float = float(means.std(ddof=1) / np.sqrt(batches))
    return Estimate(mean=mean, stderr=stderr, samples=count)


def observe_vertical_fraction(tiling: Tiling) -> float:
    """Return the share of vertical dominoes."""
    return tiling.vertical_count / len(tiling.dominoes)


def observe_gap(windows: dict[int, Iterable[int]]) -> Callable[[Tiling], float]:
    """Return the indicator that no dot sits in any of the line windows."""
    frozen: dict[int, frozenset[int]] = {line: frozenset(sites) for line, sites in windows.items()}

    def observable(tiling: Tiling) -> float:
        config = particles(tiling)
        return float(all(not (set(config.dots(line)) & sites) for line, sites in frozen.items()))

    return observable


def observe_dots(line: int, positions: Iterable[int]) -> Callable[[Tiling], float]:
    """Return the indicator that dots sit at every listed site of one line."""
    wanted: frozenset[int] = frozenset(positions)

    def observable(tiling: Tiling) -> float:
        return float(wanted <= set(particles(tiling).dots(line)))

    return observable
