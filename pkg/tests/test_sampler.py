from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from double_aztec.config import ChainConfig
from double_aztec.errors import OutOfRange
from double_aztec.geometry import (
    all_horizontal_tiling,
    build_region,
    single_aztec_region,
    weighted_tilings,
)
from double_aztec.sampler import (
    FlipChain,
    FlipMove,
    TilingSampler,
    apply_flip,
    block_anchors,
    chain_seeds,
    estimate,
    list_flips,
    mcmc_step,
    observe_gap,
    observe_vertical_fraction,
    shuffle_single_aztec,
)
from double_aztec.types import ModelShape


def test_single_flip_on_order_one() -> None:
    tiling = all_horizontal_tiling(single_aztec_region(1))
    moves = list_flips(tiling)
    assert moves == [FlipMove((-1, -1), to_vertical=True)]
    flipped = apply_flip(tiling, moves[0])
    assert flipped.vertical_count == 2
    assert apply_flip(flipped, moves[0].reverse()).dominoes == tiling.dominoes
    with pytest.raises(OutOfRange):
        apply_flip(flipped, moves[0])


def test_block_anchors_of_order_two() -> None:
    assert block_anchors(single_aztec_region(2)) == [(-2, -1), (-1, -2), (-1, -1), (-1, 0), (0, -1)]


def test_chain_keeps_valid_tilings(rng: np.random.Generator) -> None:
    region = build_region(ModelShape(a=0.5, n=4, m=1))
    chain = FlipChain.start(all_horizontal_tiling(region), 0.5, rng)
    chain.advance(2000)
    tiling = chain.tiling()
    assert tiling.vertical_count == chain.vertical
    assert chain.proposed == 2000
    assert 0.0 < chain.acceptance_rate <= 1.0


def test_mcmc_step_returns_tiling(rng: np.random.Generator) -> None:
    tiling = all_horizontal_tiling(single_aztec_region(2))
    stepped = mcmc_step(tiling, 0.5, rng)
    assert len(stepped.dominoes) == len(tiling.dominoes)


def test_chain_matches_enumeration(rng: np.random.Generator) -> None:
    region = single_aztec_region(2)
    exact = weighted_tilings(region, 0.5)
    index = {tiling.dominoes: k for k, (tiling, _) in enumerate(exact)}
    chain = FlipChain.start(all_horizontal_tiling(region), 0.5, rng)
    chain.advance(1000)
    counts: Counter[int] = Counter()
    samples = 10000
    for _ in range(samples):
        chain.advance(10)
        counts[index[chain.tiling().dominoes]] += 1
    for k, (_, probability) in enumerate(exact):
        assert counts[k] / samples == pytest.approx(probability, abs=0.04)


def test_shuffle_sizes(rng: np.random.Generator) -> None:
    for n in (1, 2, 3, 5):
        tiling = shuffle_single_aztec(n, 0.5, rng)
        assert len(tiling.dominoes) == n * (n + 1)


def test_shuffle_order_one_vertical_rate(rng: np.random.Generator) -> None:
    samples = 10000
    vertical = sum(shuffle_single_aztec(1, 0.5, rng).vertical_count > 0 for _ in range(samples))
    expected = 0.25 / 1.25
    sigma = (expected * (1.0 - expected) / samples) ** 0.5
    assert abs(vertical / samples - expected) < 3.5 * sigma


def test_shuffle_matches_enumeration(rng: np.random.Generator) -> None:
    exact = weighted_tilings(single_aztec_region(2), 0.5)
    index = {tiling.dominoes: k for k, (tiling, _) in enumerate(exact)}
    samples = 4000
    counts = Counter(index[shuffle_single_aztec(2, 0.5, rng).dominoes] for _ in range(samples))
    for k, (_, probability) in enumerate(exact):
        assert counts[k] / samples == pytest.approx(probability, abs=0.03)


def test_estimate() -> None:
    constant = estimate(np.full(100, 0.25))
    assert (constant.mean, constant.stderr, constant.samples) == (0.25, 0.0, 100)
    assert estimate([1.0]).stderr == 0.0
    with pytest.raises(OutOfRange):
        estimate([])


def test_chain_seeds_are_reproducible() -> None:
    config = ChainConfig(seed=5, chains=3)
    first = [np.random.default_rng(seed).integers(1000) for seed in chain_seeds(config)]
    second = [np.random.default_rng(seed).integers(1000) for seed in chain_seeds(config)]
    assert first == second
    assert len(first) == 3


def test_sampler_records_observables() -> None:
    region = build_region(ModelShape(a=0.5, n=2, m=0))
    config = ChainConfig(seed=3, burn_in=200, samples=50, thinning=5, chains=2)
    sampler = TilingSampler(all_horizontal_tiling(region), 0.5, config)
    streams = sampler.run([observe_vertical_fraction, observe_gap({2: [0]})])
    assert [stream.shape for stream in streams] == [(50, 2), (50, 2)]
    for stream in streams:
        assert np.all((stream >= 0.0) & (stream <= 1.0))
