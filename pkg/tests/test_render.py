from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

pytest.importorskip("cairocffi")

from double_aztec.config import RenderSpec  # noqa: E402
from double_aztec.errors import ConfigError  # noqa: E402
from double_aztec.geometry import build_region, single_aztec_region, weighted_tilings  # noqa: E402
from double_aztec.render import arctic_ellipses, ellipse_weights, hex_to_rgb, render_svg, write_svg  # noqa: E402
from double_aztec.sampler import shuffle_single_aztec  # noqa: E402
from double_aztec.types import ModelShape  # noqa: E402


def test_hex_to_rgb() -> None:
    assert hex_to_rgb("#ff0000") == (1.0, 0.0, 0.0)
    for bad in ("#ff00", "#gg0000"):
        with pytest.raises(ConfigError):
            hex_to_rgb(bad)


def test_ellipse_weights() -> None:
    p, q = ellipse_weights(0.5)
    assert (p, q) == pytest.approx((0.8, 0.2))


def test_ellipses_per_diamond() -> None:
    (single,) = arctic_ellipses(single_aztec_region(4), 1.0)
    assert single.center == (0.0, 0.0)
    assert single.semi_x == pytest.approx(4.0 * math.sqrt(0.5))
    upper, lower = arctic_ellipses(build_region(ModelShape(a=0.5, n=4, m=1)), 0.5)
    assert (upper.center, lower.center) == ((-1.0, 1.0), (1.0, -2.0))
    assert (upper.semi_x, upper.semi_y) == pytest.approx((4.0 * math.sqrt(0.8), 4.0 * math.sqrt(0.2)))


def test_render_single(tmp_path: Path) -> None:
    tiling = shuffle_single_aztec(4, 0.5, np.random.default_rng(2))
    document = render_svg(tiling, a=0.5)
    assert document.lstrip().startswith(b"<?xml")
    assert b"<svg" in document
    path = write_svg(tmp_path / "single.svg", tiling, a=0.5)
    assert path.read_bytes().lstrip().startswith(b"<?xml")


def test_render_double_with_overlays() -> None:
    tiling, _ = weighted_tilings(build_region(ModelShape(a=0.5, n=2, m=0)), 0.5)[0]
    spec = RenderSpec(show_heights=True, show_level_lines=True)
    assert b"<svg" in render_svg(tiling, spec, a=0.5)
