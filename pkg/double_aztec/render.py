"""SVG rendering of domino tilings with compass colors and arctic-ellipse overlays."""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import cairocffi as cairo

from double_aztec.config import RenderSpec
from double_aztec.errors import ConfigError
from double_aztec.geometry import Cell, Domino, Region, Tiling, height_field, level_lines

logger = logging.getLogger(__name__)

EDGE_COLOR = (0.0, 0.0, 0.0)
EXTENSION_ALPHA = 0.35
ELLIPSE_COLOR = (0.1, 0.1, 0.1)
LEVEL_LINE_COLOR = (0.0, 0.0, 0.0)
LINE_WIDTH = 0.08
MARGIN_CELLS = 1


def hex_to_rgb(color: str) -> tuple[float, float, float]:
    """Parse '#rrggbb' into a cairo RGB triple."""
    value: str = color.strip().lstrip("#")
    if len(value) != 6:
        raise ConfigError(f"Malformed color '{color}', expected #rrggbb")
    try:
        return tuple(int(value[k : k + 2], 16) / 255.0 for k in (0, 2, 4))  # type: ignore[return-value]
    except ValueError as error:
        raise ConfigError(f"Malformed color '{color}', expected #rrggbb") from error


@dataclass(slots=True, frozen=True)
class ArcticEllipse:
    """Axis-aligned ellipse in lattice coordinates."""

    center: tuple[float, float]
    semi_x: float
    semi_y: float


def ellipse_weights(a: float) -> tuple[float, float]:
    """Return (p, q) with q = a/(a+a⁻¹) and p = 1-q."""
    q: float = a / (a + 1.0 / a)
    return 1.0 - q, q


def arctic_ellipses(region: Region, a: float) -> list[ArcticEllipse]:
    """Return one limiting ellipse per diamond: semi-axes n√p and n√q about the diamond center."""
    p, q = ellipse_weights(a)
    n: int = region.order
    if region.shape is None:
        centers: list[tuple[float, float]] = [(0.0, 0.0)]
    else:
        m: int = region.shape.m
        centers = [(-float(m), float(m)), (float(m), -float(m) - 1.0)]
    return [ArcticEllipse(center=center, semi_x=n * math.sqrt(p), semi_y=n * math.sqrt(q)) for center in centers]


def _bounds(region: Region) -> tuple[int, int, int, int]:
    cells: frozenset[Cell] = region.all_cells
    xs: list[int] = [i for i, _ in cells]
    ys: list[int] = [j for _, j in cells]
    return min(xs) - MARGIN_CELLS, min(ys) - MARGIN_CELLS, max(xs) + 1 + MARGIN_CELLS, max(ys) + 1 + MARGIN_CELLS


@dataclass(slots=True)
class TilingRenderer:
    """Draws a tiling onto a cairo SVG surface; lattice y points up."""

    spec: RenderSpec
    a: float | None = None
    logger: logging.Logger = logging.getLogger(__name__)

    def _domino(self, ctx: cairo.Context, domino: Domino, alpha: float) -> None:
        (i0, j0), (i1, j1) = domino.cells
        ctx.rectangle(i0, j0, i1 - i0 + 1, j1 - j0 + 1)
        red, green, blue = hex_to_rgb(self.spec.colors[domino.compass])
        ctx.set_source_rgba(red, green, blue, alpha)
        ctx.fill_preserve()
        ctx.set_source_rgba(*EDGE_COLOR, alpha)
        ctx.stroke()

    def _ellipse(self, ctx: cairo.Context, ellipse: ArcticEllipse) -> None:
        ctx.save()
        ctx.translate(*ellipse.center)
        ctx.scale(ellipse.semi_x, ellipse.semi_y)
        ctx.arc(0.0, 0.0, 1.0, 0.0, 2.0 * math.pi)
        ctx.restore()
        ctx.set_source_rgb(*ELLIPSE_COLOR)
        ctx.set_dash([0.3, 0.2])
        ctx.stroke()
        ctx.set_dash([])

    def _level_lines(self, ctx: cairo.Context, tiling: Tiling) -> None:
        for kind in ("h", "h_dual"):
            for line in level_lines(tiling, height_field(tiling, kind)):
                first, *rest = line.cells
                ctx.move_to(first[0] + 0.5, first[1] + 0.5)
                for i, j in rest:
                    ctx.line_to(i + 0.5, j + 0.5)
                ctx.set_source_rgb(*LEVEL_LINE_COLOR)
                ctx.stroke()

    def _heights(self, ctx: cairo.Context, tiling: Tiling) -> None:
        heights = height_field(tiling, "h")
        ctx.set_source_rgb(*EDGE_COLOR)
        ctx.set_font_size(0.35)
        for (x, y), value in sorted(heights.values.items()):
            ctx.save()
            ctx.move_to(x + 0.05, y + 0.05)
            ctx.scale(1.0, -1.0)
            ctx.show_text(str(value))
            ctx.restore()

    def draw(self, target: io.BufferedIOBase | io.BytesIO, tiling: Tiling) -> None:
        """Render the tiling as SVG into a binary stream."""
        region: Region = tiling.region
        left, bottom, right, top = _bounds(region)
        px: int = self.spec.cell_px
        surface = cairo.SVGSurface(target, (right - left) * px, (top - bottom) * px)
        ctx = cairo.Context(surface)
        ctx.scale(px, -px)
        ctx.translate(-left, -top)
        ctx.set_line_width(LINE_WIDTH)
        for domino in region.extension:
            self._domino(ctx, domino, EXTENSION_ALPHA)
        for domino in tiling.dominoes:
            self._domino(ctx, domino, 1.0)
        if region.is_double:
            if self.spec.show_level_lines:
                self._level_lines(ctx, tiling)
            if self.spec.show_heights:
                self._heights(ctx, tiling)
        elif self.spec.show_level_lines or self.spec.show_heights:
            self.logger.info("Heights and level lines are drawn on double diamonds only.")
        if self.spec.show_ellipses and self.a is not None:
            for ellipse in arctic_ellipses(region, self.a):
                self._ellipse(ctx, ellipse)
        surface.finish()


def render_svg(tiling: Tiling, spec: RenderSpec | None = None, a: float | None = None) -> bytes:
    """Return the SVG document of a tiling; the ellipse overlay needs the weight a."""
    buffer = io.BytesIO()
    TilingRenderer(spec or RenderSpec(), a).draw(buffer, tiling)
    return buffer.getvalue()


def write_svg(path: Path, tiling: Tiling, spec: RenderSpec | None = None, a: float | None = None) -> Path:
    """Render a tiling to an SVG file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(render_svg(tiling, spec, a))
    logger.info("Wrote %s", path)
    return path
