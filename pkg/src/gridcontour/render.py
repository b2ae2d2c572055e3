"""Heat-map rendering to standalone SVG.

One ``<rect>`` per cell. Continuous maps interpolate the colour scale over
the value range; discrete maps colour each cell by the class its value falls
in, with a value equal to a level joining the class above it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .grid import Grid, GridError
from .levels import ContourLevels

__all__ = [
    "ColorScale",
    "HEAT",
    "RED_BLUE",
    "scale_by_name",
    "class_boundaries",
    "classify",
    "class_colors",
    "render_continuous",
    "render_discrete",
]


class ScaleKind(str, enum.Enum):
    SEQUENTIAL_HEAT = "SequentialHeat"
    DIVERGING_RED_BLUE = "DivergingRedBlue"


@dataclass(frozen=True)
class ColorScale:
    kind: ScaleKind
    anchors: tuple[tuple[float, tuple[float, float, float]], ...]

    def __post_init__(self):
        pos = [a[0] for a in self.anchors]
        if len(pos) < 2 or pos[0] != 0.0 or pos[-1] != 1.0:
            raise ValueError("anchor positions must start at 0 and end at 1")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("anchor positions must be strictly increasing")

    def rgb(self, t) -> np.ndarray:
        """RGB in [0, 1] at positions ``t`` (clipped to [0, 1]); shape ``(..., 3)``."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        pos = np.array([a[0] for a in self.anchors])
        cols = np.array([a[1] for a in self.anchors])
        return np.stack([np.interp(t, pos, cols[:, c]) for c in range(3)], axis=-1)

    def hex(self, t) -> list[str]:
        rgb = np.atleast_2d(self.rgb(t))
        return [_hex(c) for c in rgb]


def _hex(rgb) -> str:
    r, g, b = (int(round(float(c) * 255)) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


HEAT = ColorScale(
    ScaleKind.SEQUENTIAL_HEAT,
    ((0.0, (1.0, 1.0, 0.2)), (0.5, (1.0, 0.55, 0.0)), (1.0, (0.84, 0.0, 0.0))),
)
RED_BLUE = ColorScale(
    ScaleKind.DIVERGING_RED_BLUE,
    ((0.0, (0.02, 0.19, 0.38)), (0.5, (0.85, 0.85, 0.85)), (1.0, (0.40, 0.0, 0.05))),
)


def scale_by_name(name: str) -> ColorScale:
    scales = {"heat": HEAT, "redblue": RED_BLUE}
    try:
        return scales[name.lower()]
    except KeyError:
        raise ValueError(f"unknown colour scale {name!r}; choose heat or redblue") from None


def class_boundaries(levels) -> list[float]:
    """Sorted boundaries for a ContourLevels or a diverging ``(neg, pos)`` pair."""
    if isinstance(levels, ContourLevels):
        b = list(levels.levels)
    else:
        neg, pos = levels
        b = list(neg.levels) + list(pos.levels)
    if not b:
        raise ValueError("need at least one level")
    if any(y < x for x, y in zip(b, b[1:])):
        raise ValueError("levels are not ordered")
    return b


def classify(values, boundaries) -> np.ndarray:
    """Class index per value; ``v >= boundaries[k]`` puts it above class ``k``."""
    return np.searchsorted(np.asarray(boundaries, dtype=float), values, side="right")


def class_colors(n_classes: int, scale: ColorScale) -> list[str]:
    """``n_classes`` colours sampled at equally spaced scale positions."""
    if n_classes == 1:
        return scale.hex([0.0])
    return scale.hex(np.linspace(0.0, 1.0, n_classes))


def _diverging_positions(n_neg: int, n_pos: int) -> np.ndarray:
    """Scale positions: negative classes on [0, 0.5), neutral at 0.5, positive on (0.5, 1]."""
    neg = [0.5 * i / n_neg for i in range(n_neg)]
    pos = [0.5 + 0.5 * j / n_pos for j in range(1, n_pos + 1)]
    return np.array(neg + [0.5] + pos)


def _fmt_num(x) -> str:
    return f"{x:.6g}"


class _Svg:
    def __init__(self, width, height):
        self.width, self.height = width, height
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        ]

    def rect(self, x, y, w, h, fill, cls=None, extra=""):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<rect{c} x="{x:.3f}" y="{y:.3f}" width="{w:.3f}" height="{h:.3f}" '
            f'fill="{fill}"{extra}/>'
        )

    def text(self, x, y, s, cls=None):
        c = f' class="{cls}"' if cls else ""
        self.parts.append(
            f'<text{c} x="{x:.3f}" y="{y:.3f}" font-family="sans-serif" '
            f'font-size="11">{escape(s)}</text>'
        )

    def raw(self, s):
        self.parts.append(s)

    def done(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _cells(svg, grid: Grid, fills, map_w, map_h):
    n_cols, n_rows = grid.dims
    cw, ch = map_w / n_cols, map_h / n_rows
    svg.raw('<g class="cells" shape-rendering="crispEdges">')
    for j, fill in enumerate(fills):
        col, row = j % n_cols, j // n_cols
        # row 0 is the bottom of the map
        svg.rect(col * cw, (n_rows - 1 - row) * ch, cw, ch, fill)
    svg.raw("</g>")


LEGEND_W = 170


def render_continuous(
    grid: Grid,
    scale: ColorScale = HEAT,
    value_range=None,
    width: int = 600,
    height: int = 400,
    legend: bool = True,
) -> str:
    """Continuous heat map with a gradient legend bar labelled min and max."""
    v = grid.values
    lo, hi = value_range if value_range is not None else (float(v.min()), float(v.max()))
    if not hi > lo:
        if value_range is not None:
            raise GridError("value_range must satisfy min < max")
        if v.size > 1:
            raise GridError("constant grid: pass an explicit value_range")
        t = np.zeros(v.size)
    else:
        t = (v - lo) / (hi - lo)
    map_w = width - (LEGEND_W if legend else 0)
    svg = _Svg(width, height)
    _cells(svg, grid, scale.hex(t), map_w, height)
    if legend:
        x0 = map_w + 20
        bar_h = height - 40
        svg.raw('<g class="legend">')
        svg.raw(
            '<defs><linearGradient id="scale" x1="0" y1="1" x2="0" y2="0">'
            + "".join(
                f'<stop offset="{p:g}" stop-color="{_hex(c)}"/>' for p, c in scale.anchors
            )
            + "</linearGradient></defs>"
        )
        svg.rect(x0, 20, 24, bar_h, "url(#scale)")
        svg.text(x0 + 32, 30, _fmt_num(hi), cls="legend-max")
        svg.text(x0 + 32, 20 + bar_h, _fmt_num(lo), cls="legend-min")
        svg.raw("</g>")
    return svg.done()


def render_discrete(
    grid: Grid,
    levels,
    scale: ColorScale = HEAT,
    width: int = 600,
    height: int = 400,
    legend: bool = True,
) -> str:
    """Heat map with one colour per class between consecutive levels.

    ``levels`` is a ContourLevels (``m`` levels, ``m + 1`` classes) or a
    diverging ``(neg, pos)`` pair. For a pair the class between the highest
    negative level and the lowest positive level is the neutral middle of
    the scale.
    """
    bounds = class_boundaries(levels)
    n_classes = len(bounds) + 1
    if isinstance(levels, ContourLevels):
        colors = class_colors(n_classes, scale)
    else:
        colors = scale.hex(_diverging_positions(len(levels[0]), len(levels[1])))
    cls = classify(grid.values, bounds)
    map_w = width - (LEGEND_W if legend else 0)
    svg = _Svg(width, height)
    _cells(svg, grid, [colors[k] for k in cls], map_w, height)
    if legend:
        svg.raw('<g class="legend">')
        row_h = min(22.0, (height - 20) / n_classes)
        edges = [None] + bounds + [None]
        # highest class at the top
        for i, k in enumerate(reversed(range(n_classes))):
            y = 10 + i * row_h
            lo, hi = edges[k], edges[k + 1]
            if lo is None:
                label = f"< {_fmt_num(hi)}"
            elif hi is None:
                label = f">= {_fmt_num(lo)}"
            else:
                label = f"[{_fmt_num(lo)}, {_fmt_num(hi)})"
            svg.rect(map_w + 20, y, 18, row_h - 4, colors[k], cls="legend-class")
            svg.text(map_w + 44, y + row_h - 8, label)
        svg.raw("</g>")
    return svg.done()
