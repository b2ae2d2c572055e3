import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridcontour.grid import Grid, GridError
from gridcontour.levels import ContourLevels, Method, density_levels_grid, diverging_levels
from gridcontour.render import (
    HEAT,
    RED_BLUE,
    ColorScale,
    ScaleKind,
    class_colors,
    classify,
    render_continuous,
    render_discrete,
    scale_by_name,
)

NS = {"s": "http://www.w3.org/2000/svg"}
TAUS = (0.1, 0.3, 0.5, 0.7, 0.9)


def fixture_grid():
    y, x = np.mgrid[0:12, 0:15]
    return Grid.from_array(np.exp(-((x - 7) ** 2 + (y - 5) ** 2) / 20.0))


def cell_fills(svg):
    root = ET.fromstring(svg.encode())
    g = root.find("s:g[@class='cells']", NS)
    return [r.get("fill") for r in g.findall("s:rect", NS)]


def legend_classes(svg):
    root = ET.fromstring(svg.encode())
    return root.findall(".//s:rect[@class='legend-class']", NS)


class TestColorScale:
    def test_endpoints(self):
        assert HEAT.hex([0, 1]) == ["#ffff33", "#d60000"]

    def test_anchor_validation(self):
        with pytest.raises(ValueError):
            ColorScale(ScaleKind.SEQUENTIAL_HEAT, ((0.1, (0, 0, 0)), (1.0, (1, 1, 1))))
        with pytest.raises(ValueError):
            ColorScale(ScaleKind.SEQUENTIAL_HEAT, ((0.0, (0, 0, 0)), (0.0, (1, 1, 1))))

    def test_by_name(self):
        assert scale_by_name("redblue") is RED_BLUE
        with pytest.raises(ValueError):
            scale_by_name("viridis")


class TestContinuous:
    def test_single_cell(self):
        svg = render_continuous(Grid.from_array(np.array([[3.0]])))
        assert cell_fills(svg) == [HEAT.hex([0])[0]]

    def test_min_and_max_colors(self):
        g = Grid.from_array(np.array([[0.0, 5.0, 10.0]]))
        fills = cell_fills(render_continuous(g))
        assert fills[0] == HEAT.hex([0])[0] and fills[2] == HEAT.hex([1])[0]

    def test_constant_grid(self):
        g = Grid.from_array(np.full((2, 2), 4.0))
        with pytest.raises(GridError):
            render_continuous(g)
        assert len(cell_fills(render_continuous(g, value_range=(0, 8)))) == 4

    def test_legend_labels(self):
        svg = render_continuous(Grid.from_array(np.array([[1.0, 9.0]])))
        root = ET.fromstring(svg.encode())
        assert root.find(".//s:text[@class='legend-max']", NS).text == "9"
        assert root.find(".//s:text[@class='legend-min']", NS).text == "1"
        assert "legend" not in render_continuous(fixture_grid(), legend=False)

    def test_deterministic(self):
        assert render_continuous(fixture_grid()) == render_continuous(fixture_grid())


class TestDiscrete:
    def test_six_classes_yellow_to_red(self):
        g = fixture_grid()
        svg = render_discrete(g, density_levels_grid(g, TAUS))
        legend = legend_classes(svg)
        assert len(legend) == 6
        # highest class listed first, drawn in the red end of the scale
        assert legend[0].get("fill") == HEAT.hex([1])[0]
        assert legend[-1].get("fill") == HEAT.hex([0])[0]

    def test_cell_fill_matches_class(self):
        g = fixture_grid()
        lv = density_levels_grid(g, TAUS)
        colors = class_colors(6, HEAT)
        expect = [colors[k] for k in classify(g.values, lv.levels)]
        assert cell_fills(render_discrete(g, lv)) == expect

    def test_equal_value_joins_upper_class(self):
        assert classify([1.0, 2.0, 2.5, 3.0], [2.0, 3.0]).tolist() == [0, 1, 1, 2]

    def test_diverging_seven_classes(self):
        v = np.linspace(-3, 3, 48).reshape(6, 8)
        g = Grid.from_array(v)
        pair = diverging_levels(g, (0.25, 0.5, 0.75))
        svg = render_discrete(g, pair, RED_BLUE)
        legend = legend_classes(svg)
        assert len(legend) == 7
        fills = [r.get("fill") for r in legend]
        assert fills[0] == RED_BLUE.hex([1])[0]
        assert fills[3] == RED_BLUE.hex([0.5])[0]
        assert fills[-1] == RED_BLUE.hex([0])[0]

    def test_unordered_levels(self):
        g = fixture_grid()
        neg = ContourLevels(Method.DENSITY, (0.5,), side="lower")
        pos = ContourLevels(Method.DENSITY, (0.2,))
        with pytest.raises(ValueError):
            render_discrete(g, (neg, pos))

    def test_deterministic(self):
        g = fixture_grid()
        lv = density_levels_grid(g, TAUS)
        assert render_discrete(g, lv) == render_discrete(g, lv)

    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=6).map(sorted),
        st.floats(-200, 200),
        st.floats(0, 50),
    )
    def test_monotone_classes(self, bounds, v, bump):
        a, b = classify([v, v + bump], bounds)
        assert b >= a
