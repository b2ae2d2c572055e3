import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gridcontour.grid import Geometry, Grid, GridError
from gridcontour.levels import density_level_single
from gridcontour.regions import (
    ContourRegion,
    extract_region,
    region_area,
    region_mass,
    region_to_geojson,
    regions_to_geojson,
    symmetric_difference_error,
)

GEOM9 = Geometry((0, 0), (1, 1), (3, 3))


def grid_of(values, n_cols=None, cell_size=(1.0, 1.0)):
    values = np.asarray(values, dtype=float).ravel()
    n_cols = n_cols or values.size
    return Grid(Geometry((0, 0), cell_size, (n_cols, values.size // n_cols)), values)


class TestExtract:
    def test_threshold(self):
        r = extract_region(grid_of([0.4, 0.3, 0.2, 0.1], 2), 0.3)
        assert r.cells == {0, 1}
        assert r.level == 0.3

    def test_all_and_none(self):
        g = grid_of([1, 2, 3])
        assert len(extract_region(g, 1)) == 3
        assert len(extract_region(g, 0)) == 3
        assert len(extract_region(g, 3.5)) == 0

    def test_from_cells(self):
        r = ContourRegion.from_cells(GEOM9, {0, 4}, 1.0)
        assert r.cells == {0, 4}
        with pytest.raises(ValueError):
            r.mask[0] = False

    def test_mask_size_checked(self):
        with pytest.raises(GridError):
            ContourRegion(GEOM9, np.ones(4, bool), 0.0)


class TestMassAndArea:
    def test_uniform_half(self):
        g = grid_of([0.25] * 4, 2)
        assert region_mass(g, ContourRegion.from_cells(g.geometry, {0, 3}, 0.25)) == 0.5

    def test_empty_and_full(self):
        g = grid_of([3, 1, 2])
        assert region_mass(g, extract_region(g, 10)) == 0
        assert region_mass(g, extract_region(g, 0)) == pytest.approx(1, abs=1e-12)

    def test_unnormalized_returns_probability(self):
        g = grid_of([30, 10], cell_size=(2, 2))
        assert region_mass(g, extract_region(g, 20)) == 0.75

    def test_area(self):
        g = grid_of([1, 2, 3, 4], 2, (0.5, 0.5))
        assert region_area(g, extract_region(g, 2)) == 0.75
        assert region_area(g, extract_region(g, 9)) == 0

    def test_area_km_grid(self):
        g = grid_of(np.arange(30.0), 6, (1000, 1000))
        assert region_area(g, extract_region(g, 8)) == 22e6

    def test_geometry_mismatch(self):
        g = grid_of([1, 2])
        with pytest.raises(GridError):
            region_mass(g, ContourRegion.from_cells(GEOM9, {0}, 1.0))
        with pytest.raises(GridError):
            region_area(g, ContourRegion.from_cells(GEOM9, {0}, 1.0))


TRUTH9 = Grid(GEOM9, np.array([1, 2, 3, 4, 5, 6, 7, 8, 9]) / 45)


class TestSymmetricDifference:
    def test_identity(self):
        a = ContourRegion.from_cells(GEOM9, {1, 2}, 0)
        assert symmetric_difference_error(TRUTH9, a, a) == 0

    def test_disjoint_adds(self):
        t = grid_of([0.3, 0.2, 0.5])
        a = ContourRegion.from_cells(t.geometry, {0}, 0)
        b = ContourRegion.from_cells(t.geometry, {1}, 0)
        assert symmetric_difference_error(t, a, b) == pytest.approx(0.5, abs=1e-15)

    def test_hand_summed_3x3(self):
        a = ContourRegion.from_cells(GEOM9, {0, 4, 8}, 0)
        b = ContourRegion.from_cells(GEOM9, {4, 5}, 0)
        # A xor B = {0, 8, 5}: (1 + 9 + 6) / 45
        assert symmetric_difference_error(TRUTH9, a, b) == pytest.approx(16 / 45, abs=1e-15)

    def test_unnormalized_truth(self):
        t = grid_of([1, 1])
        a = extract_region(t, 1)
        with pytest.raises(GridError, match="normalized"):
            symmetric_difference_error(t, a, a)

    def test_geometry_mismatch(self):
        t = grid_of([0.5, 0.5])
        a = ContourRegion.from_cells(GEOM9, {0}, 0)
        with pytest.raises(GridError):
            symmetric_difference_error(t, a, a)

    @given(*(st.sets(st.integers(0, 8)) for _ in range(3)))
    def test_pseudometric(self, sa, sb, sc):
        a, b, c = (ContourRegion.from_cells(GEOM9, s, 0) for s in (sa, sb, sc))
        err = lambda x, y: symmetric_difference_error(TRUTH9, x, y)  # noqa: E731
        assert err(a, a) == 0
        assert err(a, b) == err(b, a)
        assert err(a, c) <= err(a, b) + err(b, c) + 1e-15
        assert 0 <= err(a, b) <= 1 + 1e-12


class TestInvariants:
    @given(
        st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=30).filter(
            lambda v: sum(v) > 0
        ),
        st.floats(0.01, 0.99),
    )
    def test_mass_at_least_tau(self, vals, tau):
        g = grid_of(vals)
        r = extract_region(g, density_level_single(g, tau).level)
        assert region_mass(g, r) >= tau * (1 - 1e-12)

    @given(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=30),
        st.floats(-10, 10),
        st.floats(-10, 10),
    )
    def test_nesting(self, vals, l1, l2):
        g = grid_of(vals)
        hi, lo = max(l1, l2), min(l1, l2)
        assert extract_region(g, hi) <= extract_region(g, lo)


class TestGeoJson:
    def test_one_polygon_per_cell(self):
        g = Grid(Geometry((10, 20), (2, 1), (2, 2)), [1, 5, 3, 7])
        doc = region_to_geojson(extract_region(g, 4, tau=0.5))
        json.dumps(doc)
        assert doc["type"] == "FeatureCollection"
        assert len(doc["features"]) == 2
        f = doc["features"][0]
        assert f["geometry"]["type"] == "Polygon"
        assert f["geometry"]["coordinates"][0] == [
            [12, 20], [14, 20], [14, 21], [12, 21], [12, 20]
        ]
        assert f["properties"]["level"] == 4
        assert f["properties"]["tau"] == 0.5

    def test_many_regions(self):
        g = grid_of([1, 2, 3])
        doc = regions_to_geojson([extract_region(g, 3), extract_region(g, 2)])
        assert len(doc["features"]) == 3
