"""Contour regions as cell sets, and the symmetric-difference error."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Geometry, Grid, GridError

__all__ = [
    "ContourRegion",
    "extract_region",
    "region_mass",
    "region_area",
    "symmetric_difference_error",
    "region_to_geojson",
    "regions_to_geojson",
]

NORMALIZED_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class ContourRegion:
    """Cells of a grid whose value is at least ``level``.

    The membership is kept as a read-only boolean mask in canonical cell
    order; ``cells`` gives the same information as a set of indices.
    """

    geometry: Geometry
    mask: np.ndarray
    level: float
    tau: float | None = None

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool).ravel()
        if mask.size != self.geometry.size:
            raise GridError("region mask does not match its geometry")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_cells(cls, geometry: Geometry, cells, level: float, tau=None):
        mask = np.zeros(geometry.size, dtype=bool)
        mask[list(cells)] = True
        return cls(geometry, mask, level, tau)

    @property
    def cells(self) -> frozenset:
        return frozenset(np.flatnonzero(self.mask).tolist())

    def __len__(self):
        return int(self.mask.sum())

    def __eq__(self, other):
        if not isinstance(other, ContourRegion):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(self.mask, other.mask)

    def __le__(self, other):
        _same_geometry(self.geometry, other.geometry)
        return bool(np.all(~self.mask | other.mask))

    __hash__ = None


def _same_geometry(a: Geometry, b: Geometry):
    if a != b:
        raise GridError("regions and grid do not share the same geometry")


def extract_region(grid: Grid, level: float, tau=None) -> ContourRegion:
    """Cells with value ``>= level``."""
    return ContourRegion(grid.geometry, grid.values >= level, float(level), tau)


def region_mass(grid: Grid, region: ContourRegion) -> float:
    """Share of the grid's total mass that falls inside ``region``."""
    _same_geometry(grid.geometry, region.geometry)
    v = grid.values
    if np.any(v < 0):
        raise GridError("region_mass needs a non-negative grid")
    total = math.fsum(v)
    if total == 0:
        raise GridError("grid has zero total mass")
    return math.fsum(v[region.mask]) / total


def region_area(grid: Grid, region: ContourRegion) -> float:
    """Number of member cells times the cell area."""
    _same_geometry(grid.geometry, region.geometry)
    return len(region) * grid.geometry.cell_hypervolume


def symmetric_difference_error(
    truth: Grid, region_a: ContourRegion, region_b: ContourRegion
) -> float:
    """Mass of ``A xor B`` under a normalized truth density, as a Riemann sum.

    Raises
    ------
    GridError
        Mismatched geometries, or a truth grid whose mass is not 1.
    """
    _same_geometry(truth.geometry, region_a.geometry)
    _same_geometry(truth.geometry, region_b.geometry)
    delta = truth.geometry.cell_hypervolume
    mass = delta * math.fsum(truth.values)
    if abs(mass - 1.0) > NORMALIZED_ATOL or np.any(truth.values < 0):
        raise GridError(f"truth density must be normalized, got mass {mass!r}")
    diff = region_a.mask ^ region_b.mask
    return delta * math.fsum(truth.values[diff])


def _cell_ring(geometry: Geometry, j: int):
    col, row = j % geometry.n_cols, j // geometry.n_cols
    dx, dy = geometry.cell_size
    x0 = geometry.origin[0] + col * dx
    y0 = geometry.origin[1] + row * dy
    return [[x0, y0], [x0 + dx, y0], [x0 + dx, y0 + dy], [x0, y0 + dy], [x0, y0]]


def region_to_geojson(region: ContourRegion) -> dict:
    """GeoJSON FeatureCollection with one square polygon per member cell."""
    return regions_to_geojson([region])


def regions_to_geojson(regions) -> dict:
    features = []
    for region in regions:
        for j in np.flatnonzero(region.mask):
            features.append(
                {
                    "type": "Feature",
                    "geometry": {
                        "type": "Polygon",
                        "coordinates": [_cell_ring(region.geometry, int(j))],
                    },
                    "properties": {
                        "level": region.level,
                        "tau": region.tau,
                        "cell": int(j),
                    },
                }
            )
    return {"type": "FeatureCollection", "features": features}
