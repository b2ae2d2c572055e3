"""
Contour levels for a gridded population
=======================================

A synthetic city: a dense core, a secondary town and a sparse, mostly
empty periphery, counted on a 1 km grid. We compare the four level
selectors and check how much of the population each top region holds.
"""

import numpy as np

from gridcontour import (
    density_levels_grid,
    equal_length_levels,
    extract_region,
    jenks_levels,
    naive_quantile_levels,
    region_area,
    region_mass,
)
from gridcontour.grid import Geometry, Grid

rng = np.random.default_rng(1)
y, x = np.mgrid[0:40, 0:50] + 0.5
intensity = 30000 * np.exp(-((x - 22) ** 2 + (y - 20) ** 2) / 40) + 9000 * np.exp(
    -((x - 38) ** 2 + (y - 10) ** 2) / 15
)
counts = rng.poisson(intensity).astype(float)
grid = Grid(Geometry((0.0, 0.0), (1000.0, 1000.0), (50, 40)), counts.ravel())
print(f"{grid.size} cells, {int(counts.sum())} people")

###############################################################################
# Density contour levels put each threshold where the region above it holds
# tau of the total population.
taus = (0.1, 0.3, 0.5, 0.7, 0.9)
dens = density_levels_grid(grid, taus)
for tau, level in dens.pairs():
    region = extract_region(grid, level, tau)
    print(
        f"tau={tau:.1f}  level={level:8.0f}  "
        f"mass={region_mass(grid, region):.3f}  area={region_area(grid, region) / 1e6:5.0f} km2"
    )

###############################################################################
# The other selectors ignore mass. Naive quantiles are dominated by the
# many near-empty cells.
for name, lv in [
    ("naive", naive_quantile_levels(grid, taus)),
    ("equal length", equal_length_levels(grid, 5)),
    ("natural", jenks_levels(grid, 5)),
]:
    top = extract_region(grid, lv.levels[-1])
    print(f"{name:>12}: levels {np.round(lv.levels).astype(int)}  top mass {region_mass(grid, top):.3f}")
