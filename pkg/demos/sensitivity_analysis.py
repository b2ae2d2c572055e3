"""
Robustness to noise in the observed grid
========================================

Without a ground truth we can still ask how much each selector's output
moves when every cell is redrawn from a noise model. Counts are redrawn
as Poisson, and regions are compared with the original density contour
regions.
"""

import numpy as np

from gridcontour.bench import Poisson, run_sensitivity
from gridcontour.grid import Grid

rng = np.random.default_rng(2)
y, x = np.mgrid[0:30, 0:30]
mean = 4000 * np.exp(-((x - 15) ** 2 + (y - 12) ** 2) / 30) + rng.gamma(0.4, 50, x.shape)
counts = Grid.from_array(rng.poisson(mean).astype(float))

report = run_sensitivity(counts, Poisson(), replicates=30, base_seed=0, name="counts")
print(report.format_table())
