"""
Diverging levels for signed data
================================

Anomalies can be negative. Splitting the grid into its positive and
negative parts lets each side get its own density contour levels, and
everything between the innermost levels is drawn as neutral grey.
"""

from pathlib import Path

import numpy as np

from gridcontour import diverging_levels
from gridcontour.grid import Grid
from gridcontour.render import RED_BLUE, render_discrete

rng = np.random.default_rng(7)
years = np.arange(145)
months = np.arange(12)
trend = 1.6 * (years / years[-1]) ** 2 - 0.5
season = 0.2 * np.sin(2 * np.pi * (months[:, None] - 3) / 12)
anomaly = trend[None, :] + season + rng.normal(0, 0.35, (12, 145))
grid = Grid.from_array(np.round(anomaly, 2))

neg, pos = diverging_levels(grid, (0.25, 0.5, 0.75))
print("cool side:", [neg.level_for(t) for t in (0.25, 0.5, 0.75)])
print("warm side:", [pos.level_for(t) for t in (0.75, 0.5, 0.25)])

out = Path("demo_output")
out.mkdir(exist_ok=True)
(out / "anomaly.svg").write_text(
    render_discrete(grid, (neg, pos), RED_BLUE, width=900, height=260), encoding="utf-8"
)
