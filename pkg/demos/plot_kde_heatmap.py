"""
Kernel density estimate on a grid, rendered as a heat map
=========================================================

Draw a sample, estimate its density on a grid and colour the grid by
density contour classes. The SVG files land in ``demo_output/``.
"""

from pathlib import Path

from gridcontour import density_levels_grid, kde_bandwidth, kde_eval_grid, mixture_sample, preset
from gridcontour.density import kde_window
from gridcontour.render import HEAT, render_continuous, render_discrete

out = Path("demo_output")
out.mkdir(exist_ok=True)

sample = mixture_sample(preset("paper-2"), 2000, seed=3)
H = kde_bandwidth(sample)
grid = kde_eval_grid(sample, H, kde_window(sample, H, (80, 80)))
print("bandwidth matrix:\n", H.round(4))

###############################################################################
# Five levels give six colour classes; the lowest class is the background.
levels = density_levels_grid(grid, (0.1, 0.3, 0.5, 0.7, 0.9))
(out / "kde_continuous.svg").write_text(render_continuous(grid, HEAT), encoding="utf-8")
(out / "kde_contours.svg").write_text(render_discrete(grid, levels, HEAT), encoding="utf-8")
print("levels:", [round(x, 4) for x in levels.levels])
print("wrote", sorted(p.name for p in out.glob("kde_*.svg")))
