"""
Monte-Carlo contour levels of a known density
=============================================

For a density we can evaluate, the contour level for tau is the
(1 - tau)-quantile of the density at random draws. For the standard
bivariate normal the exact answer is (1 - tau) / (2 pi).
"""

import math

from gridcontour import mixture_pdf, preset, proxy_levels

taus = (0.1, 0.3, 0.5, 0.7, 0.9)
normal = preset("std-normal")
lv = proxy_levels(normal, taus, N=10**6, seed=0)
for tau, level in lv.pairs():
    print(f"tau={tau:.1f}  monte carlo {level:.5f}  exact {(1 - tau) / (2 * math.pi):.5f}")

###############################################################################
# The shipped mixtures: a single elongated Gaussian, a three-bump Gaussian
# mixture and a two-component t mixture.
for name in ("paper-1", "paper-2", "paper-3"):
    mix = preset(name)
    lv = proxy_levels(mix, taus, N=10**6, seed=0)
    print(name, [round(level, 3) for _, level in lv.pairs()])
    print("  density at the first mean:", round(float(mixture_pdf(mix, mix.components[0].mean)), 4))
