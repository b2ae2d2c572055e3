"""Contour level selection for gridded values.

Four selectors are provided:

* ``density_levels_grid``: density contour levels from the grid values alone,
  by accumulating probability elements from the highest cell downwards;
* ``naive_quantile_levels``: quantiles of the raw cell values;
* ``equal_length_levels``: evenly spaced cuts over the value range;
* ``jenks_levels``: natural breaks from an exact 1-D k-means partition.

``density_levels_points`` is the sample-based counterpart of the grid
selector, for when the point data and a density evaluator are available.

Levels are always reported on the scale of the input grid and sorted
non-decreasing. For tau-indexed methods use :meth:`ContourLevels.level_for`
or :meth:`ContourLevels.pairs` rather than zipping ``taus`` with ``levels``:
a larger tau gives a larger region and hence a lower upper-side level.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import DegenerateGridError, Grid, GridError, cell_hypervolume, split_signs

__all__ = [
    "Method",
    "DivisorMode",
    "ContourLevels",
    "LevelResult",
    "quantile",
    "density_level_single",
    "density_levels_grid",
    "density_levels_points",
    "naive_quantile_levels",
    "equal_length_levels",
    "jenks_breaks",
    "jenks_levels",
    "diverging_levels",
    "levels_from_json",
]


class Method(str, enum.Enum):
    DENSITY = "DensityContour"
    NAIVE_QUANTILE = "NaiveQuantile"
    EQUAL_LENGTH = "EqualLength"
    NATURAL = "Natural"


class DivisorMode(str, enum.Enum):
    PAPER_M = "PaperM"
    M_PLUS_ONE = "MPlusOne"


@dataclass(frozen=True)
class ContourLevels:
    """An ordered set of thresholds and how they were obtained.

    ``side`` is ``"upper"`` when each level bounds a region ``{v >= level}``
    and ``"lower"`` for the negative half of a diverging pair, whose regions
    are ``{v <= level}``.
    """

    method: Method
    levels: tuple[float, ...]
    taus: tuple[float, ...] | None = None
    scale: float = 1.0
    side: str = "upper"

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        levels = tuple(float(v) for v in self.levels)
        if any(b < a for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be sorted non-decreasing")
        object.__setattr__(self, "levels", levels)
        if self.taus is not None:
            taus = tuple(float(t) for t in self.taus)
            if levels and len(taus) != len(levels):
                raise ValueError("taus and levels differ in length")
            object.__setattr__(self, "taus", taus)
        if self.side not in ("upper", "lower"):
            raise ValueError(f"side must be 'upper' or 'lower', got {self.side!r}")

    def __len__(self):
        return len(self.levels)

    def by_region_size(self) -> tuple[float, ...]:
        """Levels ordered from the smallest region to the largest."""
        if self.side == "upper":
            return self.levels[::-1]
        return self.levels

    def pairs(self) -> list[tuple[float, float]]:
        """``(tau, level)`` pairs with tau increasing."""
        if self.taus is None:
            raise ValueError(f"{self.method.value} levels are not indexed by tau")
        return list(zip(self.taus, self.by_region_size()))

    def level_for(self, tau: float) -> float:
        for t, lev in self.pairs():
            if t == tau:
                return lev
        raise KeyError(tau)

    def to_json(self) -> dict:
        doc = {
            "method": self.method.value,
            "taus": list(self.taus) if self.taus is not None else None,
            "levels": list(self.levels),
            "scale": self.scale,
        }
        if self.side != "upper":
            doc["side"] = self.side
        return doc


def levels_from_json(doc) -> ContourLevels:
    if isinstance(doc, str):
        doc = json.loads(doc)
    return ContourLevels(
        method=Method(doc["method"]),
        levels=tuple(doc["levels"]),
        taus=tuple(doc["taus"]) if doc.get("taus") is not None else None,
        scale=float(doc.get("scale", 1.0)),
        side=doc.get("side", "upper"),
    )


@dataclass(frozen=True)
class LevelResult:
    """Outcome of the grid-based level search for one tau.

    Attributes
    ----------
    level : float
        Threshold on the input scale.
    pivot_index : int
        Cell whose value is the threshold.
    attained_mass : float
        Normalized mass of ``{v >= level}``; at least tau.
    """

    level: float
    pivot_index: int
    attained_mass: float


def _check_tau(tau):
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0,1), got {tau}")


def _check_taus(taus):
    taus = tuple(float(t) for t in taus)
    for t in taus:
        _check_tau(t)
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly increasing")
    return taus


def quantile(values, p: float) -> float:
    """Linearly interpolated quantile of the order statistics.

    With sorted ``v_1..v_n`` and ``h = (n - 1) p + 1``, returns
    ``v_floor(h) + (h - floor(h)) (v_floor(h)+1 - v_floor(h))``.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("quantile of an empty list")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0,1], got {p}")
    return float(np.quantile(v, p, method="linear"))


# round-off allowance when comparing running mass with tau, so that masses
# equal to tau in exact arithmetic are treated as reaching it at any scale
MASS_ATOL = 1e-12


class _SortedMass:
    """Probability elements sorted descending with running mass.

    ``cum[k]`` is the mass of the ``k + 1`` largest cells, which equals the
    suffix sum of the ascending order statistics at the matching position.
    """

    def __init__(self, grid: Grid):
        v = grid.values
        if v.size == 0:
            raise GridError("empty grid")
        if np.any(v < 0):
            raise GridError("density levels need non-negative values; use diverging_levels")
        delta = cell_hypervolume(grid)
        scale = delta * math.fsum(v)
        if not scale > 0:
            raise DegenerateGridError("grid has zero total mass")
        # stable sort on negated values keeps equal cells in index order
        self.order = np.argsort(-v, kind="stable")
        self.sorted_values = v[self.order]
        self.cum = np.cumsum(delta * self.sorted_values / scale)
        self.scale = scale
        self.delta = delta

    def level(self, tau: float) -> LevelResult:
        _check_tau(tau)
        # first k (descending) where the running mass reaches tau, i.e. the
        # smallest suffix of the ascending order with mass >= tau; a running
        # mass within round-off of tau counts as reaching it
        k = int(np.searchsorted(self.cum, tau - MASS_ATOL, side="left"))
        k = min(k, self.cum.size - 1)
        lev = self.sorted_values[k]
        # every cell tied with the pivot joins the region
        last = int(np.searchsorted(-self.sorted_values, -lev, side="right")) - 1
        return LevelResult(float(lev), int(self.order[k]), float(self.cum[last]))


def density_level_single(grid: Grid, tau: float) -> LevelResult:
    """Density contour level of a non-negative grid for one tau.

    The grid is normalized internally; the level is returned on the input
    scale. The region ``{v >= level}`` holds at least ``tau`` of the mass and
    removing the cells equal to the level drops it below ``tau``.
    """
    return _SortedMass(grid).level(tau)


def density_levels_grid(grid: Grid, taus: Sequence[float]) -> ContourLevels:
    taus = _check_taus(taus)
    sm = _SortedMass(grid)
    found = [sm.level(t).level for t in taus]
    return ContourLevels(Method.DENSITY, tuple(sorted(found)), taus, scale=sm.scale)


def density_levels_points(
    sample, density: Callable[[np.ndarray], np.ndarray], taus: Sequence[float]
) -> ContourLevels:
    """Density contour levels from a point sample.

    Evaluates ``density`` at every sample point and takes the
    ``(1 - tau)``-quantile of those values for each tau.

    Parameters
    ----------
    sample : array_like, shape (n, d)
    density : callable
        Vectorized evaluator mapping an ``(n, d)`` array to ``n`` values.
    taus : sequence of float
        Strictly increasing probabilities in (0, 1).
    """
    taus = _check_taus(taus)
    pts = np.asarray(sample, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[0] == 0:
        raise ValueError("empty sample")
    y = np.asarray(density(pts), dtype=float).ravel()
    return _upper_quantile_levels(y, taus, Method.DENSITY)


def _upper_quantile_levels(y, taus, method):
    y = np.sort(y)
    found = [float(np.quantile(y, 1.0 - t, method="linear")) for t in taus]
    return ContourLevels(method, tuple(sorted(found)), taus)


def naive_quantile_levels(grid: Grid, taus: Sequence[float]) -> ContourLevels:
    """Quantiles of the raw cell values, with no mass weighting.

    tau maps to the ``(1 - tau)``-quantile so that, as for density contours,
    a larger tau gives a lower level and a larger region.
    """
    taus = _check_taus(taus)
    if grid.values.size == 0:
        raise GridError("empty grid")
    return _upper_quantile_levels(grid.values, taus, Method.NAIVE_QUANTILE)


def equal_length_levels(
    grid: Grid, m: int, divisor_mode: DivisorMode | str = DivisorMode.M_PLUS_ONE
) -> ContourLevels:
    """``m`` evenly spaced levels over ``[min, max]`` of the grid values.

    ``MPlusOne`` (default) places cuts at ``min + j (max - min) / (m + 1)``
    for ``j = 1..m``, all strictly inside the range. ``PaperM`` uses the
    divisor ``m`` so the top cut equals the maximum.
    """
    mode = DivisorMode(divisor_mode)
    if m < 1:
        raise ValueError("m must be >= 1")
    vmin, vmax = float(grid.values.min()), float(grid.values.max())
    if not vmax > vmin:
        raise DegenerateGridError("equal length levels need min < max")
    div = m if mode is DivisorMode.PAPER_M else m + 1
    found = tuple(vmin + j / div * (vmax - vmin) for j in range(1, m + 1))
    return ContourLevels(Method.EQUAL_LENGTH, found)


def _sse_table(x, w):
    """Prefix sums for O(1) within-cluster SSE of sorted weighted values."""
    xc = x - np.average(x, weights=w)
    W = np.concatenate([[0.0], np.cumsum(w)])
    S1 = np.concatenate([[0.0], np.cumsum(w * xc)])
    S2 = np.concatenate([[0.0], np.cumsum(w * xc * xc)])
    return W, S1, S2


def _cost(W, S1, S2, j, i):
    """SSE of half-open block ``[j, i)``; ``j`` may be an array."""
    n = W[i] - W[j]
    s = S1[i] - S1[j]
    return np.maximum(S2[i] - S2[j] - s * s / n, 0.0)


def jenks_breaks(values, n_classes: int) -> tuple[np.ndarray, float]:
    """Globally optimal partition of 1-D values into contiguous classes.

    Minimizes the total within-class sum of squared deviations by dynamic
    programming over the sorted distinct values. Each layer is filled with
    divide and conquer, valid because the optimal split index is monotone
    in the right endpoint for 1-D k-means.

    Parameters
    ----------
    values : array_like
    n_classes : int
        Number of classes, at most the number of distinct values.

    Returns
    -------
    lower_bounds : ndarray
        Smallest value of each class, ascending (``n_classes`` entries).
    sse : float
        Total within-class sum of squares of the partition.
    """
    v = np.asarray(values, dtype=float).ravel()
    if n_classes < 1:
        raise ValueError("n_classes must be >= 1")
    x, w = np.unique(v, return_counts=True)
    w = w.astype(float)
    n, k = x.size, n_classes
    if n < k:
        raise ValueError(f"{n} distinct values cannot form {k} classes")

    W, S1, S2 = _sse_table(x, w)
    inf = np.inf
    prev = np.full(n + 1, inf)
    prev[1:] = _cost(W, S1, S2, 0, np.arange(1, n + 1))
    splits = []
    for c in range(2, k + 1):
        cur = np.full(n + 1, inf)
        arg = np.zeros(n + 1, dtype=np.int64)
        # cur[i] = min over j in [c-1, i-1] of prev[j] + cost(j, i), for i in [c, n]
        stack = [(c, n, c - 1, n - 1)]
        while stack:
            lo, hi, optlo, opthi = stack.pop()
            if lo > hi:
                continue
            mid = (lo + hi) // 2
            j = np.arange(optlo, min(opthi, mid - 1) + 1)
            tot = prev[j] + _cost(W, S1, S2, j, mid)
            best = int(np.argmin(tot))
            cur[mid] = tot[best]
            arg[mid] = j[best]
            stack.append((lo, mid - 1, optlo, arg[mid]))
            stack.append((mid + 1, hi, arg[mid], opthi))
        splits.append(arg)
        prev = cur

    starts = []
    i = n
    for arg in reversed(splits):
        i = int(arg[i])
        starts.append(i)
    starts = [0] + starts[::-1]
    bounds = np.array([x[s] for s in starts])
    ends = starts[1:] + [n]
    sse = 0.0
    for s, e in zip(starts, ends):
        seg, sw = x[s:e], w[s:e]
        mu = np.average(seg, weights=sw)
        sse += float(np.sum(sw * (seg - mu) ** 2))
    return bounds, sse


def jenks_levels(grid: Grid, m: int) -> ContourLevels:
    """Natural breaks: ``m`` levels from an optimal ``m + 1``-class partition.

    Each level is the smallest value of a class above the lowest, so
    ``{v >= level}`` reproduces class membership exactly.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    bounds, _ = jenks_breaks(grid.values, m + 1)
    return ContourLevels(Method.NATURAL, tuple(float(b) for b in bounds[1:]))


def diverging_levels(grid: Grid, taus: Sequence[float]) -> tuple[ContourLevels, ContourLevels]:
    """Density contour levels for each sign of a signed grid.

    Returns ``(neg, pos)``. ``neg`` levels are on the original (negative)
    scale with ``side="lower"``: its regions are ``{v <= level}``. A side
    without strictly signed cells comes back with no levels.
    """
    taus = _check_taus(taus)
    neg_part, pos_part = split_signs(grid)

    def side(part):
        if not np.any(part.values > 0):
            return None
        return density_levels_grid(part, taus)

    n, p = side(neg_part), side(pos_part)
    if n is None:
        neg = ContourLevels(Method.DENSITY, (), taus, side="lower")
    else:
        neg = ContourLevels(
            Method.DENSITY, tuple(-v for v in n.levels[::-1]), taus, n.scale, side="lower"
        )
    if p is None:
        pos = ContourLevels(Method.DENSITY, (), taus)
    else:
        pos = p
    return neg, pos
