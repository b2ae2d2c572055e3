"""Simulation study and sensitivity analysis comparing the four level selectors.

Every replicate is scored for all four methods on the same perturbed or
resampled grid, so method comparisons are noise-matched.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .density import (
    MixtureDensity,
    kde_bandwidth,
    kde_eval_grid,
    kde_window,
    mixture_sample,
    preset,
    proxy_levels,
    rng_for,
    truth_grid,
)
from .grid import Grid, GridError, normalize
from .levels import (
    Method,
    _check_taus,
    density_levels_grid,
    diverging_levels,
    equal_length_levels,
    jenks_levels,
    naive_quantile_levels,
)
from .regions import ContourRegion, extract_region, symmetric_difference_error

__all__ = [
    "BenchConfig",
    "BenchRow",
    "BenchReport",
    "Poisson",
    "Gaussian",
    "method_levels",
    "run_simulation_study",
    "run_sensitivity",
]

METHODS = (Method.DENSITY, Method.NAIVE_QUANTILE, Method.EQUAL_LENGTH, Method.NATURAL)
DEFAULT_TAUS = (0.1, 0.3, 0.5, 0.7, 0.9)
# offset keeping the proxy sample's stream clear of the replicate streams
PROXY_SEED_OFFSET = 1_000_003
CSV_COLUMNS = ("density", "n", "M", "method", "tau", "mean_err", "sd_err", "failed")


@dataclass
class BenchConfig:
    densities: list = field(default_factory=lambda: ["paper-1", "paper-2", "paper-3"])
    grid_sizes: list = field(default_factory=lambda: [(51, 51)])
    sample_sizes: list = field(default_factory=lambda: [1000])
    taus: tuple = DEFAULT_TAUS
    replicates: int = 20
    base_seed: int = 0
    proxy_N: int = 10**6
    truth_dims: tuple = (301, 301)

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        self.taus = _check_taus(self.taus)
        self.grid_sizes = [tuple(int(d) for d in g) for g in self.grid_sizes]
        self.truth_dims = tuple(int(d) for d in self.truth_dims)

    @classmethod
    def paper(cls, **overrides) -> "BenchConfig":
        """The full published design: two grids, two sample sizes, 100 replicates."""
        kw = dict(
            grid_sizes=[(51, 51), (151, 151)],
            sample_sizes=[1000, 10000],
            replicates=100,
        )
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def from_json(cls, doc) -> "BenchConfig":
        if isinstance(doc, str):
            doc = json.loads(doc)
        known = {k: v for k, v in doc.items() if k in cls.__dataclass_fields__}
        unknown = set(doc) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["taus"] = list(self.taus)
        doc["grid_sizes"] = [list(g) for g in self.grid_sizes]
        doc["truth_dims"] = list(self.truth_dims)
        return doc


@dataclass(frozen=True)
class BenchRow:
    density: str
    n: int | None
    M: str
    method: str
    tau: str
    mean_err: float
    sd_err: float
    failed: int


def _fmt(x):
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.10g}"


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def get(self, method, tau, density=None, n=None, M=None) -> BenchRow:
        method = Method(method).value
        tau = tau if isinstance(tau, str) else _fmt(tau)
        for r in self.rows:
            if r.method != method or r.tau != tau:
                continue
            if density is not None and r.density != density:
                continue
            if n is not None and r.n != n:
                continue
            if M is not None and r.M != M:
                continue
            return r
        raise KeyError((method, tau, density, n, M))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(
                [
                    r.density,
                    "" if r.n is None else r.n,
                    r.M,
                    r.method,
                    r.tau,
                    _fmt(r.mean_err),
                    _fmt(r.sd_err),
                    r.failed,
                ]
            )
        return buf.getvalue()

    def format_table(self) -> str:
        """Mean +- SD per method, one column per tau label."""
        groups = {}
        for r in self.rows:
            groups.setdefault((r.density, r.n, r.M), {}).setdefault(r.method, {})[r.tau] = r
        lines = []
        for (dens, n, M), by_method in groups.items():
            taus = list(next(iter(by_method.values())).keys())
            head = f"{dens}" + (f", n={n}" if n is not None else "") + f", M={M}"
            lines.append(head)
            lines.append(f"  {'method':<16}" + "".join(f"{t:>16}" for t in taus))
            for method, cells in by_method.items():
                row = "".join(_cell_text(cells[t]) for t in taus)
                failed = next(iter(cells.values())).failed
                note = f"  ({failed} failed)" if failed else ""
                lines.append(f"  {method:<16}{row}{note}")
            lines.append("")
        return "\n".join(lines)


def _cell_text(row: BenchRow) -> str:
    if math.isnan(row.mean_err):
        return f"{'failed':>16}"
    return f"{row.mean_err:>9.3f}±{row.sd_err:<6.3f}"


def method_levels(grid: Grid, method: Method, taus: Sequence[float]) -> tuple[float, ...]:
    """Levels of ``method`` on ``grid`` aligned with ``taus`` (ascending).

    Equal length and natural levels are matched to taus by rank: the largest
    tau gets the lowest level.
    """
    m = len(taus)
    if method is Method.DENSITY:
        lv = density_levels_grid(grid, taus)
    elif method is Method.NAIVE_QUANTILE:
        lv = naive_quantile_levels(grid, taus)
    elif method is Method.EQUAL_LENGTH:
        lv = equal_length_levels(grid, m)
    elif method is Method.NATURAL:
        lv = jenks_levels(grid, m)
    else:
        raise ValueError(method)
    return lv.by_region_size()


def _aggregate(errs: list) -> tuple[float, float]:
    if not errs:
        return float("nan"), float("nan")
    a = np.asarray(errs, dtype=float)
    if np.all(a == a[0]):
        # avoid round-off in the mean leaking into the SD
        return float(a[0]), 0.0
    return float(a.mean()), float(a.std(ddof=1))


def _simulation_replicate(args):
    mix, truth, targets, n, dims, taus, seed = args
    sample = mixture_sample(mix, n, seed)
    try:
        H = kde_bandwidth(sample)
        kde = kde_eval_grid(sample, H, kde_window(sample, H, dims))
    except (ValueError, np.linalg.LinAlgError):
        return None
    idx = kde.geometry.locate(truth.geometry.centers())
    on_truth = np.where(idx >= 0, kde.values[np.maximum(idx, 0)], -np.inf)
    out = {}
    for method in METHODS:
        try:
            levels = method_levels(kde, method, taus)
        except ValueError:
            out[method] = None
            continue
        out[method] = [
            symmetric_difference_error(
                truth, ContourRegion(truth.geometry, on_truth >= lev, lev), target
            )
            for lev, target in zip(levels, targets)
        ]
    return out


def _run_jobs(fn, jobs_args, jobs):
    if jobs <= 1:
        return [fn(a) for a in jobs_args]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, jobs_args))


def run_simulation_study(config: BenchConfig, jobs: int = 1) -> BenchReport:
    """Score every selector against Monte-Carlo proxy regions of known mixtures.

    For each density, proxy levels are computed once from ``proxy_N`` draws
    and turned into target regions on a fine truth grid. Each replicate fits
    a KDE to ``n`` fresh draws on the requested grid; the KDE is looked up at
    the truth-grid centers (nearest cell, excluded outside the KDE window)
    and each method's regions are scored by symmetric-difference mass under
    the truth density.
    """
    taus = config.taus
    report = BenchReport()
    for name in config.densities:
        mix = name if isinstance(name, MixtureDensity) else preset(name)
        label = mix.name or str(name)
        truth = truth_grid(mix, config.truth_dims)
        proxies = proxy_levels(
            mix, taus, config.proxy_N, config.base_seed + PROXY_SEED_OFFSET
        )
        targets = [extract_region(truth, lev) for _, lev in proxies.pairs()]
        for n in config.sample_sizes:
            for dims in config.grid_sizes:
                args = [
                    (mix, truth, targets, n, dims, taus, config.base_seed + r)
                    for r in range(config.replicates)
                ]
                results = _run_jobs(_simulation_replicate, args, jobs)
                report.rows.extend(_rows(results, label, n, f"{dims[0]}x{dims[1]}", taus))
    return report


def _rows(results, label, n, M, tau_labels):
    rows = []
    for method in METHODS:
        per_tau = [[] for _ in tau_labels]
        failed = 0
        for res in results:
            if res is None or res.get(method) is None:
                failed += 1
                continue
            for k, e in enumerate(res[method]):
                per_tau[k].append(e)
        # report taus from the largest region to the smallest, as in the tables
        for k in reversed(range(len(tau_labels))):
            mean, sd = _aggregate(per_tau[k])
            t = tau_labels[k]
            rows.append(
                BenchRow(
                    label, n, M, method.value, t if isinstance(t, str) else _fmt(t),
                    mean, sd, failed,
                )
            )
    return rows


@dataclass(frozen=True)
class Poisson:
    """Each cell redrawn as Poisson with the observed value as mean."""

    def perturb(self, values, rng):
        return rng.poisson(values).astype(float)


@dataclass(frozen=True)
class Gaussian:
    """Each cell redrawn as Normal(observed value, ``sd``)."""

    sd: float

    def __post_init__(self):
        if not self.sd >= 0:
            raise ValueError("sd must be non-negative")

    def perturb(self, values, rng):
        return values + self.sd * rng.standard_normal(values.shape)


def _side_grid(values):
    v = np.asarray(values, dtype=float)
    return Grid.from_array(v.reshape(1, -1))


def _signed_levels(grid: Grid, method: Method, taus):
    """``(neg, pos)`` level tuples, each aligned with ascending taus.

    Density contours use the sign split directly. The other selectors run
    on the strictly signed cells of each side; negative-side levels are
    computed on magnitudes and negated back.
    """
    if method is Method.DENSITY:
        neg, pos = diverging_levels(grid, taus)
        if not neg.levels or not pos.levels:
            raise ValueError("one side of the diverging grid is empty")
        return neg.by_region_size(), pos.by_region_size()
    v = grid.values
    neg_mag, pos_val = -v[v < 0], v[v > 0]
    if neg_mag.size == 0 or pos_val.size == 0:
        raise ValueError("one side of the diverging grid is empty")
    n = method_levels(_side_grid(neg_mag), method, taus)
    p = method_levels(_side_grid(pos_val), method, taus)
    return tuple(-x for x in n), p


def _diverging_labels(taus):
    return [f"-{_fmt(t)}" for t in taus], [f"+{_fmt(t)}" for t in taus]


def run_sensitivity(
    data: Grid,
    model,
    taus: Sequence[float] = DEFAULT_TAUS,
    replicates: int = 100,
    base_seed: int = 0,
    name: str = "data",
    reference: str = "density",
) -> BenchReport:
    """Robustness of each selector to cell-wise noise on observed data.

    Non-negative grids are scored by region error: the symmetric-difference
    mass, weighted by the original normalized grid, between each method's
    regions on a replicate and the target regions. Grids with negative values
    are scored by level error: the absolute difference between each
    sign-split level on a replicate and its target.

    Parameters
    ----------
    model : Poisson or Gaussian
    reference : {"density", "own"}
        ``"density"`` scores every method against the original density
        contour regions or levels. ``"own"`` scores each method against its
        own result on the original data, isolating the effect of the noise.
    """
    taus = _check_taus(taus)
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if reference not in ("density", "own"):
        raise ValueError("reference must be 'density' or 'own'")
    v = data.values
    diverging = bool(np.any(v < 0))
    if isinstance(model, Poisson):
        if diverging or np.any(v != np.round(v)):
            raise GridError("Poisson model needs a non-negative integer-valued grid")
    M = f"{data.dims[0]}x{data.dims[1]}"
    ref_method = {m: (Method.DENSITY if reference == "density" else m) for m in METHODS}

    if not diverging:
        weight, _ = normalize(data)
        targets = {}
        for m in METHODS:
            lv = method_levels(data, ref_method[m], taus)
            targets[m] = [extract_region(data, x) for x in lv]
        results = []
        for r in range(replicates):
            rng = rng_for(base_seed + r)
            vals = np.maximum(model.perturb(v, rng), 0.0)
            rep = data.with_values(vals)
            out = {}
            for m in METHODS:
                try:
                    lv = method_levels(rep, m, taus)
                except ValueError:
                    out[m] = None
                    continue
                out[m] = [
                    symmetric_difference_error(weight, extract_region(rep, x), t)
                    for x, t in zip(lv, targets[m])
                ]
            results.append(out)
        return BenchReport(_rows(results, name, None, M, list(taus)))

    neg_labels, pos_labels = _diverging_labels(taus)
    targets = {}
    for m in METHODS:
        n, p = _signed_levels(data, ref_method[m], taus)
        targets[m] = list(n) + list(p)
    results = []
    for r in range(replicates):
        rng = rng_for(base_seed + r)
        rep = data.with_values(model.perturb(v, rng))
        out = {}
        for m in METHODS:
            try:
                n, p = _signed_levels(rep, m, taus)
            except ValueError:
                out[m] = None
                continue
            out[m] = [abs(a - b) for a, b in zip(list(n) + list(p), targets[m])]
        results.append(out)
    return BenchReport(_diverging_rows(results, name, M, neg_labels, pos_labels))


def _diverging_rows(results, name, M, neg_labels, pos_labels):
    # column order: negative side from the largest magnitude, then positive
    # side from the smallest level upwards
    labels = neg_labels + pos_labels
    k = len(neg_labels)
    order = list(range(k)) + list(reversed(range(k, 2 * k)))
    rows = []
    for method in METHODS:
        failed = sum(1 for res in results if res.get(method) is None)
        for i in order:
            errs = [res[method][i] for res in results if res.get(method) is not None]
            mean, sd = _aggregate(errs)
            rows.append(BenchRow(name, None, M, method.value, labels[i], mean, sd, failed))
    return rows
