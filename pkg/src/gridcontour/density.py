"""Bivariate Gaussian / Student-t mixtures and a direct-sum Gaussian KDE.

Random numbers come from NumPy's ``PCG64`` bit generator (O'Neill 2014),
seeded directly with the integer seed; replicate ``r`` of a study uses
seed ``base_seed + r``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import Geometry, Grid
from .levels import ContourLevels, Method, _check_taus, _upper_quantile_levels

__all__ = [
    "Kind",
    "MixtureComponent",
    "MixtureDensity",
    "PRESETS",
    "preset",
    "rng_for",
    "mixture_pdf",
    "mixture_sample",
    "proxy_levels",
    "truth_grid",
    "DegenerateSampleError",
    "kde_bandwidth",
    "kde_window",
    "kde_eval_points",
    "kde_eval_grid",
]

WEIGHT_ATOL = 1e-12


class Kind(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    STUDENT_T = "StudentT"


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: tuple[float, float]
    covariance: tuple[tuple[float, float], tuple[float, float]]
    kind: Kind = Kind.GAUSSIAN
    dof: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        cov = np.asarray(self.covariance, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-15):
            raise ValueError("covariance must be symmetric")
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "covariance", tuple(map(tuple, cov.tolist())))
        object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))
        if self.kind is Kind.STUDENT_T:
            if self.dof is None or not self.dof > 0:
                raise ValueError("Student-t components need dof > 0")
        if not 0 <= self.weight <= 1:
            raise ValueError("weight must be a probability")

    @property
    def cov(self) -> np.ndarray:
        return np.array(self.covariance)

    def marginal_sd(self) -> np.ndarray:
        """Per-axis standard deviation (scale-adjusted for Student-t)."""
        var = np.diag(self.cov).copy()
        if self.kind is Kind.STUDENT_T:
            var *= self.dof / (self.dof - 2) if self.dof > 2 else 1.0
        return np.sqrt(var)

    def pdf(self, x: np.ndarray) -> np.ndarray:
        cov = self.cov
        diff = np.asarray(x, dtype=float).reshape(-1, 2) - np.asarray(self.mean)
        L = np.linalg.cholesky(cov)
        z = np.linalg.solve(L, diff.T)
        q = np.sum(z * z, axis=0)
        sqrt_det = L[0, 0] * L[1, 1]
        if self.kind is Kind.GAUSSIAN:
            return np.exp(-0.5 * q) / (2.0 * math.pi * sqrt_det)
        nu = self.dof
        log_c = (
            math.lgamma((nu + 2) / 2)
            - math.lgamma(nu / 2)
            - math.log(nu * math.pi * sqrt_det)
        )
        return np.exp(log_c - (nu + 2) / 2 * np.log1p(q / nu))

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind.value,
            "weight": self.weight,
            "mean": list(self.mean),
            "covariance": [v for row in self.covariance for v in row],
        }
        if self.dof is not None:
            doc["dof"] = self.dof
        return doc


@dataclass(frozen=True)
class MixtureDensity:
    components: tuple[MixtureComponent, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ValueError("a mixture needs at least one component")
        total = math.fsum(c.weight for c in comps)
        if abs(total - 1.0) > WEIGHT_ATOL:
            raise ValueError(f"mixture weights sum to {total}, not 1")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def pdf(self, x) -> np.ndarray:
        return mixture_pdf(self, x)

    def bounding_box(self, n_sd: float = 5.0) -> tuple[float, float, float, float]:
        """``(xmin, xmax, ymin, ymax)`` covering every component's mean +- ``n_sd`` SD."""
        lo = np.min([np.asarray(c.mean) - n_sd * c.marginal_sd() for c in self.components], 0)
        hi = np.max([np.asarray(c.mean) + n_sd * c.marginal_sd() for c in self.components], 0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    def to_json(self) -> list:
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, doc, name="") -> "MixtureDensity":
        if isinstance(doc, str):
            doc = json.loads(doc)
        comps = []
        for item in doc:
            cov = item["covariance"]
            comps.append(
                MixtureComponent(
                    weight=float(item["weight"]),
                    mean=tuple(item["mean"]),
                    covariance=((cov[0], cov[1]), (cov[2], cov[3])),
                    kind=Kind(item.get("kind", "Gaussian")),
                    dof=item.get("dof"),
                )
            )
        return cls(tuple(comps), name=name)


def _paper2(rho):
    iso = ((1 / 8, 0.0), (0.0, 1 / 8))
    tilt = ((1 / 8, rho / 8), (rho / 8, 1 / 8))
    return (
        MixtureComponent(4 / 11, (-1, 1), iso),
        MixtureComponent(3 / 11, (0, 0), tilt),
        MixtureComponent(4 / 11, (1, -1), iso),
    )


_T_SCALE = ((1 / 4, 0.0), (0.0, 1.0))

PRESETS = {
    "paper-1": MixtureDensity(
        (MixtureComponent(1.0, (-1, 0), ((1 / 4, 0.0), (0.0, 1.0))),), name="paper-1"
    ),
    # central component elongated along the line through the outer modes;
    # this orientation reproduces the published decile levels
    "paper-2": MixtureDensity(_paper2(-0.9), name="paper-2"),
    # same mixture with the correlation sign as printed in the density formula
    "paper-2-text": MixtureDensity(_paper2(0.9), name="paper-2-text"),
    "paper-3": MixtureDensity(
        (
            MixtureComponent(1 / 4, (-1, 0), _T_SCALE, Kind.STUDENT_T, 10.0),
            MixtureComponent(3 / 4, (1, 0), _T_SCALE, Kind.STUDENT_T, 10.0),
        ),
        name="paper-3",
    ),
    "std-normal": MixtureDensity(
        (MixtureComponent(1.0, (0, 0), ((1.0, 0.0), (0.0, 1.0))),), name="std-normal"
    ),
}


def preset(name: str) -> MixtureDensity:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def mixture_pdf(mix: MixtureDensity, x) -> np.ndarray:
    """Mixture density at ``x`` (shape ``(2,)`` or ``(n, 2)``)."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    out = np.zeros(pts.shape[0])
    for c in mix.components:
        out += c.weight * c.pdf(pts)
    return out[0] if single else out


def mixture_sample(mix: MixtureDensity, n: int, seed: int, return_labels=False):
    """Draw ``n`` points; deterministic for a given seed.

    The component of each draw is picked by inverting the cumulative weights
    at a uniform variate. Gaussian draws are ``mean + L z`` with ``L`` the
    Cholesky factor; Student-t draws divide that by ``sqrt(chi2_nu / nu)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_for(seed)
    cum = np.cumsum(mix.weights)
    cum[-1] = 1.0
    labels = np.searchsorted(cum, rng.random(n), side="right")
    z = rng.standard_normal((n, 2))
    chi2 = {}
    for k, c in enumerate(mix.components):
        if c.kind is Kind.STUDENT_T:
            chi2[k] = rng.chisquare(c.dof, n)
    out = np.empty((n, 2))
    for k, c in enumerate(mix.components):
        idx = labels == k
        L = np.linalg.cholesky(c.cov)
        draw = z[idx] @ L.T
        if c.kind is Kind.STUDENT_T:
            draw *= np.sqrt(c.dof / chi2[k][idx])[:, None]
        out[idx] = draw + np.asarray(c.mean)
    if return_labels:
        return out, labels
    return out


def proxy_levels(
    mix: MixtureDensity, taus: Sequence[float], N: int = 10**6, seed: int = 0
) -> ContourLevels:
    """Monte-Carlo density contour levels of a known mixture.

    Evaluates the true density at ``N`` draws and takes the
    ``(1 - tau)``-quantile for each tau.
    """
    taus = _check_taus(taus)
    x = mixture_sample(mix, N, seed)
    return _upper_quantile_levels(mixture_pdf(mix, x), taus, Method.DENSITY)


def truth_grid(mix: MixtureDensity, dims=(301, 301), n_sd: float = 5.0) -> Grid:
    """True density at cell centers over the +-``n_sd`` SD box, normalized to unit mass."""
    geom = Geometry.covering(*mix.bounding_box(n_sd), dims=dims)
    vals = mixture_pdf(mix, geom.centers())
    vals = vals / (geom.cell_hypervolume * math.fsum(vals))
    return Grid(geom, vals)


class DegenerateSampleError(ValueError):
    pass


def kde_bandwidth(sample) -> np.ndarray:
    """Normal-reference bandwidth matrix ``(4 / (d + 2))^(2 / (d + 4)) n^(-2 / (d + 4)) S``.

    With ``d = 2`` this is ``n^(-1/3) S``, ``S`` the sample covariance.
    """
    x = np.asarray(sample, dtype=float)
    n, d = x.shape
    if n < 2:
        raise DegenerateSampleError("need at least two points for a bandwidth")
    cov = np.cov(x, rowvar=False)
    eig = np.linalg.eigvalsh(cov)
    if not eig.min() > 1e-12 * max(eig.max(), np.finfo(float).tiny):
        raise DegenerateSampleError("sample covariance is singular")
    const = (4.0 / (d + 2)) ** (2.0 / (d + 4))
    return const * n ** (-2.0 / (d + 4)) * cov


def _kernel_sum(sample, H, queries, chunk=2048):
    x = np.asarray(sample, dtype=float).reshape(-1, 2)
    q = np.asarray(queries, dtype=float).reshape(-1, 2)
    H = np.asarray(H, dtype=float)
    L = np.linalg.cholesky(H)
    Linv = np.linalg.inv(L)
    xw = x @ Linv.T
    qw = q @ Linv.T
    norm = 1.0 / (2.0 * math.pi * L[0, 0] * L[1, 1] * x.shape[0])
    out = np.empty(q.shape[0])
    for s in range(0, q.shape[0], chunk):
        block = qw[s : s + chunk]
        d2 = (
            (block[:, 0, None] - xw[None, :, 0]) ** 2
            + (block[:, 1, None] - xw[None, :, 1]) ** 2
        )
        out[s : s + chunk] = np.exp(-0.5 * d2).sum(axis=1) * norm
    return out


def kde_eval_points(sample, H, queries) -> np.ndarray:
    """Gaussian KDE ``n^-1 sum_i phi_H(q - X_i)`` at arbitrary query points."""
    q = np.asarray(queries, dtype=float)
    if q.size == 0:
        return np.empty(0)
    return _kernel_sum(sample, H, q)


def kde_eval_grid(sample, H, geometry: Geometry) -> Grid:
    """Gaussian KDE evaluated at every cell center of ``geometry``."""
    return Grid(geometry, _kernel_sum(sample, H, geometry.centers()))


def kde_window(sample, H, dims, pad_sd: float = 3.0) -> Geometry:
    """Sample bounding box padded by ``pad_sd`` marginal kernel SDs."""
    x = np.asarray(sample, dtype=float)
    sd = np.sqrt(np.diag(np.asarray(H)))
    lo = x.min(axis=0) - pad_sd * sd
    hi = x.max(axis=0) + pad_sd * sd
    return Geometry.covering(lo[0], hi[0], lo[1], hi[1], dims)
