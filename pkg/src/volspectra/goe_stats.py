"""Short- and long-range eigenvalue correlation statistics.

Spacing distributions against the Wigner surmises (GOE/GUE/GSE), one-sample
Kolmogorov-Smirnov tests with the asymptotic tail probability, histogram
normalization fits, and the number variance with its exact GOE reference
curve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, sici

from .errors import DataError
from .unfold import UnfoldedSpectrum

ENSEMBLES = ("goe", "gue", "gse")

_GSE_A = 2.0**18 / (3.0**6 * np.pi**3)
_GSE_B = 64.0 / (9.0 * np.pi)


@dataclass
class SpacingSample:
    spacings: np.ndarray
    kind: str  # "nearest" | "next_nearest"

    @property
    def n(self) -> int:
        return self.spacings.size

    @property
    def mean(self) -> float:
        return float(self.spacings.mean())


@dataclass
class KSResult:
    statistic: float
    p_value: float
    n: int


@dataclass
class NumberVarianceCurve:
    ells: np.ndarray
    empirical: np.ndarray
    theory_goe: np.ndarray
    poisson: np.ndarray
    centers: np.ndarray  # number of window centers per ell


def _trim(xi: np.ndarray, trim: float) -> np.ndarray:
    if not 0 <= trim < 0.5:
        raise DataError("trim fraction must lie in [0, 0.5)")
    drop = int(xi.size * trim)
    return xi[drop : xi.size - drop] if drop else xi


def spacings(unfolded: UnfoldedSpectrum, trim: float = 0.05) -> SpacingSample:
    """Nearest-neighbor spacings of the unfolded spectrum after edge trimming."""
    xi = _trim(unfolded.xi, trim)
    if xi.size < 2:
        raise DataError("need at least two unfolded eigenvalues")
    return SpacingSample(np.diff(xi), "nearest")


def next_nearest_spacings(
    even: UnfoldedSpectrum, odd: UnfoldedSpectrum, trim: float = 0.05
) -> SpacingSample:
    """Next-to-nearest spacings: pooled nearest spacings of the parity subsets."""
    d = np.concatenate([np.diff(_trim(even.xi, trim)), np.diff(_trim(odd.xi, trim))])
    if d.size < 2:
        raise DataError("not enough spacings after trimming")
    return SpacingSample(d, "next_nearest")


def wigner_pdf(d: np.ndarray | float, ensemble: str) -> np.ndarray | float:
    """Wigner-surmise spacing density for the requested ensemble (unit mean)."""
    x = np.asarray(d, dtype=float)
    if ensemble == "goe":
        out = (np.pi * x / 2.0) * np.exp(-np.pi * x**2 / 4.0)
    elif ensemble == "gue":
        out = (32.0 / np.pi**2) * x**2 * np.exp(-4.0 * x**2 / np.pi)
    elif ensemble == "gse":
        out = _GSE_A * x**4 * np.exp(-_GSE_B * x**2)
    else:
        raise DataError(f"unknown ensemble {ensemble!r}")
    out = np.where(x < 0, 0.0, out)
    return out if np.ndim(d) else float(out)


def wigner_cdf(d: np.ndarray | float, ensemble: str) -> np.ndarray | float:
    """Closed-form CDF of the Wigner surmises."""
    x = np.maximum(np.asarray(d, dtype=float), 0.0)
    if ensemble == "goe":
        out = 1.0 - np.exp(-np.pi * x**2 / 4.0)
    elif ensemble == "gue":
        out = erf(2.0 * x / np.sqrt(np.pi)) - (4.0 * x / np.pi) * np.exp(-4.0 * x**2 / np.pi)
    elif ensemble == "gse":
        b = _GSE_B
        out = erf(np.sqrt(b) * x) - _GSE_A * np.exp(-b * x**2) * (x**3 / (2.0 * b) + 3.0 * x / (4.0 * b**2))
    else:
        raise DataError(f"unknown ensemble {ensemble!r}")
    return out if np.ndim(d) else float(out)


def kolmogorov_sf(t: float) -> float:
    """Asymptotic Kolmogorov tail probability Q(t) = 2 sum (-1)^(j-1) exp(-2 j^2 t^2)."""
    if t <= 0.01:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * t * t)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
    return min(max(2.0 * total, 0.0), 1.0)


def ks_test(sample: np.ndarray, cdf) -> KSResult:
    """One-sample two-sided KS test against a continuous reference CDF.

    The p-value uses the asymptotic Kolmogorov series with the Stephens
    small-sample rescaling sqrt(n) + 0.12 + 0.11/sqrt(n).
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise DataError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    if np.any(f < -1e-12) or np.any(f > 1 + 1e-12):
        raise DataError("reference CDF left [0, 1]")
    grid = np.arange(1, n + 1) / n
    d = float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))
    root_n = math.sqrt(n)
    p = kolmogorov_sf((root_n + 0.12 + 0.11 / root_n) * d)
    return KSResult(d, p, n)


@dataclass
class NormalizationFit:
    beta: float
    stderr: float
    bins: int


def fit_normalization(sample: SpacingSample, ensemble: str, bin_width: float | None = None) -> NormalizationFit:
    """Least-squares scale of the spacing histogram against beta * P_ensemble.

    Bins are Freedman-Diaconis by default; trailing empty bins are dropped
    before the fit.
    """
    d = sample.spacings
    if d.size < 50:
        raise DataError("need at least 50 spacings to fit a normalization")
    if bin_width is None:
        iqr = float(np.subtract(*np.percentile(d, [75, 25])))
        bin_width = 2.0 * iqr / d.size ** (1.0 / 3.0)
        if bin_width <= 0:
            raise DataError("degenerate spacing sample (zero interquartile range)")
    edges = np.arange(0.0, d.max() + bin_width, bin_width)
    if edges.size < 3:
        raise DataError("bin width too large for the sample range")
    counts, edges = np.histogram(d, bins=edges)
    density = counts / (d.size * bin_width)
    centers = (edges[:-1] + edges[1:]) / 2.0
    last = np.nonzero(counts)[0][-1]
    density, centers = density[: last + 1], centers[: last + 1]
    expected = np.asarray(wigner_pdf(centers, ensemble))
    keep = expected > 0
    density, expected = density[keep], expected[keep]
    if density.size < 3:
        raise DataError("too few populated bins for the fit")
    denom = float(expected @ expected)
    beta = float(density @ expected) / denom
    resid = density - beta * expected
    sigma_sq = float(resid @ resid) / max(density.size - 1, 1)
    return NormalizationFit(beta, math.sqrt(sigma_sq / denom), density.size)


def goe_number_variance_theory(ell: float) -> float:
    """Exact GOE number variance ell - 2 * integral_0^ell (ell - r) Y2(r) dr.

    Y2(r) = y(r)^2 + y'(r) * (1/2 - Si(pi r)/pi) with y(r) = sin(pi r)/(pi r).
    """
    if ell < 0:
        raise DataError("window length must be nonnegative")
    if ell == 0:
        return 0.0

    def y2(r: float) -> float:
        if r == 0.0:
            return 1.0
        pr = math.pi * r
        y = math.sin(pr) / pr
        dy = (math.cos(pr) - y) / r
        tail = 0.5 - sici(pr)[0] / math.pi
        return y * y + dy * tail

    integral, _ = quad(lambda r: (ell - r) * y2(r), 0.0, ell, epsabs=1e-8, limit=200)
    return ell - 2.0 * integral


def number_variance(
    unfolded: UnfoldedSpectrum,
    ells: np.ndarray,
    trim: float = 0.10,
    theoretical_mean: bool = False,
    with_theory: bool = True,
) -> NumberVarianceCurve:
    """Variance of the unfolded-level count in sliding windows of length ell.

    Windows [xi_i - ell/2, xi_i + ell/2) are centered on bulk levels only:
    centers whose window pokes past the trimmed range are skipped, and grid
    values too long for the spectrum are dropped with a warning.  The variance
    is taken about the empirical mean count unless ``theoretical_mean`` asks
    for the ideal <n> = ell.
    """
    xi = unfolded.xi
    if xi.size < 50:
        raise DataError("need at least 50 unfolded eigenvalues")
    bulk = _trim(xi, trim)
    span = float(xi[-1] - xi[0])
    kept_ells, variances, n_centers = [], [], []
    for ell in np.asarray(ells, dtype=float):
        if ell < 0:
            raise DataError("window lengths must be nonnegative")
        if ell > span / 4.0:
            warnings.warn(f"window ell={ell:g} exceeds a quarter of the spectrum; skipped", stacklevel=2)
            continue
        centers = bulk[(bulk - ell / 2.0 >= bulk[0]) & (bulk + ell / 2.0 <= bulk[-1])]
        if centers.size < 2:
            warnings.warn(f"window ell={ell:g} leaves fewer than two centers; skipped", stacklevel=2)
            continue
        counts = np.searchsorted(xi, centers + ell / 2.0, side="left") - np.searchsorted(
            xi, centers - ell / 2.0, side="left"
        )
        mean = ell if theoretical_mean else counts.mean()
        variances.append(float(np.mean((counts - mean) ** 2)))
        kept_ells.append(float(ell))
        n_centers.append(centers.size)
    ells_arr = np.array(kept_ells)
    theory = np.array([goe_number_variance_theory(l) for l in ells_arr]) if with_theory else np.full(ells_arr.size, np.nan)
    return NumberVarianceCurve(ells_arr, np.array(variances), theory, ells_arr.copy(), np.array(n_centers))
