"""Market-mode removal, industry projections, and eigenvector diagnostics.

The market mode is the eigenvector of the largest correlation eigenvalue;
regressing every row on its time series and re-correlating the normalized
residuals produces a rank-deficient matrix whose spectrum, after a homogeneous
rescaling, tracks the original bulk.  Industry structure is read off through
group weight vectors and their inverse participation ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .data_ingest import IndustryMap, NormalizedPanel
from .errors import DataError
from .goe_stats import KSResult, ks_test
from .spectrum import CorrelationMatrix, SpectralDecomposition, correlation, eigendecompose


@dataclass
class MarketRegression:
    market: np.ndarray  # length-T market series
    alphas: np.ndarray  # per-asset intercepts
    betas: np.ndarray  # per-asset slopes
    residuals: np.ndarray  # (N, T), un-normalized
    residual_stds: np.ndarray  # per-asset population std of the residuals


@dataclass
class WeightVector:
    rho: np.ndarray  # length-g industry weights, summing to 1
    gamma: float  # normalization constant applied
    ipr: float  # sum of rho^4


@dataclass
class KurtosisReport:
    kappas: np.ndarray
    mean: float


@dataclass
class RescalingReport:
    factor: float  # (N - lambda_max) / N
    max_relative_deviation: float
    median_relative_deviation: float


@dataclass
class EigvecStats:
    mean: float
    variance: float
    excess_kurtosis: float
    ks: KSResult


def _panel_data(panel: NormalizedPanel | np.ndarray) -> np.ndarray:
    data = panel.data if isinstance(panel, NormalizedPanel) else np.asarray(panel, dtype=float)
    if data.ndim != 2:
        raise DataError("panel must be 2-D")
    return data


def market_mode_series(panel: NormalizedPanel | np.ndarray, top_eigenvector: np.ndarray) -> np.ndarray:
    """M_t = sum_i v_i G_it for the v^T v = N top eigenvector."""
    data = _panel_data(panel)
    v = np.asarray(top_eigenvector, dtype=float)
    if v.size != data.shape[0]:
        raise DataError("eigenvector length does not match the panel")
    return v @ data


def remove_market_mode(
    panel: NormalizedPanel | np.ndarray, market: np.ndarray
) -> tuple[MarketRegression, CorrelationMatrix, SpectralDecomposition]:
    """Regress each row on the market series and re-correlate the residuals.

    Residuals are scaled to unit variance before the correlation, so the
    result is a true correlation matrix; it carries exactly one (numerically)
    zero eigenvalue because the market combination of the residuals vanishes.
    """
    data = _panel_data(panel)
    m = np.asarray(market, dtype=float)
    if m.size != data.shape[1]:
        raise DataError("market series length does not match the panel")
    m_mean = m.mean()
    m_center = m - m_mean
    var_m = float(m_center @ m_center) / m.size
    if var_m <= 0:
        raise DataError("market series is constant")
    row_means = data.mean(axis=1)
    betas = (data - row_means[:, None]) @ m_center / (m.size * var_m)
    alphas = row_means - betas * m_mean
    residuals = data - alphas[:, None] - betas[:, None] * m[None, :]
    stds = residuals.std(axis=1)
    if np.any(stds <= 0):
        raise DataError("an asset is perfectly explained by the market series")
    corr = correlation(residuals / stds[:, None], kind="residual")
    decomp = eigendecompose(corr)
    return MarketRegression(m, alphas, betas, residuals, stds), corr, decomp


def residual_correlation_identity(
    corr: np.ndarray, betas: np.ndarray, residual_stds: np.ndarray, lambda_max: float
) -> np.ndarray:
    """Residual correlation rebuilt from the original one.

    C_tilde[i, j] = (C[i, j] - beta_i beta_j lambda_max N) / (s_i s_j); exact
    when the market series came from the top eigenvector of C.
    """
    c = np.asarray(corr, dtype=float)
    n = c.shape[0]
    outer = np.outer(betas, betas) * lambda_max * n
    scale = np.outer(residual_stds, residual_stds)
    return (c - outer) / scale


def rescaling_check(
    lambda_original: np.ndarray, lambda_residual: np.ndarray, lambda_max: float, n: int
) -> RescalingReport:
    """Compare residual eigenvalues, rescaled by (N - lambda_max)/N, with the originals.

    The largest original eigenvalue and the zero residual eigenvalue are
    excluded before pairing the ascending spectra.
    """
    orig = np.sort(np.asarray(lambda_original, dtype=float))[:-1]
    resid = np.sort(np.asarray(lambda_residual, dtype=float))[1:]
    if orig.size != resid.size:
        raise DataError("spectra must come from the same panel")
    factor = (n - lambda_max) / n
    rescaled = resid * factor
    denom = np.maximum(np.abs(orig), 1e-12)
    rel = np.abs(rescaled - orig) / denom
    return RescalingReport(factor, float(rel.max()), float(np.median(rel)))


def weight_vectors(eigenvectors: np.ndarray, industry: IndustryMap, assets: list[str]) -> list[WeightVector]:
    """Industry weight vector and IPR for each eigenvector column.

    Components are squared, projected by the 1/n_a group-membership matrix,
    and normalized to unit sum.
    """
    v = np.asarray(eigenvectors, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != len(assets):
        raise DataError("eigenvector length does not match the asset list")
    idx = industry.indices_for(assets)
    sizes = industry.sizes().astype(float)
    g = industry.n_groups
    out: list[WeightVector] = []
    for col in range(v.shape[1]):
        u = v[:, col] ** 2
        raw = np.bincount(idx, weights=u, minlength=g) / sizes
        total = float(raw.sum())
        if total <= 0:
            raise DataError("eigenvector has zero norm")
        rho = raw / total
        out.append(WeightVector(rho, 1.0 / total, float(np.sum(rho**4))))
    return out


def ipr_powerlaw_fit(eigenvalues: np.ndarray, iprs: np.ndarray) -> tuple[float, float]:
    """Slope (with stderr) of log IPR against log eigenvalue."""
    lam = np.asarray(eigenvalues, dtype=float)
    ipr = np.asarray(iprs, dtype=float)
    if lam.size != ipr.size or lam.size < 5:
        raise DataError("need at least 5 (eigenvalue, IPR) pairs")
    if np.any(lam <= 0) or np.any(ipr <= 0):
        raise DataError("power-law fit needs positive values")
    x, y = np.log(lam), np.log(ipr)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(x.size - 2, 1)
    sigma_sq = float(resid @ resid) / dof
    cov = sigma_sq * np.linalg.inv(design.T @ design)
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


def gaussianize(series: np.ndarray) -> np.ndarray:
    """Rank-based inverse-normal transform: value -> Phi^-1(rank / (T + 1)).

    Ties get average ranks; any monotone transform of the input maps to the
    same output.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 10:
        raise DataError("need a 1-D series of length >= 10")
    if np.ptp(x) <= 0:
        raise DataError("constant series cannot be gaussianized")
    ranks = rankdata(x, method="average")
    return ndtri(ranks / (x.size + 1.0))


def generalized_kurtosis(
    residuals: np.ndarray, market: np.ndarray, squared_cross_term: bool = False
) -> KurtosisReport:
    """Nonlinear-dependence diagnostic between gaussianized residuals and market.

    kappa_i = <e_i^2 m^2> - <e_i^2><m^2> - 2 <e_i m>, with the cross term
    squared when ``squared_cross_term`` is set.  Inputs are expected to be
    gaussianized already.
    """
    e = np.asarray(residuals, dtype=float)
    if e.ndim == 1:
        e = e[None, :]
    m = np.asarray(market, dtype=float)
    if e.shape[1] != m.size:
        raise DataError("residual rows and market series must share a length")
    m_sq = m**2
    cross = e @ m / m.size
    if squared_cross_term:
        cross = cross**2
    kappas = (e**2) @ m_sq / m.size - (e**2).mean(axis=1) * m_sq.mean() - 2.0 * cross
    return KurtosisReport(kappas, float(kappas.mean()))


def eigvec_component_stats(eigenvector: np.ndarray) -> EigvecStats:
    """Moments and KS distance of the components against the unit normal."""
    v = np.asarray(eigenvector, dtype=float)
    if v.ndim != 1 or v.size < 3:
        raise DataError("need a 1-D eigenvector")
    mean = float(v.mean())
    centered = v - mean
    m2 = float(np.mean(centered**2))
    if m2 <= 0:
        raise DataError("constant eigenvector")
    kurt = float(np.mean(centered**4)) / m2**2 - 3.0
    ks = ks_test(v, ndtr)
    return EigvecStats(mean, m2, kurt, ks)
