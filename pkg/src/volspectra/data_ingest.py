"""Price/industry ingestion and elementary series transforms.

Loads price and GICS-group CSVs, computes log returns, row-normalized panels,
volatility returns, and marginal-distribution diagnostics (log-volatility
moments, Hill tail exponent).  Time averages use the population convention
(divisor T) unless a caller asks otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class PricePanel:
    """N assets by T+1 trading days of positive closing prices."""

    assets: list[str]
    dates: list[str]
    prices: np.ndarray  # shape (N, T+1)

    def __post_init__(self) -> None:
        self.prices = np.asarray(self.prices, dtype=float)
        if self.prices.ndim != 2:
            raise DataError("prices must be a 2-D matrix")
        n, cols = self.prices.shape
        if n != len(self.assets) or cols != len(self.dates):
            raise DataError("prices shape does not match assets/dates")
        if not np.all(np.isfinite(self.prices)):
            raise DataError("prices contain missing or non-finite cells")
        bad = np.argwhere(self.prices <= 0)
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-positive price for {self.assets[i]} at {self.dates[j]}")


@dataclass
class ReturnPanel:
    assets: list[str]
    returns: np.ndarray  # shape (N, T)


@dataclass
class NormalizedPanel:
    """Rows shifted to mean zero and scaled to unit variance."""

    data: np.ndarray
    means: np.ndarray
    stds: np.ndarray


@dataclass
class IndustryGroup:
    code: str
    name: str
    members: list[str] = field(default_factory=list)


@dataclass
class IndustryMap:
    """Partition of the asset universe into GICS industry groups."""

    groups: list[IndustryGroup]
    membership: dict[str, int]  # asset -> index into groups

    def __post_init__(self) -> None:
        for g in self.groups:
            if not g.members:
                raise DataError(f"industry group {g.code} is empty")
        seen: set[str] = set()
        for g in self.groups:
            for a in g.members:
                if a in seen:
                    raise DataError(f"asset {a} assigned to more than one group")
                seen.add(a)
        if seen != set(self.membership):
            raise DataError("membership does not match group member lists")

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def sizes(self) -> np.ndarray:
        return np.array([len(g.members) for g in self.groups])

    def indices_for(self, assets: list[str]) -> np.ndarray:
        """Group index per asset, in the given asset order."""
        try:
            return np.array([self.membership[a] for a in assets])
        except KeyError as exc:
            raise DataError(f"asset {exc.args[0]} missing from industry map") from exc


def load_price_csv(path: str) -> tuple[PricePanel, list[str]]:
    """Read a ``date,TICKER1,...`` price CSV.

    Assets with any missing or non-positive cell in the window are dropped;
    the second return value lists them.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 3:
        raise DataError(f"{path}: need a header and at least two price rows")
    header = rows[0]
    if header[0].strip().lower() != "date" or len(header) < 2:
        raise DataError(f"{path}: expected header 'date,TICKER1,...'")
    assets = [h.strip() for h in header[1:]]
    dates = []
    cells = np.full((len(rows) - 1, len(assets)), np.nan)
    for r, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DataError(f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}")
        dates.append(row[0].strip())
        for c, value in enumerate(row[1:]):
            value = value.strip()
            if value:
                try:
                    cells[r, c] = float(value)
                except ValueError as exc:
                    raise DataError(f"{path}: bad price {value!r} at row {r + 2}") from exc
    if any(a <= b for a, b in zip(dates[1:], dates)):
        raise DataError(f"{path}: dates must be strictly increasing")
    keep = np.all(np.isfinite(cells) & (cells > 0), axis=0)
    dropped = [a for a, k in zip(assets, keep) if not k]
    kept = [a for a, k in zip(assets, keep) if k]
    if len(kept) < 2:
        raise DataError(f"{path}: fewer than two complete asset series")
    return PricePanel(kept, dates, cells[:, keep].T.copy()), dropped


def load_panel_csv(path: str) -> tuple[list[str], list[str], np.ndarray]:
    """Read a panel in the price-CSV schema without the positivity check.

    Returns (labels, dates, values) with values shaped (N, T); used for raw
    return/volatility panels emitted by the CLI.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise DataError(f"{path}: empty panel")
    header = rows[0]
    if header[0].strip().lower() != "date":
        raise DataError(f"{path}: expected header 'date,LABEL1,...'")
    labels = [h.strip() for h in header[1:]]
    dates = [r[0].strip() for r in rows[1:]]
    try:
        values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell") from exc
    if values.shape[1] != len(labels):
        raise DataError(f"{path}: ragged rows")
    return labels, dates, values.T.copy()


def load_industry_csv(path: str, assets: list[str] | None = None) -> IndustryMap:
    """Read a ``ticker,gics_group_code,group_name`` classification CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty industry file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:3] != ["ticker", "gics_group_code", "group_name"]:
        raise DataError(f"{path}: expected header 'ticker,gics_group_code,group_name'")
    wanted = set(assets) if assets is not None else None
    by_code: dict[str, IndustryGroup] = {}
    membership: dict[str, int] = {}
    order: list[str] = []
    for r, row in enumerate(rows[1:]):
        if len(row) < 3:
            raise DataError(f"{path}: row {r + 2} is incomplete")
        ticker, code, name = row[0].strip(), row[1].strip(), row[2].strip()
        if len(code) != 4 or not code.isdigit():
            raise DataError(f"{path}: {ticker}: GICS group code {code!r} is not 4 digits")
        if wanted is not None and ticker not in wanted:
            continue
        if ticker in membership:
            raise DataError(f"{path}: duplicate ticker {ticker}")
        if code not in by_code:
            by_code[code] = IndustryGroup(code, name)
            order.append(code)
        by_code[code].members.append(ticker)
        membership[ticker] = order.index(code)
    if wanted is not None:
        missing = wanted - set(membership)
        if missing:
            raise DataError(f"{path}: no classification for {sorted(missing)[:5]}")
    groups = [by_code[c] for c in order]
    return IndustryMap(groups, membership)


def log_returns(panel: PricePanel) -> ReturnPanel:
    """r[i, t] = ln(P[i, t+1] / P[i, t])."""
    if panel.prices.shape[1] < 2:
        raise DataError("need at least two dates to form returns")
    return ReturnPanel(panel.assets, np.diff(np.log(panel.prices), axis=1))


def normalize_rows(matrix: np.ndarray, ddof: int = 0) -> NormalizedPanel:
    """Shift each row to mean zero and scale to unit variance.

    ``ddof=0`` (the default) divides by T, matching time-average brackets;
    pass ``ddof=1`` for the sample convention.
    """
    data = np.asarray(matrix, dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[1] < 2:
        raise DataError("rows need at least two observations")
    means = data.mean(axis=1)
    stds = data.std(axis=1, ddof=ddof)
    flat = np.nonzero(stds <= 0)[0]
    if flat.size:
        raise DataError(f"row {flat[0]} has zero variance, cannot normalize")
    out = (data - means[:, None]) / stds[:, None]
    return NormalizedPanel(out, means, stds)


def volatility_returns(sigma: np.ndarray) -> np.ndarray:
    """Log change of each volatility path: ln(sigma[t+1] / sigma[t])."""
    sig = np.asarray(sigma, dtype=float)
    if sig.ndim == 1:
        sig = sig[None, :]
    if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
        raise DataError("volatility paths must be positive and finite")
    return np.diff(np.log(sig), axis=1)


@dataclass
class LogVolatilityStats:
    mean: float
    std: float
    skewness: float
    kurtosis: float
    gaussian_mean: float
    gaussian_std: float
    n: int
    degenerate: bool


def log_volatility_stats(sigma: np.ndarray) -> LogVolatilityStats:
    """Pooled moments of ln(sigma), with the Gaussian (mean, std) MLE fit.

    Kurtosis is the raw fourth standardized moment (3 for a Gaussian).  A
    constant sample is flagged degenerate with NaN shape moments.
    """
    sig = np.asarray(sigma, dtype=float).ravel()
    if sig.size == 0:
        raise DataError("empty volatility sample")
    if np.any(sig <= 0):
        raise DataError("volatility must be positive")
    x = np.log(sig)
    mean = float(x.mean())
    centered = x - mean
    m2 = float(np.mean(centered**2))
    std = math.sqrt(m2)
    if m2 <= 0:
        return LogVolatilityStats(mean, 0.0, math.nan, math.nan, mean, 0.0, sig.size, True)
    skew = float(np.mean(centered**3)) / m2**1.5
    kurt = float(np.mean(centered**4)) / m2**2
    return LogVolatilityStats(mean, std, skew, kurt, mean, std, sig.size, False)


@dataclass
class TailFit:
    exponent: float
    stderr: float
    k: int
    stable: bool
    drift: float  # exponent change from k to k/2, in combined-stderr units


def tail_exponent(sample: np.ndarray, k: int) -> TailFit:
    """Hill estimate of the upper-tail power-law exponent over the k largest values.

    The stability diagnostic re-estimates at k/2; a drift beyond three
    combined standard errors flags the absence of a stable power law.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    x = x[x > 0]
    if k < 10:
        raise DataError("tail count k must be at least 10")
    if k >= x.size:
        raise DataError(f"tail count k={k} needs more than k positive values (have {x.size})")

    def hill(kk: int) -> tuple[float, float]:
        tail = x[-kk:]
        threshold = x[-kk - 1]
        gamma = float(np.mean(np.log(tail) - np.log(threshold)))
        if gamma <= 0:
            raise DataError("degenerate tail (ties at the threshold)")
        alpha = 1.0 / gamma
        return alpha, alpha / math.sqrt(kk)

    alpha, se = hill(k)
    k_half = max(10, k // 2)
    alpha_half, se_half = hill(k_half)
    drift = (alpha_half - alpha) / math.hypot(se, se_half)
    return TailFit(alpha, se, k, abs(drift) <= 3.0, drift)
