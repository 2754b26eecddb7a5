"""Regenerate the bundled synthetic fixture CSVs under tests/fixtures/.

100 assets, 600 trading days.  Each return series is an independent GARCH(1,1)
simulation plus a common GARCH market shock, so the volatility correlation
matrix has a clear market mode while most of its spectrum stays in the random
bulk (the number-variance stage needs at least 50 bulk eigenvalues).
"""

from __future__ import annotations

import os

import numpy as np

from volspectra import garch
from volspectra.pipeline import write_csv, write_panel_csv

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "tests", "fixtures")

N_ASSETS = 100
N_DAYS = 600
LOADING = 0.45
SEED = 20240601

# 20 groups with sizes cycling 4/6/5/5 (sums to 100)
GROUP_NAMES = [
    "Automobiles", "Consumer Durables", "Consumer Services", "Retailing",
    "Food & Staples", "Food Beverage", "Household Products", "Health Equipment",
    "Pharmaceuticals", "Banks", "Diversified Financials", "Insurance",
    "Real Estate", "Software", "Tech Hardware", "Semiconductors",
    "Telecom", "Utilities", "Energy", "Materials",
]
GROUP_SIZES = [4, 6, 5, 5] * 5


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    params = garch.GarchParams(2e-5, 0.20, 0.50)
    market, _ = garch.simulate_garch(params, N_DAYS, seed=SEED)
    returns = np.empty((N_ASSETS, N_DAYS))
    for i in range(N_ASSETS):
        own, _ = garch.simulate_garch(params, N_DAYS, seed=SEED + 1 + i)
        returns[i] = LOADING * market + own
    prices = 100.0 * np.exp(np.concatenate([np.zeros((N_ASSETS, 1)), np.cumsum(returns, axis=1)], axis=1))

    tickers = [f"T{i + 1:03d}" for i in range(N_ASSETS)]
    dates = [f"d{d + 1:05d}" for d in range(N_DAYS + 1)]
    write_panel_csv(os.path.join(OUT, "prices.csv"), tickers, dates, prices)

    rows = []
    asset = 0
    for g, (name, size) in enumerate(zip(GROUP_NAMES, GROUP_SIZES)):
        code = str(2510 + 10 * g)
        for _ in range(size):
            rows.append([tickers[asset], code, name])
            asset += 1
    assert asset == N_ASSETS
    rows.sort(key=lambda r: r[0])
    write_csv(os.path.join(OUT, "industry.csv"), ["ticker", "gics_group_code", "group_name"], rows)
    print(f"wrote fixtures for {N_ASSETS} assets x {N_DAYS + 1} days to {OUT}")


if __name__ == "__main__":
    main()
