"""Seeded generators for synthetic panels, matrices and spectra.

Every statistical test in the suite runs on data produced here.  Generation is
deterministic: a fixed ``SynthSpec`` always yields bit-identical output.  Panel
rows are drawn from per-row Philox streams (seed + row index), so row-parallel
generation cannot change the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

PANEL_KINDS = ("gaussian_wishart", "lognormal_wishart", "powerlaw_wishart", "one_factor_panel")
SPECTRUM_KINDS = ("poisson_spectrum", "picket_fence")
MATRIX_KINDS = ("goe",)
ALL_KINDS = PANEL_KINDS + SPECTRUM_KINDS + MATRIX_KINDS


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic dataset.

    ``n`` is the number of assets (or matrix size, or spectrum length); ``t``
    is the series length and is required for panel kinds.  Distribution knobs
    only apply to the kinds that read them.
    """

    kind: str
    n: int
    t: int | None = None
    seed: int = 0
    lognormal_mu: float = 0.0
    lognormal_sigma: float = 0.379
    pareto_exponent: float = 4.5
    loading: float = 0.5
    loading_spread: float = 0.0
    noise_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise DataError(f"unknown synthetic kind {self.kind!r}")
        if self.n < 2:
            raise DataError("n must be >= 2")
        if self.kind in PANEL_KINDS:
            if self.t is None or self.t < 2:
                raise DataError(f"kind {self.kind!r} needs a series length t >= 2")
        if self.kind == "powerlaw_wishart" and self.pareto_exponent <= 0:
            raise DataError("pareto_exponent must be positive")
        if self.kind == "lognormal_wishart" and self.lognormal_sigma <= 0:
            raise DataError("lognormal_sigma must be positive")


def _stream(seed: int, index: int) -> np.random.Generator:
    # Philox keyed by (seed, stream index): per-row draws are independent of
    # the order rows are generated in.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,))))


def generate(spec: SynthSpec) -> np.ndarray:
    """Produce the dataset described by ``spec``.

    Returns an (n, t) panel for panel kinds, an (n, n) symmetric matrix for
    ``goe``, and a sorted length-n vector for spectrum kinds.
    """
    n, t = spec.n, spec.t
    if spec.kind == "gaussian_wishart":
        return _rows(spec, lambda rng: rng.standard_normal(t))
    if spec.kind == "lognormal_wishart":
        return _rows(spec, lambda rng: rng.lognormal(spec.lognormal_mu, spec.lognormal_sigma, t))
    if spec.kind == "powerlaw_wishart":
        # two-sided Pareto: |x| = u^(-1/a) has tail exponent a
        def draw(rng: np.random.Generator) -> np.ndarray:
            mag = rng.uniform(size=t) ** (-1.0 / spec.pareto_exponent)
            sign = rng.choice((-1.0, 1.0), size=t)
            return mag * sign

        return _rows(spec, draw)
    if spec.kind == "one_factor_panel":
        factor = _stream(spec.seed, n).standard_normal(t)
        spread = spec.loading_spread
        rows = np.empty((n, t))
        for i in range(n):
            rng = _stream(spec.seed, i)
            beta = spec.loading * (1.0 + spread * (rng.uniform() - 0.5) * 2.0)
            rows[i] = beta * factor + spec.noise_scale * rng.standard_normal(t)
        return rows
    if spec.kind == "goe":
        a = _stream(spec.seed, 0).standard_normal((n, n))
        # off-diagonal variance 1, diagonal variance 2
        return (a + a.T) / np.sqrt(2.0)
    if spec.kind == "poisson_spectrum":
        return np.sort(_stream(spec.seed, 0).uniform(0.0, n, size=n))
    if spec.kind == "picket_fence":
        return np.arange(1, n + 1, dtype=float)
    raise DataError(f"unknown synthetic kind {spec.kind!r}")


def _rows(spec: SynthSpec, draw) -> np.ndarray:
    rows = np.empty((spec.n, spec.t))
    for i in range(spec.n):
        rows[i] = draw(_stream(spec.seed, i))
    return rows
