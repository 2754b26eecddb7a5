"""Correlation matrices and their symmetric eigendecomposition.

An equal-time correlation matrix of a row-normalized panel G is the Gram
matrix G G^T / T.  Eigenvectors follow the v^T v = N normalization throughout
the package, with a deterministic sign convention (largest-magnitude component
positive) so repeated runs produce identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_ingest import NormalizedPanel
from .errors import DataError, NumericalError

KINDS = ("return", "volatility", "volatility_return", "residual")


@dataclass
class CorrelationMatrix:
    values: np.ndarray
    kind: str = "return"

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in KINDS:
            raise DataError(f"unknown correlation kind {self.kind!r}")
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise DataError("correlation matrix must be square")
        if np.max(np.abs(self.values - self.values.T)) > 1e-12:
            raise DataError("correlation matrix is not symmetric within 1e-12")
        if np.max(np.abs(np.diag(self.values) - 1.0)) > 1e-10:
            raise DataError("correlation diagonal deviates from 1 beyond 1e-10")

    @property
    def size(self) -> int:
        return self.values.shape[0]


@dataclass
class SpectralDecomposition:
    """Ascending eigenvalues with eigenvector columns scaled to v^T v = N."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def vector(self, i: int) -> np.ndarray:
        return self.eigenvectors[:, i]

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T / self.size


def correlation(panel: NormalizedPanel | np.ndarray, kind: str = "return") -> CorrelationMatrix:
    """C = G G^T / T for a row-normalized panel, symmetrized against roundoff."""
    data = panel.data if isinstance(panel, NormalizedPanel) else np.asarray(panel, dtype=float)
    if data.ndim != 2:
        raise DataError("panel must be 2-D")
    n, t = data.shape
    if t < 2:
        raise DataError("need at least two observations per row")
    c = data @ data.T / t
    c = (c + c.T) / 2.0
    return CorrelationMatrix(c, kind)


def eigendecompose(corr: CorrelationMatrix | np.ndarray) -> SpectralDecomposition:
    """Full symmetric eigendecomposition with the package conventions."""
    is_correlation = isinstance(corr, CorrelationMatrix)
    matrix = corr.values if is_correlation else np.asarray(corr, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DataError("matrix must be square")
    if np.max(np.abs(matrix - matrix.T)) > 1e-10:
        raise DataError("matrix must be symmetric")
    try:
        values, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on symmetric input
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if is_correlation and values[0] < -1e-8:
        raise NumericalError(f"correlation matrix lost positive semidefiniteness (min eigenvalue {values[0]:.3e})")
    n = matrix.shape[0]
    # fix each column's sign by its largest-magnitude component
    peak = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[peak, np.arange(n)])
    signs[signs == 0] = 1.0
    vectors = vectors * signs * np.sqrt(n)
    return SpectralDecomposition(values, vectors)
