"""Random-matrix spectral analysis of volatility and return correlations.

Pipeline: ingest prices, estimate GARCH-family volatility paths, build
return/volatility/volatility-return correlation matrices, and test their
eigenvalue and eigenvector statistics against random-matrix references
(Marchenko-Pastur bulk, GOE spacing laws, number variance, market mode and
industry structure).
"""

from .errors import DataError, NumericalError

__version__ = "0.1.0"

__all__ = ["DataError", "NumericalError", "__version__"]
