import os

import numpy as np
import pytest

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


@pytest.fixture(scope="session")
def prices_csv() -> str:
    return os.path.join(FIXTURES, "prices.csv")


@pytest.fixture(scope="session")
def industry_csv() -> str:
    return os.path.join(FIXTURES, "industry.csv")


@pytest.fixture(scope="session")
def goe_spectrum_500():
    """Eigenvalues of one seeded 500x500 GOE sample, shared across tests."""
    from volspectra import synth

    matrix = synth.generate(synth.SynthSpec("goe", n=500, seed=0))
    return np.linalg.eigvalsh(matrix)


@pytest.fixture(scope="session")
def wishart_spectrum_427():
    """Bulk-only spectrum of a 427x1005 Gaussian Wishart panel."""
    from volspectra import data_ingest, spectrum, synth

    panel = synth.generate(synth.SynthSpec("gaussian_wishart", n=427, t=1005, seed=7))
    norm = data_ingest.normalize_rows(panel)
    return spectrum.eigendecompose(spectrum.correlation(norm)).eigenvalues
