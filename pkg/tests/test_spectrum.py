import numpy as np
import pytest

from volspectra import data_ingest, spectrum, synth
from volspectra.errors import DataError


def jacobi_eigenvalues(matrix: np.ndarray, sweeps: int = 50) -> np.ndarray:
    """Cyclic Jacobi rotations; independent oracle for the eigensolver."""
    a = matrix.copy()
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(a**2) - np.sum(np.diag(a) ** 2))
        if off < 1e-14:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-18:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[q, q] - a[p, p])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


class TestCorrelation:
    def test_identical_rows_give_unit_offdiagonal(self):
        row = np.random.default_rng(0).normal(size=200)
        norm = data_ingest.normalize_rows(np.vstack([row, row]))
        corr = spectrum.correlation(norm)
        assert corr.values[0, 1] == pytest.approx(1.0, abs=1e-12)

    def test_negated_row_gives_minus_one(self):
        row = np.random.default_rng(1).normal(size=200)
        norm = data_ingest.normalize_rows(np.vstack([row, -row]))
        assert spectrum.correlation(norm).values[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(2)
        norm = data_ingest.normalize_rows(rng.normal(size=(5, 50)))
        corr = spectrum.correlation(norm)
        g = norm.data
        expected = np.empty((5, 5))
        for i in range(5):
            for j in range(5):
                acc = 0.0
                for t in range(50):
                    acc += g[i, t] * g[j, t]
                expected[i, j] = acc / 50
        assert np.max(np.abs(corr.values - expected)) < 1e-12

    def test_too_short_panel_rejected(self):
        with pytest.raises(DataError):
            spectrum.correlation(np.ones((3, 1)))

    def test_validation_rejects_asymmetry_and_bad_diagonal(self):
        with pytest.raises(DataError, match="symmetric"):
            spectrum.CorrelationMatrix(np.array([[1.0, 0.5], [0.2, 1.0]]))
        with pytest.raises(DataError, match="diagonal"):
            spectrum.CorrelationMatrix(np.array([[1.1, 0.0], [0.0, 1.0]]))

    def test_trace_equals_n(self):
        norm = data_ingest.normalize_rows(np.random.default_rng(3).normal(size=(20, 100)))
        corr = spectrum.correlation(norm, kind="volatility")
        assert np.trace(corr.values) == pytest.approx(20.0, abs=1e-10)


class TestEigendecompose:
    def test_identity_matrix(self):
        dec = spectrum.eigendecompose(np.eye(7))
        assert np.allclose(dec.eigenvalues, 1.0)

    def test_two_by_two_closed_form(self):
        rho = 0.37
        dec = spectrum.eigendecompose(np.array([[1.0, rho], [rho, 1.0]]))
        assert np.allclose(dec.eigenvalues, [1.0 - rho, 1.0 + rho])

    def test_eigen_residual_and_reconstruction(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(50, 50))
        c = (a + a.T) / 2.0
        dec = spectrum.eigendecompose(c)
        for i in range(50):
            v = dec.vector(i)
            assert np.max(np.abs(c @ v - dec.eigenvalues[i] * v)) < 1e-9
        assert np.max(np.abs(dec.reconstruct() - c)) < 1e-8
        assert dec.eigenvalues.sum() == pytest.approx(np.trace(c), abs=1e-8)

    def test_vector_normalization_and_orthogonality(self):
        rng = np.random.default_rng(5)
        norm = data_ingest.normalize_rows(rng.normal(size=(30, 90)))
        dec = spectrum.eigendecompose(spectrum.correlation(norm))
        v = dec.eigenvectors
        assert np.allclose(np.sum(v**2, axis=0), 30.0, atol=1e-8)
        gram = v.T @ v
        assert np.max(np.abs(gram - 30.0 * np.eye(30))) < 1e-7

    def test_sign_convention(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(20, 20))
        dec = spectrum.eigendecompose((a + a.T) / 2.0)
        for i in range(20):
            v = dec.vector(i)
            assert v[np.argmax(np.abs(v))] > 0

    def test_agrees_with_jacobi_oracle(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(20, 20))
        c = (a + a.T) / 2.0
        dec = spectrum.eigendecompose(c)
        assert np.max(np.abs(dec.eigenvalues - jacobi_eigenvalues(c))) < 1e-8

    def test_market_mode_single_signed_on_factor_panel(self):
        panel = synth.generate(synth.SynthSpec("one_factor_panel", n=40, t=800, seed=8, loading=0.8))
        norm = data_ingest.normalize_rows(panel)
        dec = spectrum.eigendecompose(spectrum.correlation(norm))
        top = dec.vector(dec.size - 1)
        assert np.all(top > 0)

    def test_degenerate_eigenvalues_compared_by_projector(self):
        # block-diagonal with a repeated eigenvalue: projectors must agree even
        # though individual vectors are only defined up to rotation
        c = np.diag([1.0, 1.0, 2.0])
        dec = spectrum.eigendecompose(c)
        sub = dec.eigenvectors[:, :2] / np.sqrt(3.0)
        projector = sub @ sub.T
        assert np.allclose(projector, np.diag([1.0, 1.0, 0.0]), atol=1e-10)

    def test_asymmetric_input_rejected(self):
        with pytest.raises(DataError):
            spectrum.eigendecompose(np.array([[1.0, 0.2], [0.1, 1.0]]))

    def test_gram_positivity(self):
        norm = data_ingest.normalize_rows(np.random.default_rng(9).normal(size=(25, 60)))
        dec = spectrum.eigendecompose(spectrum.correlation(norm))
        assert dec.eigenvalues.min() > -1e-8
