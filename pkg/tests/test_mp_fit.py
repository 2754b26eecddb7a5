import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from volspectra import data_ingest, mp_fit, spectrum, synth
from volspectra.errors import DataError


def cdf_oracle(lam: float, q: float, s0_sq: float) -> float:
    """Adaptive Gauss-Kronrod integration of the density, no substitution."""
    lo, hi = mp_fit.mp_bounds(q, s0_sq)
    if lam <= lo:
        return 0.0
    value, _ = quad(lambda x: mp_fit.mp_density(x, q, s0_sq), lo, min(lam, hi), epsabs=1e-12, limit=400)
    return value


class TestBounds:
    def test_square_case_closes_gap(self):
        assert mp_fit.mp_bounds(1.0, 1.0) == (0.0, 4.0)

    def test_q4(self):
        lo, hi = mp_fit.mp_bounds(4.0, 1.0)
        assert (lo, hi) == (0.25, 2.25)

    def test_volatility_scale_pair(self):
        lo, hi = mp_fit.mp_bounds(2.351, 0.009952)
        assert abs(lo - 0.0012) < 5e-4
        assert abs(hi - 0.0272) < 5e-4

    def test_invalid(self):
        with pytest.raises(DataError):
            mp_fit.mp_bounds(-1.0, 1.0)


class TestDensity:
    def test_zero_outside_support(self):
        assert mp_fit.mp_density(5.0, 1.0, 1.0) == 0.0
        assert mp_fit.mp_density(0.1, 4.0, 1.0) == 0.0

    def test_square_case_value(self):
        # direct evaluation of the density formula at the midpoint
        assert mp_fit.mp_density(2.0, 1.0, 1.0) == pytest.approx(1.0 / (2.0 * math.pi), abs=1e-15)

    @pytest.mark.parametrize("q,s0", [(1.0, 1.0), (2.351, 0.01), (4.0, 0.5)])
    def test_unit_mass(self, q, s0):
        lo, hi = mp_fit.mp_bounds(q, s0)
        mass, _ = quad(lambda x: mp_fit.mp_density(x, q, s0), lo, hi, epsabs=1e-10, limit=400)
        assert abs(mass - 1.0) < 1e-6


class TestEmpiricalCdf:
    def test_simple(self):
        assert mp_fit.empirical_cdf(np.array([1.0, 2.0, 3.0])).tolist() == [1 / 3, 2 / 3, 1.0]

    def test_tie_convention(self):
        assert mp_fit.empirical_cdf(np.array([1.0, 1.0, 2.0])).tolist() == [2 / 3, 2 / 3, 1.0]

    def test_uniform_grid_close_to_uniform_law(self):
        grid = np.linspace(0.0005, 0.9995, 1000)
        f = mp_fit.empirical_cdf(grid)
        assert np.max(np.abs(f - grid)) < 0.002

    def test_unsorted_rejected(self):
        with pytest.raises(DataError):
            mp_fit.empirical_cdf(np.array([2.0, 1.0]))


class TestMpCdf:
    def test_clamps(self):
        params = mp_fit.MPParams(2.351, 0.009952, 0.389)
        lo, hi = mp_fit.mp_bounds(params.q, params.s0_sq)
        assert mp_fit.mp_cdf(lo - 1.0, params) == 0.0
        assert mp_fit.mp_cdf(hi + 1.0, params) == pytest.approx(0.389, abs=1e-8)
        assert mp_fit.mp_cdf(lo, params) == 0.0

    def test_square_case_midpoint_value(self):
        # locked against the adaptive quadrature oracle; equals 1/2 + 1/pi
        value = mp_fit.mp_cdf(2.0, mp_fit.MPParams(1.0, 1.0, 1.0))
        assert value == pytest.approx(cdf_oracle(2.0, 1.0, 1.0), abs=1e-9)
        assert value == pytest.approx(0.5 + 1.0 / math.pi, abs=1e-9)

    @pytest.mark.parametrize("q,s0", [(1.0, 1.0), (2.351, 0.009952), (4.0, 0.5)])
    def test_matches_adaptive_quadrature(self, q, s0):
        lo, hi = mp_fit.mp_bounds(q, s0)
        grid = np.linspace(lo, hi, 17)
        params = mp_fit.MPParams(q, s0, 1.0)
        mine = mp_fit.mp_cdf(grid, params)
        oracle = np.array([cdf_oracle(x, q, s0) for x in grid])
        assert np.max(np.abs(mine - oracle)) < 1e-9

    def test_monotone_and_derivative_matches_density(self):
        params = mp_fit.MPParams(2.351, 0.009952, 0.389)
        lo, hi = mp_fit.mp_bounds(params.q, params.s0_sq)
        grid = np.linspace(lo + 1e-4, hi - 1e-4, 100)
        values = mp_fit.mp_cdf(grid, params)
        assert np.all(np.diff(values) >= -1e-12)
        h = 1e-7 * (hi - lo)
        deriv = (mp_fit.mp_cdf(grid + h, params) - mp_fit.mp_cdf(grid - h, params)) / (2 * h)
        dens = params.alpha * np.asarray(mp_fit.mp_density(grid, params.q, params.s0_sq))
        assert np.max(np.abs(deriv - dens)) < 1e-4 * max(1.0, dens.max())


class TestEffectiveVariance:
    def test_all_retained(self):
        lam = np.array([0.5, 1.0, 1.5])
        assert mp_fit.effective_variance(lam, 3) == pytest.approx(1.0)

    def test_partial(self):
        assert mp_fit.effective_variance(np.array([0.2, 0.3, 2.5]), 2) == pytest.approx(1.0 - 2.5 / 3.0)

    def test_bad_n0(self):
        with pytest.raises(DataError):
            mp_fit.effective_variance(np.ones(3), 0)


class TestFitMp:
    def test_pure_noise_recovers_unit_parameters(self, wishart_spectrum_427):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = mp_fit.fit_mp(wishart_spectrum_427, q=1005 / 427, scan_range=(20, 427, 4))
        assert 0.95 <= res.params.alpha <= 1.0
        assert 0.95 <= res.params.s0_sq <= 1.05
        assert res.n0 / 427 >= 0.98

    def test_structured_spectrum_tracks_effective_variance(self):
        panel = synth.generate(synth.SynthSpec("one_factor_panel", n=200, t=800, seed=3, loading=1.1))
        lam = spectrum.eigendecompose(spectrum.correlation(data_ingest.normalize_rows(panel))).eigenvalues
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = mp_fit.fit_mp(lam, q=800 / 200, scan_range=(20, 200, 2))
        expected = mp_fit.effective_variance(lam, res.n0)
        assert res.params.s0_sq == pytest.approx(expected, rel=0.15)
        assert res.n0 <= 199  # the factor eigenvalue stays outside the bulk

    def test_consistency_improves_with_n(self):
        errs = {}
        for n in (200, 800):
            devs = []
            for seed in range(20):
                panel = synth.generate(synth.SynthSpec("gaussian_wishart", n=n, t=3 * n, seed=seed))
                lam = spectrum.eigendecompose(spectrum.correlation(data_ingest.normalize_rows(panel))).eigenvalues
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    res = mp_fit.fit_mp(lam, q=3.0, scan_range=(20, n, max(n // 10, 8)))
                devs.append(abs(res.params.s0_sq - 1.0))
            errs[n] = float(np.median(devs))
        assert errs[800] < errs[200]

    def test_deterministic(self, wishart_spectrum_427):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = mp_fit.fit_mp(wishart_spectrum_427, q=1005 / 427, scan_range=(20, 100))
            b = mp_fit.fit_mp(wishart_spectrum_427, q=1005 / 427, scan_range=(20, 100))
        assert np.array_equal(a.rmse_curve, b.rmse_curve)
        assert a.params == b.params

    def test_degenerate_spectrum_rejected(self):
        with pytest.raises(DataError, match="identical"):
            mp_fit.fit_mp(np.ones(100), q=2.0)

    def test_bad_scan_range(self, wishart_spectrum_427):
        with pytest.raises(DataError):
            mp_fit.fit_mp(wishart_spectrum_427, q=2.0, scan_range=(10, 50))
        with pytest.raises(DataError):
            mp_fit.fit_mp(wishart_spectrum_427, q=2.0, scan_range=(20, 9999))

    def test_too_few_eigenvalues(self):
        with pytest.raises(DataError):
            mp_fit.fit_mp(np.linspace(0.1, 2.0, 30), q=2.0)
