import math

import numpy as np
import pytest
from scipy import stats

from volspectra import garch
from volspectra.errors import DataError

TRUE = garch.GarchParams(2e-6, 0.09, 0.90)


def brute_force_variance(r, params, v0):
    var = [v0]
    for t in range(1, len(r)):
        var.append(params.alpha0 + params.alpha1 * r[t - 1] ** 2 + params.beta1 * var[-1])
    return np.array(var)


class TestParams:
    def test_stationarity_enforced(self):
        with pytest.raises(DataError):
            garch.GarchParams(1e-6, 0.5, 0.5)
        with pytest.raises(DataError):
            garch.GarchParams(0.0, 0.1, 0.2)
        with pytest.raises(DataError):
            garch.GarchParams(1e-6, -0.1, 0.2)

    def test_unconditional_variance(self):
        p = garch.GarchParams(0.01, 0.1, 0.8)
        assert p.unconditional_variance == pytest.approx(0.1)

    def test_student_t_needs_nu_above_two(self):
        with pytest.raises(DataError):
            garch.InnovationDist("student_t", 2.0)


class TestFilterVolatility:
    def test_constant_when_no_feedback(self):
        r = np.random.default_rng(0).normal(size=50)
        sig = garch.filter_volatility(r, garch.GarchParams(0.25, 0.0, 0.0), sigma0_sq=4.0)
        assert sig[0] == 2.0
        assert np.allclose(sig[1:], 0.5)

    def test_direct_recursion_example(self):
        sig = garch.filter_volatility(np.array([1.0, 0.0, 0.0]), garch.GarchParams(0.1, 0.2, 0.3), 1.0)
        assert np.allclose(sig**2, [1.0, 0.6, 0.28])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        r = rng.normal(size=300)
        params = garch.GarchParams(0.05, 0.12, 0.8)
        sig = garch.filter_volatility(r, params, 0.7)
        assert np.max(np.abs(sig**2 - brute_force_variance(r, params, 0.7))) < 1e-12

    def test_strictly_positive(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a1 = rng.uniform(0, 0.5)
            b1 = rng.uniform(0, 0.99 - a1)
            params = garch.GarchParams(rng.uniform(1e-8, 1.0), a1, b1)
            sig = garch.filter_volatility(rng.normal(size=100), params, rng.uniform(1e-6, 2.0))
            assert np.all(sig > 0)

    def test_stationary_mean_level(self):
        r, _ = garch.simulate_garch(TRUE, 200_000, seed=3)
        sig = garch.filter_volatility(r, TRUE, TRUE.unconditional_variance)
        assert np.mean(sig**2) == pytest.approx(TRUE.unconditional_variance, rel=0.1)


class TestLogLikelihood:
    def test_single_gaussian_observation(self):
        value = garch.log_likelihood(np.array([0.0]), garch.GarchParams(0.1, 0.0, 0.0), garch.GAUSSIAN, 1.0)
        assert value == pytest.approx(-0.5 * math.log(2.0 * math.pi), abs=1e-12)

    def test_matches_slow_density_sum_gaussian(self):
        rng = np.random.default_rng(4)
        r = rng.normal(0, 0.02, size=100)
        params = garch.GarchParams(1e-5, 0.1, 0.8)
        sig = garch.filter_volatility(r, params, float(np.var(r)))
        expected = sum(stats.norm.logpdf(x, scale=s) for x, s in zip(r, sig))
        assert garch.log_likelihood(r, params, garch.GAUSSIAN, float(np.var(r))) == pytest.approx(expected, abs=1e-10)

    def test_matches_slow_density_sum_student_t(self):
        rng = np.random.default_rng(5)
        r = rng.normal(0, 0.02, size=100)
        params = garch.GarchParams(1e-5, 0.1, 0.8)
        nu = 7.0
        sig = garch.filter_volatility(r, params, float(np.var(r)))
        scale = sig * math.sqrt((nu - 2.0) / nu)
        expected = sum(stats.t.logpdf(x, nu, scale=s) for x, s in zip(r, scale))
        dist = garch.InnovationDist("student_t", nu)
        assert garch.log_likelihood(r, params, dist, float(np.var(r))) == pytest.approx(expected, abs=1e-10)

    def test_degenerate_inputs_raise_numerical_error(self):
        from volspectra.errors import NumericalError

        r = np.full(50, 1e300)
        with pytest.raises(NumericalError):
            garch.log_likelihood(r, garch.GarchParams(1e-10, 0.0, 0.0), garch.GAUSSIAN, 1e-10)

    def test_additivity(self):
        rng = np.random.default_rng(6)
        r = rng.normal(0, 0.02, size=60)
        params = garch.GarchParams(1e-5, 0.05, 0.9)
        v0 = 4e-4
        full = garch.log_likelihood(r, params, garch.GAUSSIAN, v0)
        head = garch.log_likelihood(r[:-1], params, garch.GAUSSIAN, v0)
        sig = garch.filter_volatility(r, params, v0)
        assert full - head == pytest.approx(stats.norm.logpdf(r[-1], scale=sig[-1]), abs=1e-10)


class TestFitGarch:
    def test_monte_carlo_recovery(self):
        hits = {"alpha0": 0, "alpha1": 0, "beta1": 0}
        n_seeds = 10
        for seed in range(n_seeds):
            r, _ = garch.simulate_garch(TRUE, 5000, seed=seed)
            fit = garch.fit_garch(r)
            assert fit.converged
            for name in hits:
                est = getattr(fit.params, name)
                true = getattr(TRUE, name)
                hits[name] += abs(est - true) <= 2.0 * fit.stderrs[name]
        for name, count in hits.items():
            assert count >= 8, f"{name}: {count}/{n_seeds} inside 2 stderr"

    def test_iid_data_uncovers_small_persistence(self):
        rng = np.random.default_rng(7)
        r = 0.01 * rng.standard_normal(4000)
        fit = garch.fit_garch(r)
        assert fit.params.persistence < 0.3
        assert fit.params.unconditional_variance == pytest.approx(float(np.var(r)), rel=0.1)

    def test_fit_beats_truth_loglik(self):
        r, _ = garch.simulate_garch(TRUE, 5000, seed=42)
        fit = garch.fit_garch(r)
        ll_true = garch.log_likelihood(r, TRUE, garch.GAUSSIAN, float(np.var(r)))
        assert fit.loglik >= ll_true - 1e-6

    def test_local_optimality_against_random_probes(self):
        r, _ = garch.simulate_garch(TRUE, 3000, seed=8)
        fit = garch.fit_garch(r)
        v0 = float(np.var(r))
        rng = np.random.default_rng(9)
        for _ in range(50):
            jitter = rng.normal(scale=[fit.params.alpha0 * 0.1, 5e-3, 5e-3])
            try:
                probe = garch.GarchParams(
                    fit.params.alpha0 + jitter[0],
                    max(fit.params.alpha1 + jitter[1], 0.0),
                    max(fit.params.beta1 + jitter[2], 0.0),
                )
            except DataError:
                continue
            assert garch.log_likelihood(r, probe, garch.GAUSSIAN, v0) <= fit.loglik + 1e-9

    def test_gradient_vanishes_at_optimum(self):
        r, _ = garch.simulate_garch(TRUE, 5000, seed=10)
        fit = garch.fit_garch(r)
        x = garch._encode(fit.params.alpha0, fit.params.alpha1, fit.params.beta1, None)
        v0 = float(np.var(r))

        def total(xv):
            value, _ = garch._neg_loglik_and_grad(xv, [r], [v0], garch.GAUSSIAN, False)
            return -value * r.size

        for i in range(3):
            e = np.zeros(3)
            e[i] = 1e-6
            grad = (total(x + e) - total(x - e)) / 2e-6
            assert abs(grad) < 1e-4

    def test_short_series_rejected(self):
        with pytest.raises(DataError):
            garch.fit_garch(np.random.default_rng(0).normal(size=50))

    def test_zero_series_rejected(self):
        with pytest.raises(DataError):
            garch.fit_garch(np.zeros(500))


class TestPooledFit:
    def test_identical_copies_match_individual_fit(self):
        r, _ = garch.simulate_garch(TRUE, 4000, seed=11)
        single = garch.fit_garch(r)
        pooled = garch.fit_pooled_garch(np.vstack([r, r, r]))
        assert pooled.params.alpha1 == pytest.approx(single.params.alpha1, abs=1e-4)
        assert pooled.params.beta1 == pytest.approx(single.params.beta1, abs=1e-4)

    def test_pooled_loglik_is_sum_of_per_series(self):
        panel = np.vstack([garch.simulate_garch(TRUE, 2000, seed=s)[0] for s in range(4)])
        pooled = garch.fit_pooled_garch(panel)
        total = sum(
            garch.log_likelihood(row, pooled.params, garch.GAUSSIAN, float(np.var(row))) for row in panel
        )
        assert pooled.loglik == pytest.approx(total, abs=1e-10)

    def test_pooled_stderr_tighter_than_individual(self):
        panel = np.vstack([garch.simulate_garch(TRUE, 3000, seed=100 + s)[0] for s in range(10)])
        pooled = garch.fit_pooled_garch(panel)
        individual = garch.fit_garch(panel[0])
        assert pooled.stderrs["alpha1"] < individual.stderrs["alpha1"]


class TestArma:
    def test_white_noise_selects_00(self):
        hits = 0
        for seed in range(6):
            r = np.random.default_rng(20 + seed).standard_normal(2000)
            order = garch.select_arma_order(r, 3, 3)
            hits += (order.p, order.q) == (0, 0)
        assert hits >= 4

    def test_ar1_selected(self):
        hits = 0
        for seed in range(10):
            rng = np.random.default_rng(40 + seed)
            eps = rng.standard_normal(2000)
            r = np.empty(2000)
            r[0] = eps[0]
            for t in range(1, 2000):
                r[t] = 0.6 * r[t - 1] + eps[t]
            order = garch.select_arma_order(r, 3, 3)
            hits += (order.p, order.q) == (1, 0)
        assert hits >= 8

    def test_bic_00_formula(self):
        r = np.random.default_rng(60).standard_normal(500)
        a = r - r.mean()
        sigma_sq = float(np.mean(a**2))
        loglik = -0.5 * 500 * (math.log(2.0 * math.pi * sigma_sq) + 1.0)
        expected = -2.0 * loglik + math.log(500)
        coeffs = garch._fit_css(r, garch.ArmaOrder(0, 0))
        resid = garch._arma_residuals(r, garch.ArmaOrder(0, 0), coeffs[0], coeffs[1:1], coeffs[1:])
        got_ll = -0.5 * resid.size * (math.log(2.0 * math.pi * float(resid @ resid) / resid.size) + 1.0)
        assert -2.0 * got_ll + math.log(500) == pytest.approx(expected, abs=1e-8)

    def test_negative_orders_rejected(self):
        with pytest.raises(DataError):
            garch.ArmaOrder(-1, 0)


class TestArmaGarch:
    def test_order_00_reduces_to_garch_on_demeaned_data(self):
        r, _ = garch.simulate_garch(TRUE, 3000, seed=70)
        fit00 = garch.fit_arma_garch(r, garch.ArmaOrder(0, 0))
        plain = garch.fit_garch(r - r.mean())
        assert fit00.params.alpha1 == pytest.approx(plain.params.alpha1, abs=5e-3)
        assert fit00.params.beta1 == pytest.approx(plain.params.beta1, abs=5e-3)

    def test_nesting_inequality(self):
        # CSS conditioning drops p observations, so compare per-observation loglik
        r, _ = garch.simulate_garch(TRUE, 3000, seed=71)
        larger = garch.fit_arma_garch(r, garch.ArmaOrder(1, 0))
        smaller = garch.fit_arma_garch(r, garch.ArmaOrder(0, 0))
        assert larger.loglik / larger.n_obs >= smaller.loglik / smaller.n_obs - 1e-3

    def test_ar1_garch_recovery(self):
        arma = garch.ArmaCoeffs(0.0005, np.array([0.5]), np.array([]))
        hits = 0
        for seed in range(6):
            r, _ = garch.simulate_garch(TRUE, 3000, arma=arma, seed=seed)
            fit = garch.fit_arma_garch(r, garch.ArmaOrder(1, 0))
            checks = [
                abs(fit.arma.phi[0] - 0.5) <= 2.0 * fit.stderrs["phi1"],
                abs(fit.params.alpha1 - TRUE.alpha1) <= 2.0 * fit.stderrs["alpha1"],
                abs(fit.params.beta1 - TRUE.beta1) <= 2.0 * fit.stderrs["beta1"],
            ]
            hits += all(checks)
        assert hits >= 4

    def test_sigma_path_padded_to_input_length(self):
        r, _ = garch.simulate_garch(TRUE, 600, arma=garch.ArmaCoeffs(0.0, np.array([0.3]), np.array([])), seed=5)
        fit = garch.fit_arma_garch(r, garch.ArmaOrder(1, 0))
        assert fit.sigma.size == r.size
        assert np.all(fit.sigma > 0)


class TestSimulate:
    def test_deterministic(self):
        a = garch.simulate_garch(TRUE, 500, seed=9)
        b = garch.simulate_garch(TRUE, 500, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_sample_variance_matches_unconditional(self):
        r, _ = garch.simulate_garch(TRUE, 300_000, seed=12)
        assert float(np.var(r)) == pytest.approx(TRUE.unconditional_variance, rel=0.05)

    def test_student_t_fatter_tails(self):
        r_t, _ = garch.simulate_garch(TRUE, 50_000, dist=garch.InnovationDist("student_t", 5.0), seed=13)
        r_g, _ = garch.simulate_garch(TRUE, 50_000, dist=garch.GAUSSIAN, seed=13)
        kurt = lambda x: float(np.mean((x - x.mean()) ** 4) / np.mean((x - x.mean()) ** 2) ** 2)
        assert kurt(r_t) > kurt(r_g)

    def test_student_t_requires_nu(self):
        with pytest.raises(DataError):
            garch.simulate_garch(TRUE, 100, dist=garch.InnovationDist("student_t"))

    def test_student_t_nu_estimated(self):
        r, _ = garch.simulate_garch(TRUE, 8000, dist=garch.InnovationDist("student_t", 6.0), seed=14)
        fit = garch.fit_garch(r, garch.InnovationDist("student_t"))
        assert fit.dist.nu == pytest.approx(6.0, abs=3.0 * fit.stderrs["nu"])
