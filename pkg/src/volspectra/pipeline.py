"""End-to-end orchestration: ingest, model, spectrum, RMT tests, report.

A run reads a price CSV (and optionally a GICS industry CSV), fits the chosen
volatility model, builds the requested correlation matrix, fits the
Marchenko-Pastur bulk, unfolds the bulk spectrum, computes spacing and
number-variance statistics, removes the market mode, and emits one CSV per
figure-style artifact plus a single structured JSON report.  A report is a
pure function of (inputs, config, seed): rerunning yields byte-identical
content.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import data_ingest, garch, goe_stats, modes, mp_fit, spectrum, unfold
from .errors import DataError

REPORT_SCHEMA = "volspectra.report/1"
CSV_SCHEMA = "volspectra.csv/1"

MODELS = ("garch", "pooled", "arma_garch")
TARGETS = ("vol", "return", "vol-return")
_TARGET_KIND = {"vol": "volatility", "return": "return", "vol-return": "volatility_return"}

IPR_BENCHMARK = 1.0 / 12.0**3


@dataclass
class PipelineConfig:
    prices: str
    industry: str | None = None
    model: str = "garch"
    dist: str = "gaussian"
    nu: float | None = None
    target: str = "vol"
    band_width: float | None = None
    broadening: float = 2.65
    trim: float = 0.05
    nv_trim: float = 0.10
    ells: tuple[float, ...] = tuple(float(x) for x in range(1, 11))
    tail_k: int | None = None  # Hill tail count; default 5% of the positive sample
    scan_low: int = 20
    scan_high: int | None = None
    max_p: int = 2
    max_q: int = 2
    out_dir: str = "runs"
    seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        if self.model not in MODELS:
            raise DataError(f"model must be one of {MODELS}")
        if self.target not in TARGETS:
            raise DataError(f"target must be one of {TARGETS}")
        if self.dist not in ("gaussian", "student_t"):
            raise DataError("dist must be gaussian or student_t")
        if not 0 <= self.trim < 0.5 or not 0 <= self.nv_trim < 0.5:
            raise DataError("trim fractions must lie in [0, 0.5)")


class StageError(Exception):
    """Failure tagged with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunReport:
    schema: str
    input_digest: str
    config: dict[str, Any]
    stages: dict[str, Any]
    artifacts: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def _digest(paths: list[str]) -> str:
    h = hashlib.sha256()
    for p in paths:
        with open(p, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_panel_csv(path: str, labels: list[str], dates: list[str], values: np.ndarray) -> None:
    """Panel in the price-CSV schema: one row per date, one column per label."""
    rows = ([d] + [repr(float(v)) for v in values[:, j]] for j, d in enumerate(dates))
    write_csv(path, ["date"] + list(labels), rows)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _stage(name: str):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc

        return inner

    return wrap


def _ks_dict(ks: goe_stats.KSResult) -> dict[str, float]:
    return {"statistic": ks.statistic, "p_value": ks.p_value, "n": ks.n}


def run_pipeline(config: PipelineConfig) -> tuple[RunReport, str]:
    """Execute every stage and return (report, report_path)."""
    config.validate()
    stages: dict[str, Any] = {}
    artifacts: list[str] = []
    os.makedirs(config.out_dir, exist_ok=True)

    # --- ingest -------------------------------------------------------
    @_stage("ingest")
    def ingest():
        if not os.path.exists(config.prices):
            raise DataError(f"price file not found: {config.prices}")
        return data_ingest.load_price_csv(config.prices)

    panel, dropped = ingest()
    industry_map = None
    if config.industry is not None:
        if not os.path.exists(config.industry):
            raise StageError("industry_map_missing", DataError(f"industry file not found: {config.industry}"))

        @_stage("industry_map")
        def load_map():
            return data_ingest.load_industry_csv(config.industry, panel.assets)

        industry_map = load_map()
    digest_paths = [config.prices] + ([config.industry] if config.industry else [])
    stages["ingest"] = {
        "n_assets": len(panel.assets),
        "n_dates": len(panel.dates),
        "dropped_assets": dropped,
    }

    # --- returns and model fit ----------------------------------------
    @_stage("returns")
    def make_returns():
        return data_ingest.log_returns(panel)

    returns = make_returns()
    t_len = returns.returns.shape[1]

    dist = garch.GAUSSIAN if config.dist == "gaussian" else garch.InnovationDist("student_t", config.nu)

    @_stage("model_fit")
    def fit_model():
        rows = returns.returns
        if config.model == "pooled":
            pooled = garch.fit_pooled_garch(rows, dist)
            info = {
                "kind": "pooled",
                "alpha0": pooled.params.alpha0,
                "alpha1": pooled.params.alpha1,
                "beta1": pooled.params.beta1,
                "stderrs": pooled.stderrs,
                "loglik": pooled.loglik,
                "converged": pooled.converged,
            }
            return pooled.sigma, info, None
        fits = []
        for i in range(rows.shape[0]):
            if config.model == "arma_garch":
                order = garch.select_arma_order(rows[i], config.max_p, config.max_q)
                fits.append(garch.fit_arma_garch(rows[i], order, dist))
            else:
                fits.append(garch.fit_garch(rows[i], dist))
        sigma = np.vstack([_full_sigma(fit, t_len) for fit in fits])
        alpha1s = np.array([f.params.alpha1 for f in fits])
        beta1s = np.array([f.params.beta1 for f in fits])
        info = {
            "kind": config.model,
            "n_converged": int(sum(f.converged for f in fits)),
            "alpha1_mean": float(alpha1s.mean()),
            "beta1_mean": float(beta1s.mean()),
            "persistence_max": float((alpha1s + beta1s).max()),
            "loglik_total": float(sum(f.loglik for f in fits)),
        }
        return sigma, info, fits

    sigma, model_info, fits = fit_model()
    stages["model_fit"] = model_info
    if fits is not None:
        path = os.path.join(config.out_dir, "garch_fits.csv")
        write_csv(
            path,
            ["asset", "alpha0", "alpha1", "beta1", "se_alpha0", "se_alpha1", "se_beta1", "loglik", "bic", "converged"],
            (
                [a, f.params.alpha0, f.params.alpha1, f.params.beta1,
                 f.stderrs.get("alpha0", float("nan")), f.stderrs.get("alpha1", float("nan")),
                 f.stderrs.get("beta1", float("nan")), f.loglik, f.bic, int(f.converged)]
                for a, f in zip(returns.assets, fits)
            ),
        )
        artifacts.append(path)

    @_stage("volatility_stats")
    def vol_stats():
        st = data_ingest.log_volatility_stats(sigma)
        logs = np.log(sigma).ravel()
        counts, edges = np.histogram(logs, bins=60, density=True)
        centers = (edges[:-1] + edges[1:]) / 2.0
        gauss = np.exp(-((centers - st.gaussian_mean) ** 2) / (2.0 * st.gaussian_std**2)) / (
            st.gaussian_std * np.sqrt(2.0 * np.pi)
        )
        p = os.path.join(config.out_dir, "log_volatility_hist.csv")
        write_csv(p, ["log_sigma", "density", "gaussian_fit"], zip(centers, counts, gauss))
        artifacts.append(p)
        out = {
            "log_mean": st.mean,
            "log_std": st.std,
            "skewness": st.skewness,
            "kurtosis": st.kurtosis,
            "n": st.n,
        }
        # power-law diagnostic on the positive tail of the normalized paths
        pooled = data_ingest.normalize_rows(sigma).data.ravel()
        positive = pooled[pooled > 0]
        k = config.tail_k if config.tail_k is not None else max(10, int(0.05 * positive.size))
        try:
            tail = data_ingest.tail_exponent(positive, k)
            out["tail_exponent"] = tail.exponent
            out["tail_exponent_stderr"] = tail.stderr
            out["tail_k"] = tail.k
            out["tail_stable"] = tail.stable
        except DataError:
            out["tail_exponent"] = None
        return out

    stages["volatility_stats"] = vol_stats()
    sigma_path = os.path.join(config.out_dir, "sigma.csv")
    write_panel_csv(sigma_path, returns.assets, panel.dates[1:], sigma)
    artifacts.append(sigma_path)

    # --- correlation and spectrum --------------------------------------
    @_stage("correlation")
    def build_correlation():
        if config.target == "return":
            base = returns.returns
        elif config.target == "vol":
            base = sigma
        else:
            base = data_ingest.volatility_returns(sigma)
        norm = data_ingest.normalize_rows(base)
        return norm, spectrum.correlation(norm, kind=_TARGET_KIND[config.target])

    norm, corr = build_correlation()
    stages["correlation"] = {"kind": corr.kind, "size": corr.size, "trace": float(np.trace(corr.values))}

    @_stage("eigen")
    def decompose():
        return spectrum.eigendecompose(corr)

    dec = decompose()
    lam = dec.eigenvalues
    stages["eigen"] = {
        "lambda_min": float(lam[0]),
        "lambda_max": float(lam[-1]),
        "top5": [float(x) for x in lam[-5:]],
    }
    path = os.path.join(config.out_dir, "eigenvalues.csv")
    write_csv(path, ["index", "eigenvalue"], ((i + 1, v) for i, v in enumerate(lam)))
    artifacts.append(path)

    # --- MP fit ---------------------------------------------------------
    n = lam.size
    q = norm.data.shape[1] / n

    @_stage("mp_fit")
    def fit_bulk():
        high = config.scan_high if config.scan_high is not None else n
        return mp_fit.fit_mp(lam, q, scan_range=(config.scan_low, high))

    mp_res = fit_bulk()
    stages["mp_fit"] = {
        "q": q,
        "n1": mp_res.n1,
        "alpha": mp_res.params.alpha,
        "alpha_stderr": mp_res.alpha_stderr,
        "s0_sq": mp_res.params.s0_sq,
        "s0_sq_stderr": mp_res.s0_sq_stderr,
        "lambda_minus": mp_res.lambda_minus,
        "lambda_plus": mp_res.lambda_plus,
        "n0": mp_res.n0,
        "n0_over_n": mp_res.n0 / n,
        "rmse": mp_res.rmse,
        "boundary_minimum": mp_res.boundary_minimum,
        "effective_s0_sq": mp_fit.effective_variance(lam, mp_res.n0),
    }
    path = os.path.join(config.out_dir, "mp_rmse_curve.csv")
    write_csv(path, ["n1", "rmse"], zip(mp_res.scan_n1, mp_res.rmse_curve))
    artifacts.append(path)
    grid = np.linspace(mp_res.lambda_minus, mp_res.lambda_plus, 200)
    density = mp_fit.mp_density(grid, q, mp_res.params.s0_sq)
    path = os.path.join(config.out_dir, "mp_density_curve.csv")
    write_csv(path, ["lambda", "density"], zip(grid, density))
    artifacts.append(path)

    # --- unfolding and level statistics ---------------------------------
    @_stage("unfold")
    def unfold_bulk():
        bulk = lam[lam <= mp_res.lambda_plus]
        params = unfold.UnfoldingParams(w=config.band_width, c=config.broadening)
        return bulk, unfold.unfold(bulk, params), unfold.unfold_even_odd(bulk, params)

    bulk, unfolded, (even, odd) = unfold_bulk()
    spac = goe_stats.spacings(unfolded, trim=config.trim)
    stages["unfold"] = {
        "n0_unfolded": int(bulk.size),
        "band_width": unfolded.w,
        "broadening": config.broadening,
        "mean_spacing": spac.mean,
    }
    path = os.path.join(config.out_dir, "unfolded.csv")
    write_csv(path, ["eigenvalue", "xi"], zip(unfolded.eigenvalues, unfolded.xi))
    artifacts.append(path)

    @_stage("spacings")
    def spacing_stats():
        nnn = goe_stats.next_nearest_spacings(even, odd, trim=config.trim)
        out = {
            "nearest": {
                "n": spac.n,
                "mean": spac.mean,
                "ks_goe": _ks_dict(goe_stats.ks_test(spac.spacings, lambda d: goe_stats.wigner_cdf(d, "goe"))),
                "ks_gue": _ks_dict(goe_stats.ks_test(spac.spacings, lambda d: goe_stats.wigner_cdf(d, "gue"))),
                "ks_gse": _ks_dict(goe_stats.ks_test(spac.spacings, lambda d: goe_stats.wigner_cdf(d, "gse"))),
            },
            "next_nearest": {
                "n": nnn.n,
                "mean": nnn.mean,
                "ks_gse": _ks_dict(goe_stats.ks_test(nnn.spacings, lambda d: goe_stats.wigner_cdf(d, "gse"))),
            },
        }
        try:
            fit_nn = goe_stats.fit_normalization(spac, "goe")
            out["nearest"]["beta_goe"] = fit_nn.beta
            out["nearest"]["beta_goe_stderr"] = fit_nn.stderr
        except DataError:
            out["nearest"]["beta_goe"] = None
        try:
            fit_nnn = goe_stats.fit_normalization(nnn, "gse")
            out["next_nearest"]["beta_gse"] = fit_nnn.beta
            out["next_nearest"]["beta_gse_stderr"] = fit_nnn.stderr
        except DataError:
            out["next_nearest"]["beta_gse"] = None
        for kind, sample in (("nn", spac), ("nnn", nnn)):
            p = os.path.join(config.out_dir, f"spacings_{kind}.csv")
            write_csv(p, ["spacing"], ((s,) for s in sample.spacings))
            artifacts.append(p)
        return out

    stages["spacings"] = spacing_stats()

    @_stage("number_variance")
    def nv_stage():
        curve = goe_stats.number_variance(unfolded, np.asarray(config.ells), trim=config.nv_trim)
        p = os.path.join(config.out_dir, "number_variance.csv")
        write_csv(
            p,
            ["ell", "empirical", "goe_theory", "poisson"],
            zip(curve.ells, curve.empirical, curve.theory_goe, curve.poisson),
        )
        artifacts.append(p)
        return {
            "ells": [float(x) for x in curve.ells],
            "empirical": [float(x) for x in curve.empirical],
            "goe_theory": [float(x) for x in curve.theory_goe],
        }

    stages["number_variance"] = nv_stage()

    # --- market mode ----------------------------------------------------
    @_stage("market_mode")
    def market_stage():
        top = dec.vector(n - 1)
        market = modes.market_mode_series(norm, top)
        reg, resid_corr, resid_dec = modes.remove_market_mode(norm, market)
        rescale = modes.rescaling_check(lam, resid_dec.eigenvalues, dec.largest, n)
        top_stats = modes.eigvec_component_stats(top)
        p = os.path.join(config.out_dir, "market_regression.csv")
        write_csv(
            p,
            ["asset", "alpha", "beta", "residual_std"],
            zip(returns.assets, reg.alphas, reg.betas, reg.residual_stds),
        )
        artifacts.append(p)
        p = os.path.join(config.out_dir, "market_mode_vector.csv")
        write_csv(p, ["asset", "component"], zip(returns.assets, top))
        artifacts.append(p)
        p = os.path.join(config.out_dir, "residual_eigenvalues.csv")
        write_csv(p, ["index", "eigenvalue"], ((i + 1, v) for i, v in enumerate(resid_dec.eigenvalues)))
        artifacts.append(p)
        info = {
            "lambda_max": dec.largest,
            "market_vector_excess_kurtosis": top_stats.excess_kurtosis,
            "residual_zero_eigenvalue": float(resid_dec.eigenvalues[0]),
            "rescaling_factor": rescale.factor,
            "rescaling_median_dev": rescale.median_relative_deviation,
            "rescaling_max_dev": rescale.max_relative_deviation,
        }
        return info, reg, resid_dec

    market_info, regression, resid_dec = market_stage()
    stages["market_mode"] = market_info

    # --- industry structure ----------------------------------------------
    if industry_map is not None:

        @_stage("industry")
        def industry_stage():
            weights = modes.weight_vectors(resid_dec.eigenvectors, industry_map, returns.assets)
            iprs = np.array([w.ipr for w in weights])
            resid_lam = resid_dec.eigenvalues
            top20 = iprs[-20:] if iprs.size >= 20 else iprs
            below = int(np.sum(top20 < IPR_BENCHMARK))
            outside = resid_lam > mp_res.lambda_plus
            slope = None
            stderr = None
            if int(outside.sum()) >= 5:
                slope, stderr = modes.ipr_powerlaw_fit(resid_lam[outside], iprs[outside])
            p = os.path.join(config.out_dir, "industry_weights.csv")
            codes = [g.code for g in industry_map.groups]
            write_csv(
                p,
                ["eig_index"] + codes,
                ([i + 1] + list(w.rho) for i, w in enumerate(weights)),
            )
            artifacts.append(p)
            p = os.path.join(config.out_dir, "ipr.csv")
            write_csv(p, ["eig_index", "eigenvalue", "ipr"], zip(range(1, n + 1), resid_lam, iprs))
            artifacts.append(p)
            return {
                "n_groups": industry_map.n_groups,
                "group_sizes_min": int(industry_map.sizes().min()),
                "group_sizes_max": int(industry_map.sizes().max()),
                "benchmark_ipr": IPR_BENCHMARK,
                "top20_below_benchmark": below,
                "ipr_powerlaw_slope": slope,
                "ipr_powerlaw_stderr": stderr,
            }

        stages["industry"] = industry_stage()

    # --- generalized kurtosis ---------------------------------------------
    @_stage("kurtosis")
    def kurtosis_stage():
        g_resid = np.vstack([modes.gaussianize(row) for row in regression.residuals])
        g_market = modes.gaussianize(regression.market)
        report = modes.generalized_kurtosis(g_resid, g_market)
        p = os.path.join(config.out_dir, "kappa.csv")
        write_csv(p, ["asset", "kappa"], zip(returns.assets, report.kappas))
        artifacts.append(p)
        return {"k_mean": report.mean, "kappa_abs_max": float(np.max(np.abs(report.kappas)))}

    stages["kurtosis"] = kurtosis_stage()

    # --- report -----------------------------------------------------------
    digest = _digest(digest_paths)
    cfg = asdict(config)
    cfg["ells"] = list(cfg["ells"])
    report = RunReport(
        schema=REPORT_SCHEMA,
        input_digest=digest,
        config=cfg,
        stages=stages,
        artifacts=[os.path.basename(a) for a in sorted(artifacts)],
    )
    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    base = f"report-{digest[:12]}-{stamp}"
    path = os.path.join(config.out_dir, base + ".json")
    counter = 0
    while os.path.exists(path):
        counter += 1
        path = os.path.join(config.out_dir, f"{base}-{counter}.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    return report, path


def _full_sigma(fit: garch.GarchFit, t_len: int) -> np.ndarray:
    if fit.sigma.size == t_len:
        return fit.sigma
    pad = np.full(t_len - fit.sigma.size, fit.sigma[0])
    return np.concatenate([pad, fit.sigma])
