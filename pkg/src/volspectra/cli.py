"""Command-line interface.

One subcommand per pipeline stage plus ``run`` for the whole chain and
``synth`` for test-data generation.  Exit codes: 0 success, 2 usage error,
3 bad or inconsistent data, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import data_ingest, garch, goe_stats, modes, mp_fit, spectrum, synth, unfold
from .errors import DataError, NumericalError
from .pipeline import PipelineConfig, StageError, run_pipeline, write_csv, write_panel_csv

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _read_config_file(path: str) -> dict[str, str]:
    """Plain ``key = value`` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def _parse_ells(text: str) -> tuple[float, ...]:
    """Grid spec 'lo:hi[:step]' or comma-separated values."""
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1.0
        return tuple(np.arange(lo, hi + step / 2, step))
    return tuple(float(x) for x in text.split(","))


def _load_spectrum(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty spectrum file")
    header = [h.strip().lower() for h in rows[0]]
    if "eigenvalue" not in header:
        raise DataError(f"{path}: no 'eigenvalue' column")
    col = header.index("eigenvalue")
    try:
        lam = np.array([float(r[col]) for r in rows[1:]])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: bad eigenvalue cell") from exc
    return np.sort(lam)


def _load_matrix(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    try:
        return np.array([[float(v) for v in r] for r in rows[1:]])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric matrix cell") from exc


def _normalized_panel(path: str) -> tuple[list[str], data_ingest.NormalizedPanel]:
    labels, _, values = data_ingest.load_panel_csv(path)
    return labels, data_ingest.normalize_rows(values)


def _unfold_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--w", type=float, default=None, help="sub-band width (default: auto)")
    p.add_argument("--c", type=float, default=2.65, help="Gaussian broadening factor")
    p.add_argument("--trim", type=float, default=0.05, help="two-sided edge trim fraction")


def _dist(args) -> garch.InnovationDist:
    if args.dist == "gaussian":
        return garch.GAUSSIAN
    return garch.InnovationDist("student_t", getattr(args, "nu", None))


# --- subcommand handlers ----------------------------------------------------


def _cmd_run(args) -> int:
    values: dict[str, str] = {}
    if args.config:
        values = _read_config_file(args.config)

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in values:
            return cast(values[key])
        return default

    prices = pick(args.prices, "prices", str, None)
    if prices is None:
        print("error: no price file given (flag --prices or config key 'prices')", file=sys.stderr)
        return EXIT_USAGE
    config = PipelineConfig(
        prices=prices,
        industry=pick(args.industry, "industry", str, None),
        model=pick(args.model, "model", str, "garch"),
        dist=pick(args.dist, "dist", str, "gaussian"),
        nu=pick(args.nu, "nu", float, None),
        target=pick(args.target, "target", str, "vol"),
        band_width=pick(args.w, "band_width", float, None),
        broadening=pick(args.c, "broadening", float, 2.65),
        trim=pick(args.trim, "trim", float, 0.05),
        nv_trim=pick(args.nv_trim, "nv_trim", float, 0.10),
        ells=_parse_ells(pick(args.ells, "ells", str, "1:10")),
        tail_k=pick(args.tail_k, "tail_k", int, None),
        scan_low=pick(args.scan_low, "scan_low", int, 20),
        scan_high=pick(args.scan_high, "scan_high", int, None),
        out_dir=pick(args.out, "out_dir", str, os.environ.get("VOLSPECTRA_OUT", "runs")),
        seed=pick(args.seed, "seed", int, 0),
        threads=pick(args.threads, "threads", int, 1),
    )
    report, path = run_pipeline(config)
    print(f"report written to {path}")
    for stage in report.stages:
        print(f"  stage ok: {stage}")
    return 0


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        kind=args.kind,
        n=args.n,
        t=args.t,
        seed=args.seed,
        lognormal_mu=args.lognormal_mu,
        lognormal_sigma=args.lognormal_sigma,
        pareto_exponent=args.pareto_exponent,
        loading=args.loading,
        noise_scale=args.noise_scale,
    )
    data = synth.generate(spec)
    if data.ndim == 2 and args.kind in synth.PANEL_KINDS:
        labels = [f"A{i + 1:04d}" for i in range(data.shape[0])]
        dates = [f"d{j + 1:05d}" for j in range(data.shape[1])]
        write_panel_csv(args.out, labels, dates, data)
    elif data.ndim == 2:
        write_csv(args.out, [f"c{i + 1}" for i in range(data.shape[1])], data)
    else:
        write_csv(args.out, ["index", "eigenvalue"], ((i + 1, v) for i, v in enumerate(data)))
    print(f"wrote {args.kind} ({data.shape}) to {args.out}")
    return 0


def _cmd_fit_garch(args) -> int:
    if args.returns_input:
        labels, _, values = data_ingest.load_panel_csv(args.input)
        returns = values
    else:
        panel, dropped = data_ingest.load_price_csv(args.input)
        if dropped:
            print(f"dropped {len(dropped)} incomplete assets: {','.join(dropped[:8])}")
        labels = panel.assets
        returns = data_ingest.log_returns(panel).returns
    dist = _dist(args)
    rows = []
    if args.model == "pooled":
        fit = garch.fit_pooled_garch(returns, dist)
        rows.append(["<pooled>", fit.params.alpha0, fit.params.alpha1, fit.params.beta1,
                     fit.stderrs.get("alpha0", float("nan")), fit.stderrs.get("alpha1", float("nan")),
                     fit.stderrs.get("beta1", float("nan")), fit.loglik, float("nan"), int(fit.converged)])
        print(f"pooled: alpha0={fit.params.alpha0:.4g} alpha1={fit.params.alpha1:.4f} "
              f"beta1={fit.params.beta1:.4f} loglik={fit.loglik:.2f} converged={fit.converged}")
    else:
        for label, series in zip(labels, returns):
            if args.model == "arma_garch":
                order = garch.select_arma_order(series, args.max_p, args.max_q)
                fit = garch.fit_arma_garch(series, order, dist)
            else:
                fit = garch.fit_garch(series, dist)
            rows.append([label, fit.params.alpha0, fit.params.alpha1, fit.params.beta1,
                         fit.stderrs.get("alpha0", float("nan")), fit.stderrs.get("alpha1", float("nan")),
                         fit.stderrs.get("beta1", float("nan")), fit.loglik, fit.bic, int(fit.converged)])
    write_csv(args.out, ["asset", "alpha0", "alpha1", "beta1", "se_alpha0", "se_alpha1", "se_beta1",
                         "loglik", "bic", "converged"], rows)
    print(f"wrote {len(rows)} fits to {args.out}")
    return 0


def _cmd_corr(args) -> int:
    labels, norm = _normalized_panel(args.input)
    corr = spectrum.correlation(norm, kind=args.kind)
    write_csv(args.out, labels, corr.values)
    print(f"wrote {corr.size}x{corr.size} {corr.kind} correlation to {args.out}")
    return 0


def _cmd_eigen(args) -> int:
    matrix = _load_matrix(args.input)
    dec = spectrum.eigendecompose(matrix)
    if args.vectors:
        header = ["index", "eigenvalue"] + [f"v{i + 1}" for i in range(dec.size)]
        rows = ([i + 1, dec.eigenvalues[i]] + list(dec.eigenvectors[:, i]) for i in range(dec.size))
    else:
        header = ["index", "eigenvalue"]
        rows = ((i + 1, v) for i, v in enumerate(dec.eigenvalues))
    write_csv(args.out, header, rows)
    print(f"wrote spectrum ({dec.size} eigenvalues) to {args.out}")
    return 0


def _cmd_mp_fit(args) -> int:
    lam = _load_spectrum(args.input)
    scan = None
    if args.scan:
        lo, hi = (int(x) for x in args.scan.split(":"))
        scan = (lo, hi)
    res = mp_fit.fit_mp(lam, args.q, scan_range=scan)
    print(f"N1={res.n1} N0={res.n0} alpha={res.params.alpha:.4f}+-{res.alpha_stderr:.4f} "
          f"s0_sq={res.params.s0_sq:.6g}+-{res.s0_sq_stderr:.2g} "
          f"lambda-=({res.lambda_minus:.6g}) lambda+=({res.lambda_plus:.6g}) rmse={res.rmse:.4g}")
    if args.out:
        write_csv(args.out, ["n1", "rmse"], zip(res.scan_n1, res.rmse_curve))
        print(f"wrote E(N1) curve to {args.out}")
    return 0


def _cmd_unfold(args) -> int:
    lam = _load_spectrum(args.input)
    params = unfold.UnfoldingParams(w=args.w, c=args.c, eta_scale=args.eta_scale)
    u = unfold.unfold(lam, params)
    write_csv(args.out, ["eigenvalue", "xi"], zip(u.eigenvalues, u.xi))
    spac = goe_stats.spacings(u, trim=args.trim)
    print(f"unfolded {u.size} eigenvalues (w={u.w:.6g}); bulk mean spacing {spac.mean:.4f}")
    return 0


def _cmd_spacings(args) -> int:
    lam = _load_spectrum(args.input)
    params = unfold.UnfoldingParams(w=args.w, c=args.c)
    if args.kind == "nn":
        sample = goe_stats.spacings(unfold.unfold(lam, params), trim=args.trim)
    else:
        even, odd = unfold.unfold_even_odd(lam, params)
        sample = goe_stats.next_nearest_spacings(even, odd, trim=args.trim)
    ks = goe_stats.ks_test(sample.spacings, lambda d: goe_stats.wigner_cdf(d, args.ensemble))
    line = f"{sample.kind} spacings n={sample.n} mean={sample.mean:.4f} vs {args.ensemble.upper()}: D={ks.statistic:.4f} p={ks.p_value:.4f}"
    try:
        fit = goe_stats.fit_normalization(sample, args.ensemble)
        line += f" beta={fit.beta:.3f}+-{fit.stderr:.3f}"
    except DataError:
        pass
    print(line)
    if args.out:
        write_csv(args.out, ["spacing"], ((s,) for s in sample.spacings))
        print(f"wrote spacings to {args.out}")
    return 0


def _cmd_number_variance(args) -> int:
    lam = _load_spectrum(args.input)
    params = unfold.UnfoldingParams(w=args.w, c=args.c)
    u = unfold.unfold(lam, params)
    curve = goe_stats.number_variance(u, np.asarray(_parse_ells(args.ells)), trim=args.trim,
                                      theoretical_mean=args.theoretical_mean)
    write_csv(args.out, ["ell", "empirical", "goe_theory", "poisson"],
              zip(curve.ells, curve.empirical, curve.theory_goe, curve.poisson))
    print(f"wrote number variance ({curve.ells.size} windows) to {args.out}")
    return 0


def _cmd_market_mode(args) -> int:
    labels, norm = _normalized_panel(args.input)
    dec = spectrum.eigendecompose(spectrum.correlation(norm))
    market = modes.market_mode_series(norm, dec.vector(dec.size - 1))
    reg, _, resid_dec = modes.remove_market_mode(norm, market)
    prefix = args.out_prefix
    write_csv(prefix + "_market.csv", ["t", "market"], ((i + 1, v) for i, v in enumerate(market)))
    write_csv(prefix + "_regression.csv", ["asset", "alpha", "beta", "residual_std"],
              zip(labels, reg.alphas, reg.betas, reg.residual_stds))
    write_csv(prefix + "_residual_spectrum.csv", ["index", "eigenvalue"],
              ((i + 1, v) for i, v in enumerate(resid_dec.eigenvalues)))
    rep = modes.rescaling_check(dec.eigenvalues, resid_dec.eigenvalues, dec.largest, dec.size)
    print(f"lambda_max={dec.largest:.4f} zero_eig={resid_dec.eigenvalues[0]:.2e} "
          f"rescaling median dev={rep.median_relative_deviation:.4f}")
    return 0


def _cmd_industry(args) -> int:
    labels, norm = _normalized_panel(args.input)
    industry_map = data_ingest.load_industry_csv(args.industry, labels)
    dec = spectrum.eigendecompose(spectrum.correlation(norm))
    market = modes.market_mode_series(norm, dec.vector(dec.size - 1))
    _, _, resid_dec = modes.remove_market_mode(norm, market)
    weights = modes.weight_vectors(resid_dec.eigenvectors, industry_map, labels)
    codes = [g.code for g in industry_map.groups]
    write_csv(args.out_prefix + "_weights.csv", ["eig_index"] + codes,
              ([i + 1] + list(w.rho) for i, w in enumerate(weights)))
    write_csv(args.out_prefix + "_ipr.csv", ["eig_index", "eigenvalue", "ipr"],
              ((i + 1, resid_dec.eigenvalues[i], w.ipr) for i, w in enumerate(weights)))
    iprs = np.array([w.ipr for w in weights])
    top20 = iprs[-20:] if iprs.size >= 20 else iprs
    benchmark = 1.0 / 12.0**3
    print(f"g={industry_map.n_groups} groups; top-20 eigenvectors below benchmark IPR: "
          f"{int(np.sum(top20 < benchmark))}/ {top20.size}")
    return 0


def _cmd_kurtosis(args) -> int:
    labels, norm = _normalized_panel(args.input)
    dec = spectrum.eigendecompose(spectrum.correlation(norm))
    market = modes.market_mode_series(norm, dec.vector(dec.size - 1))
    reg, _, _ = modes.remove_market_mode(norm, market)
    g_resid = np.vstack([modes.gaussianize(row) for row in reg.residuals])
    g_market = modes.gaussianize(reg.market)
    rep = modes.generalized_kurtosis(g_resid, g_market, squared_cross_term=args.squared_cross_term)
    write_csv(args.out, ["asset", "kappa"], zip(labels, rep.kappas))
    print(f"K = {rep.mean:.6f} over {len(labels)} assets (wrote {args.out})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="volspectra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the full pipeline")
    p.add_argument("--config", help="key = value config file; flags win")
    p.add_argument("--prices")
    p.add_argument("--industry")
    p.add_argument("--model", choices=["garch", "pooled", "arma_garch"])
    p.add_argument("--dist", choices=["gaussian", "student_t"])
    p.add_argument("--nu", type=float)
    p.add_argument("--target", choices=["vol", "return", "vol-return"])
    p.add_argument("--w", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--trim", type=float)
    p.add_argument("--nv-trim", dest="nv_trim", type=float)
    p.add_argument("--ells")
    p.add_argument("--tail-k", dest="tail_k", type=int, help="Hill tail count (default 5%% of sample)")
    p.add_argument("--scan-low", dest="scan_low", type=int)
    p.add_argument("--scan-high", dest="scan_high", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("synth", help="generate synthetic panels/spectra")
    p.add_argument("--kind", required=True, choices=list(synth.ALL_KINDS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lognormal-mu", type=float, default=0.0)
    p.add_argument("--lognormal-sigma", type=float, default=0.379)
    p.add_argument("--pareto-exponent", type=float, default=4.5)
    p.add_argument("--loading", type=float, default=0.5)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("fit-garch", help="fit GARCH models to a price or return panel")
    p.add_argument("--input", required=True)
    p.add_argument("--returns-input", action="store_true", help="input holds returns, not prices")
    p.add_argument("--model", choices=["garch", "pooled", "arma_garch"], default="garch")
    p.add_argument("--dist", choices=["gaussian", "student_t"], default="gaussian")
    p.add_argument("--nu", type=float)
    p.add_argument("--max-p", type=int, default=2)
    p.add_argument("--max-q", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_fit_garch)

    p = sub.add_parser("corr", help="correlation matrix of a row-normalized panel")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=list(spectrum.KINDS), default="return")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_corr)

    p = sub.add_parser("eigen", help="eigendecompose a symmetric matrix CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--vectors", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_eigen)

    p = sub.add_parser("mp-fit", help="fit the Marchenko-Pastur bulk to a spectrum")
    p.add_argument("--input", required=True)
    p.add_argument("--q", type=float, required=True, help="aspect ratio T/N")
    p.add_argument("--scan", help="N1 scan range lo:hi")
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_mp_fit)

    p = sub.add_parser("unfold", help="Gaussian-broadening unfolding")
    p.add_argument("--input", required=True)
    _unfold_args(p)
    p.add_argument("--eta-scale", dest="eta_scale", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_unfold)

    p = sub.add_parser("spacings", help="spacing statistics against a Wigner surmise")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["nn", "nnn"], default="nn")
    p.add_argument("--ensemble", choices=list(goe_stats.ENSEMBLES), default="goe")
    _unfold_args(p)
    p.add_argument("--out")
    p.set_defaults(handler=_cmd_spacings)

    p = sub.add_parser("number-variance", help="number variance of an unfolded spectrum")
    p.add_argument("--input", required=True)
    p.add_argument("--ells", default="1:10")
    _unfold_args(p)
    p.add_argument("--theoretical-mean", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_number_variance)

    p = sub.add_parser("market-mode", help="extract and remove the market mode")
    p.add_argument("--input", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(handler=_cmd_market_mode)

    p = sub.add_parser("industry", help="industry weight vectors and IPR")
    p.add_argument("--input", required=True)
    p.add_argument("--industry", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(handler=_cmd_industry)

    p = sub.add_parser("kurtosis", help="generalized kurtosis of market-removed residuals")
    p.add_argument("--input", required=True)
    p.add_argument("--squared-cross-term", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_kurtosis)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except StageError as exc:
        print(f"error at stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc.cause, NumericalError) else EXIT_DATA
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
