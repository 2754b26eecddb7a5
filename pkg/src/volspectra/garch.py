"""GARCH(1,1), pooled GARCH, and ARMA(p,q)-GARCH(1,1) by maximum likelihood.

The conditional-variance recursion v_t = alpha0 + alpha1 r_{t-1}^2 +
beta1 v_{t-1} is evaluated with a linear filter, so likelihoods and their
analytic gradients cost O(T).  Estimation runs quasi-Newton searches in an
unconstrained space (log alpha0, logistic persistence/share, log(nu - 2))
from deterministic starting points; standard errors come from the numerical
Hessian of the log-likelihood in natural parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import digamma, gammaln

from .errors import DataError, NumericalError

_MAX_PERSISTENCE = 1.0 - 1e-6
_LOG2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GarchParams:
    alpha0: float
    alpha1: float
    beta1: float

    def __post_init__(self) -> None:
        if self.alpha0 <= 0:
            raise DataError("alpha0 must be positive")
        if self.alpha1 < 0 or self.beta1 < 0:
            raise DataError("alpha1 and beta1 must be nonnegative")
        if self.alpha1 + self.beta1 >= 1:
            raise DataError("alpha1 + beta1 must stay below 1 (covariance stationarity)")

    @property
    def persistence(self) -> float:
        return self.alpha1 + self.beta1

    @property
    def unconditional_variance(self) -> float:
        return self.alpha0 / (1.0 - self.persistence)


@dataclass(frozen=True)
class InnovationDist:
    """Innovation law: Gaussian, or Student-t standardized to unit variance.

    ``nu=None`` on a Student-t asks the fitters to estimate the dof jointly.
    """

    kind: str = "gaussian"
    nu: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("gaussian", "student_t"):
            raise DataError(f"unknown innovation distribution {self.kind!r}")
        if self.kind == "student_t" and self.nu is not None and self.nu <= 2:
            raise DataError("Student-t dof must exceed 2 for a finite variance")


GAUSSIAN = InnovationDist("gaussian")


@dataclass(frozen=True)
class ArmaOrder:
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.p < 0 or self.q < 0:
            raise DataError("ARMA orders must be nonnegative")


@dataclass
class ArmaCoeffs:
    phi0: float
    phi: np.ndarray  # AR coefficients, length p
    theta: np.ndarray  # MA coefficients, length q


@dataclass
class GarchFit:
    params: GarchParams
    dist: InnovationDist
    loglik: float
    stderrs: dict[str, float]
    sigma: np.ndarray
    converged: bool
    boundary: bool = False
    arma: ArmaCoeffs | None = None
    n_obs: int = 0

    @property
    def n_params(self) -> int:
        k = 3
        if self.dist.kind == "student_t":
            k += 1
        if self.arma is not None:
            k += 1 + self.arma.phi.size + self.arma.theta.size
        return k

    @property
    def bic(self) -> float:
        return -2.0 * self.loglik + self.n_params * math.log(max(self.n_obs, 1))


@dataclass
class PooledGarchFit:
    params: GarchParams
    dist: InnovationDist
    loglik: float
    stderrs: dict[str, float]
    sigma: np.ndarray  # per-asset volatility paths, shape (N, T)
    converged: bool
    boundary: bool = False


def filter_volatility(returns: np.ndarray, params: GarchParams, sigma0_sq: float) -> np.ndarray:
    """Conditional volatility path: v_1 = sigma0_sq, then the GARCH recursion."""
    if sigma0_sq <= 0:
        raise DataError("initial variance must be positive")
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or r.size < 1:
        raise DataError("returns must be a nonempty 1-D series")
    var = np.empty(r.size)
    var[0] = sigma0_sq
    if r.size > 1:
        driver = params.alpha0 + params.alpha1 * r[:-1] ** 2
        var[1:], _ = lfilter([1.0], [1.0, -params.beta1], driver, zi=np.array([params.beta1 * sigma0_sq]))
    return np.sqrt(var)


def _variance_path(r: np.ndarray, alpha0: float, alpha1: float, beta1: float, v0: float) -> np.ndarray:
    var = np.empty(r.size)
    var[0] = v0
    if r.size > 1:
        driver = alpha0 + alpha1 * r[:-1] ** 2
        var[1:], _ = lfilter([1.0], [1.0, -beta1], driver, zi=np.array([beta1 * v0]))
    return var


def _density_terms(r: np.ndarray, var: np.ndarray, dist: InnovationDist, nu: float | None):
    """Per-observation log density and its derivative in the variance.

    Returns (loglik terms, dL/dv, dL/dnu terms or None).
    """
    if dist.kind == "gaussian":
        terms = -0.5 * (_LOG2PI + np.log(var) + r**2 / var)
        dl_dv = 0.5 * (r**2 / var - 1.0) / var
        return terms, dl_dv, None
    if nu is None:
        raise DataError("Student-t evaluation needs an explicit dof")
    u = r**2 / (var * (nu - 2.0))
    const = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(math.pi * (nu - 2.0))
    terms = const - 0.5 * np.log(var) - (nu + 1.0) / 2.0 * np.log1p(u)
    dl_dv = -0.5 / var + (nu + 1.0) / 2.0 * r**2 / (var * (var * (nu - 2.0) + r**2))
    dl_dnu = (
        0.5 * digamma((nu + 1.0) / 2.0)
        - 0.5 * digamma(nu / 2.0)
        - 0.5 / (nu - 2.0)
        - 0.5 * np.log1p(u)
        + (nu + 1.0) / 2.0 * u / ((nu - 2.0) * (1.0 + u))
    )
    return terms, dl_dv, dl_dnu


def log_likelihood(
    returns: np.ndarray,
    params: GarchParams,
    dist: InnovationDist = GAUSSIAN,
    sigma0_sq: float | None = None,
) -> float:
    """Sum of conditional log densities of the returns under the fitted scale path."""
    r = np.asarray(returns, dtype=float)
    if sigma0_sq is None:
        sigma0_sq = float(np.var(r))
    if sigma0_sq <= 0:
        raise DataError("initial variance must be positive")
    # degenerate parameter/data combinations overflow on the way to the
    # finiteness check below, which is the authoritative error signal
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        var = _variance_path(r, params.alpha0, params.alpha1, params.beta1, sigma0_sq)
        nu = dist.nu if dist.kind == "student_t" else None
        terms, _, _ = _density_terms(r, var, dist, nu)
        total = float(np.sum(terms))
    if not np.isfinite(total):
        raise NumericalError("log-likelihood is not finite (degenerate parameters)")
    return total


# --- unconstrained parameterization ---------------------------------------


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _decode(x: np.ndarray, estimate_nu: bool):
    # exponentials clamped so wild line-search probes stay finite
    omega = math.exp(min(max(x[0], -80.0), 50.0))
    s = _MAX_PERSISTENCE * _expit(x[1])
    share = _expit(x[2])
    nu = 2.0 + math.exp(min(max(x[3], -30.0), 30.0)) if estimate_nu else None
    return omega, s * share, s * (1.0 - share), nu


def _encode(alpha0: float, alpha1: float, beta1: float, nu: float | None) -> np.ndarray:
    s = min(max(alpha1 + beta1, 1e-8), _MAX_PERSISTENCE * (1.0 - 1e-9))
    share = min(max(alpha1 / s, 1e-8), 1.0 - 1e-8)
    x = [math.log(alpha0), math.log(s / (_MAX_PERSISTENCE - s)), math.log(share / (1.0 - share))]
    if nu is not None:
        x.append(math.log(nu - 2.0))
    return np.array(x)


def _neg_loglik_and_grad(x: np.ndarray, series: list[np.ndarray], v0s: list[float], dist: InnovationDist, estimate_nu: bool):
    """Mean negative log-likelihood over all series, with its analytic gradient."""
    omega, alpha1, beta1, nu_free = _decode(x, estimate_nu)
    nu = nu_free if estimate_nu else dist.nu
    total_obs = sum(r.size for r in series)
    loglik = 0.0
    grad_nat = np.zeros(4 if estimate_nu else 3)
    for r, v0 in zip(series, v0s):
        var = _variance_path(r, omega, alpha1, beta1, v0)
        if np.any(var <= 0) or not np.all(np.isfinite(var)):
            return 1e10, np.zeros_like(x)
        terms, dl_dv, dl_dnu = _density_terms(r, var, dist, nu)
        if not np.isfinite(terms.sum()):
            return 1e10, np.zeros_like(x)
        loglik += float(terms.sum())
        # variance sensitivities share the same AR(1) filter in beta1
        zi = np.array([0.0])
        ones = np.ones(r.size - 1)
        dv = np.zeros((3, r.size))
        if r.size > 1:
            dv[0, 1:] = lfilter([1.0], [1.0, -beta1], ones, zi=zi)[0]
            dv[1, 1:] = lfilter([1.0], [1.0, -beta1], r[:-1] ** 2, zi=zi)[0]
            dv[2, 1:] = lfilter([1.0], [1.0, -beta1], var[:-1], zi=zi)[0]
        grad_nat[0] += float(dl_dv @ dv[0])
        grad_nat[1] += float(dl_dv @ dv[1])
        grad_nat[2] += float(dl_dv @ dv[2])
        if estimate_nu:
            grad_nat[3] += float(np.sum(dl_dnu))
    # chain rule into the unconstrained coordinates
    s = alpha1 + beta1
    sig1 = s / _MAX_PERSISTENCE
    share = alpha1 / s if s > 0 else 0.5
    ds = s * (1.0 - sig1)
    dshare = share * (1.0 - share)
    grad_x = np.zeros_like(x)
    grad_x[0] = grad_nat[0] * omega
    grad_x[1] = (grad_nat[1] * share + grad_nat[2] * (1.0 - share)) * ds
    grad_x[2] = (grad_nat[1] - grad_nat[2]) * s * dshare
    if estimate_nu:
        grad_x[3] = grad_nat[3] * (nu - 2.0)
    return -loglik / total_obs, -grad_x / total_obs


_STARTS = ((0.90, 0.10), (0.50, 0.50), (0.98, 0.05), (0.05, 0.50))  # (persistence, ARCH share)

# restart optima within this many nats of the best are treated as ties and
# resolved toward the smallest persistence; on white-noise-like data the
# variance recursion has a flat ridge where a near-integrated solution can
# edge out the parsimonious one by a statistically meaningless margin
_TIE_NATS = 2.0


def _run_mle(series: list[np.ndarray], v0s: list[float], dist: InnovationDist):
    estimate_nu = dist.kind == "student_t" and dist.nu is None
    total_obs = sum(r.size for r in series)
    pooled_var = float(np.mean([np.var(r) for r in series]))
    results = []
    for persistence, share in _STARTS:
        alpha1, beta1 = persistence * share, persistence * (1.0 - share)
        alpha0 = max(pooled_var * (1.0 - persistence), 1e-12)
        x0 = _encode(alpha0, alpha1, beta1, 8.0 if estimate_nu else None)
        res = minimize(
            _neg_loglik_and_grad,
            x0,
            args=(series, v0s, dist, estimate_nu),
            jac=True,
            method="L-BFGS-B",
            options={"ftol": 1e-14, "gtol": 1e-10, "maxiter": 1000},
        )
        results.append(res)
    best_fun = min(res.fun for res in results)
    tied = [res for res in results if res.fun <= best_fun + _TIE_NATS / total_obs]
    best = min(tied, key=lambda res: sum(_decode(res.x, estimate_nu)[1:3]))
    omega, alpha1, beta1, nu = _decode(best.x, estimate_nu)
    params = GarchParams(omega, alpha1, beta1)
    nu_out = nu if estimate_nu else dist.nu
    loglik = -best.fun * total_obs
    # a pessimistic line-search status at machine precision still counts as
    # converged when the per-observation gradient has vanished
    converged = bool(best.success or np.max(np.abs(best.jac)) < 1e-7)
    boundary = params.persistence > 0.995 * _MAX_PERSISTENCE or alpha1 < 1e-8 or beta1 < 1e-8
    return params, nu_out, loglik, converged, boundary


def _natural_loglik(series, v0s, dist_kind, theta, estimate_nu):
    alpha0, alpha1, beta1 = theta[0], theta[1], theta[2]
    if alpha0 <= 0 or alpha1 < 0 or beta1 < 0 or alpha1 + beta1 >= 1:
        return -np.inf
    nu = theta[3] if estimate_nu else None
    total = 0.0
    for r, v0 in zip(series, v0s):
        var = _variance_path(r, alpha0, alpha1, beta1, v0)
        if np.any(var <= 0):
            return -np.inf
        terms, _, _ = _density_terms(r, var, InnovationDist(dist_kind, nu), nu)
        total += float(terms.sum())
    return total


def _hessian_stderrs(series, v0s, dist: InnovationDist, params: GarchParams, nu: float | None):
    """Standard errors from the central-difference Hessian in natural parameters."""
    estimate_nu = dist.kind == "student_t" and nu is not None and dist.nu is None
    theta = [params.alpha0, params.alpha1, params.beta1]
    names = ["alpha0", "alpha1", "beta1"]
    if estimate_nu:
        theta.append(nu)
        names.append("nu")
    theta = np.array(theta)
    dist_kind = dist.kind
    nu_fixed = dist.nu

    def ll(t):
        use_nu = t[3] if estimate_nu else nu_fixed
        full = np.array([t[0], t[1], t[2], use_nu if use_nu is not None else 0.0])
        return _natural_loglik(series, v0s, dist_kind, full, dist_kind == "student_t")

    k = theta.size
    steps = np.maximum(np.abs(theta), 1e-5) * 1e-4
    hess = np.empty((k, k))
    base = ll(theta)
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = steps[i]
            ej[j] = steps[j]
            if i == j:
                val = (ll(theta + ei) - 2.0 * base + ll(theta - ei)) / steps[i] ** 2
            else:
                val = (
                    ll(theta + ei + ej) - ll(theta + ei - ej) - ll(theta - ei + ej) + ll(theta - ei - ej)
                ) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    try:
        cov = np.linalg.inv(-hess)
        diag = np.diag(cov)
        if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
            raise np.linalg.LinAlgError("non-positive covariance diagonal")
        return dict(zip(names, np.sqrt(diag))), True
    except np.linalg.LinAlgError:
        return {name: float("nan") for name in names}, False


def fit_garch(
    returns: np.ndarray,
    dist: InnovationDist = GAUSSIAN,
    sigma0_sq: float | None = None,
    min_obs: int = 100,
) -> GarchFit:
    """Constrained MLE of a GARCH(1,1) model on one return series."""
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or r.size < min_obs:
        raise DataError(f"need at least {min_obs} observations")
    if not np.any(r != 0):
        raise DataError("returns are identically zero")
    v0 = float(np.var(r)) if sigma0_sq is None else float(sigma0_sq)
    if v0 <= 0:
        raise DataError("initial variance must be positive")
    params, nu, loglik, converged, boundary = _run_mle([r], [v0], dist)
    stderrs, hess_ok = _hessian_stderrs([r], [v0], dist, params, nu)
    fit_dist = InnovationDist(dist.kind, nu) if dist.kind == "student_t" else dist
    return GarchFit(
        params=params,
        dist=fit_dist,
        loglik=loglik,
        stderrs=stderrs,
        sigma=filter_volatility(r, params, v0),
        converged=converged and hess_ok,
        boundary=boundary,
        n_obs=r.size,
    )


def fit_pooled_garch(
    panel: np.ndarray,
    dist: InnovationDist = GAUSSIAN,
    sigma0_sq: float | None = None,
) -> PooledGarchFit:
    """One GARCH(1,1) parameter set maximizing the joint likelihood of all rows."""
    data = np.asarray(panel, dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] < 1 or data.shape[1] < 10:
        raise DataError("panel must hold at least one series of length >= 10")
    series = [data[i] for i in range(data.shape[0])]
    v0s = [float(np.var(r)) if sigma0_sq is None else float(sigma0_sq) for r in series]
    if any(v <= 0 for v in v0s):
        raise DataError("a panel row has zero variance")
    params, nu, loglik, converged, boundary = _run_mle(series, v0s, dist)
    stderrs, hess_ok = _hessian_stderrs(series, v0s, dist, params, nu)
    sigma = np.vstack([filter_volatility(r, params, v0) for r, v0 in zip(series, v0s)])
    fit_dist = InnovationDist(dist.kind, nu) if dist.kind == "student_t" else dist
    return PooledGarchFit(
        params=params,
        dist=fit_dist,
        loglik=loglik,
        stderrs=stderrs,
        sigma=sigma,
        converged=converged and hess_ok,
        boundary=boundary,
    )


# --- ARMA mean equation ----------------------------------------------------


def _arma_residuals(r: np.ndarray, order: ArmaOrder, phi0: float, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Conditional-sum-of-squares residuals, zero-initialized before the sample.

    The first p observations condition the AR lags; the returned residual
    series has length T - p.
    """
    p, q = order.p, order.q
    x = r[p:] - phi0
    for j in range(1, p + 1):
        x = x - phi[j - 1] * r[p - j : r.size - j]
    if q == 0:
        return x
    with np.errstate(over="ignore", invalid="ignore"):
        # a non-invertible theta probe makes the filter explode; callers
        # guard on finiteness and reject the point
        a, _ = lfilter([1.0], np.concatenate(([1.0], theta)), x, zi=np.zeros(q))
    return a


def _css_objective(coeffs: np.ndarray, r: np.ndarray, order: ArmaOrder) -> float:
    phi0 = coeffs[0]
    phi = coeffs[1 : 1 + order.p]
    theta = coeffs[1 + order.p :]
    with np.errstate(over="ignore", invalid="ignore"):
        a = _arma_residuals(r, order, phi0, phi, theta)
        if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > 1e100:
            return 1e100
        return float(a @ a)


def _fit_css(r: np.ndarray, order: ArmaOrder) -> np.ndarray:
    """CSS coefficient estimates [phi0, phi..., theta...]."""
    p, q = order.p, order.q
    if p == 0 and q == 0:
        return np.array([r.mean()])
    # AR part by OLS, MA initialized at zero
    if p > 0:
        lags = np.column_stack([np.ones(r.size - p)] + [r[p - j : r.size - j] for j in range(1, p + 1)])
        target = r[p:]
        ar_coef, *_ = np.linalg.lstsq(lags, target, rcond=None)
    else:
        ar_coef = np.array([r.mean()])
    x0 = np.concatenate([ar_coef, np.zeros(q)])
    if q == 0:
        return x0
    res = minimize(_css_objective, x0, args=(r, order), method="BFGS", options={"gtol": 1e-8, "maxiter": 500})
    return res.x


def select_arma_order(returns: np.ndarray, max_p: int = 5, max_q: int = 5) -> ArmaOrder:
    """BIC-minimizing (p, q) under a concentrated Gaussian CSS likelihood."""
    if max_p < 0 or max_q < 0:
        raise DataError("maximum orders must be nonnegative")
    r = np.asarray(returns, dtype=float)
    t_full = r.size
    best_order, best_bic = ArmaOrder(0, 0), np.inf
    for total in range(0, max_p + max_q + 1):
        for p in range(0, min(total, max_p) + 1):
            q = total - p
            if q > max_q:
                continue
            order = ArmaOrder(p, q)
            try:
                coeffs = _fit_css(r, order)
                a = _arma_residuals(r, order, coeffs[0], coeffs[1 : 1 + p], coeffs[1 + p :])
                if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > 1e100:
                    continue
                t_eff = a.size
                sigma_sq = float(a @ a) / t_eff
                if sigma_sq <= 0 or not np.isfinite(sigma_sq):
                    continue
                loglik = -0.5 * t_eff * (math.log(2.0 * math.pi * sigma_sq) + 1.0)
                bic = -2.0 * loglik + (1 + p + q) * math.log(t_full)
            except (DataError, NumericalError, np.linalg.LinAlgError):
                continue
            if bic < best_bic - 1e-12:
                best_bic, best_order = bic, order
    return best_order


def fit_arma_garch(
    returns: np.ndarray,
    order: ArmaOrder,
    dist: InnovationDist = GAUSSIAN,
    min_obs: int = 100,
) -> GarchFit:
    """Joint MLE of the ARMA(p,q) mean and GARCH(1,1) variance equations."""
    r = np.asarray(returns, dtype=float)
    if r.size < min_obs + order.p:
        raise DataError(f"need at least {min_obs + order.p} observations")
    estimate_nu = dist.kind == "student_t" and dist.nu is None
    p, q = order.p, order.q
    n_arma = 1 + p + q

    def split(vec: np.ndarray):
        return vec[:n_arma], vec[n_arma:]

    def unpack_residuals(arma_part: np.ndarray) -> np.ndarray:
        return _arma_residuals(r, order, arma_part[0], arma_part[1 : 1 + p], arma_part[1 + p :])

    def objective(vec: np.ndarray) -> float:
        arma_part, garch_part = split(vec)
        a = unpack_residuals(arma_part)
        if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > 1e100:
            return 1e10
        v0 = float(np.var(a))
        if v0 <= 0:
            return 1e10
        value, _ = _neg_loglik_and_grad(garch_part, [a], [v0], dist, estimate_nu)
        return value

    arma0 = _fit_css(r, order)
    a0 = unpack_residuals(arma0)
    x_garch = _encode(max(np.var(a0) * 0.1, 1e-12), 0.09, 0.81, 8.0 if estimate_nu else None)
    x0 = np.concatenate([arma0, x_garch])
    res = minimize(objective, x0, method="L-BFGS-B", options={"ftol": 1e-12, "gtol": 1e-8, "maxiter": 2000})
    arma_part, garch_part = split(res.x)
    omega, alpha1, beta1, nu = _decode(garch_part, estimate_nu)
    params = GarchParams(omega, alpha1, beta1)
    nu_out = nu if estimate_nu else dist.nu
    a = unpack_residuals(arma_part)
    v0 = float(np.var(a))
    fit_dist = InnovationDist(dist.kind, nu_out) if dist.kind == "student_t" else dist
    loglik = log_likelihood(a, params, fit_dist, v0)
    sigma_a = filter_volatility(a, params, v0)
    sigma = np.concatenate([np.full(p, math.sqrt(v0)), sigma_a])

    # standard errors: finite-difference Hessian over the natural parameter block
    names = ["phi0"] + [f"phi{j}" for j in range(1, p + 1)] + [f"theta{k}" for k in range(1, q + 1)]
    names += ["alpha0", "alpha1", "beta1"] + (["nu"] if estimate_nu else [])
    theta_nat = np.concatenate([arma_part, [params.alpha0, params.alpha1, params.beta1], [nu_out] if estimate_nu else []])

    def ll_nat(t: np.ndarray) -> float:
        try:
            g = GarchParams(t[n_arma], t[n_arma + 1], t[n_arma + 2])
        except DataError:
            return -np.inf
        use_nu = t[n_arma + 3] if estimate_nu else dist.nu
        aa = _arma_residuals(r, order, t[0], t[1 : 1 + p], t[1 + p : n_arma])
        if not np.all(np.isfinite(aa)):
            return -np.inf
        vv = float(np.var(aa))
        if vv <= 0:
            return -np.inf
        try:
            return log_likelihood(aa, g, InnovationDist(dist.kind, use_nu), vv)
        except NumericalError:
            return -np.inf

    stderrs = _fd_hessian_stderrs(ll_nat, theta_nat, names)
    boundary = params.persistence > 0.995 * _MAX_PERSISTENCE
    return GarchFit(
        params=params,
        dist=fit_dist,
        loglik=loglik,
        stderrs=stderrs,
        sigma=sigma,
        converged=bool(res.success),
        boundary=boundary,
        arma=ArmaCoeffs(arma_part[0], arma_part[1 : 1 + p].copy(), arma_part[1 + p :].copy()),
        n_obs=a.size,
    )


def _fd_hessian_stderrs(loglik_fn, theta: np.ndarray, names: list[str]) -> dict[str, float]:
    k = theta.size
    steps = np.maximum(np.abs(theta), 1e-5) * 1e-4
    hess = np.empty((k, k))
    base = loglik_fn(theta)
    for i in range(k):
        for j in range(i, k):
            ei, ej = np.zeros(k), np.zeros(k)
            ei[i], ej[j] = steps[i], steps[j]
            if i == j:
                hess[i, i] = (loglik_fn(theta + ei) - 2.0 * base + loglik_fn(theta - ei)) / steps[i] ** 2
            else:
                hess[i, j] = hess[j, i] = (
                    loglik_fn(theta + ei + ej)
                    - loglik_fn(theta + ei - ej)
                    - loglik_fn(theta - ei + ej)
                    + loglik_fn(theta - ei - ej)
                ) / (4.0 * steps[i] * steps[j])
    try:
        cov = np.linalg.inv(-hess)
        diag = np.diag(cov)
        if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
            raise np.linalg.LinAlgError("indefinite Hessian")
        return dict(zip(names, np.sqrt(diag)))
    except np.linalg.LinAlgError:
        return {name: float("nan") for name in names}


def simulate_garch(
    params: GarchParams,
    n: int,
    dist: InnovationDist = GAUSSIAN,
    arma: ArmaCoeffs | None = None,
    seed: int = 0,
    burn: int = 500,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate (returns, sigma); the first ``burn`` steps are discarded."""
    if n < 1:
        raise DataError("need a positive sample length")
    if dist.kind == "student_t" and dist.nu is None:
        raise DataError("simulation needs an explicit Student-t dof")
    rng = np.random.default_rng(seed)
    total = n + burn
    if dist.kind == "gaussian":
        eps = rng.standard_normal(total)
    else:
        eps = rng.standard_t(dist.nu, total) * math.sqrt((dist.nu - 2.0) / dist.nu)
    var = np.empty(total)
    a = np.empty(total)
    var[0] = params.unconditional_variance
    a[0] = math.sqrt(var[0]) * eps[0]
    for t in range(1, total):
        var[t] = params.alpha0 + params.alpha1 * a[t - 1] ** 2 + params.beta1 * var[t - 1]
        a[t] = math.sqrt(var[t]) * eps[t]
    sigma = np.sqrt(var)
    if arma is None:
        return a[burn:], sigma[burn:]
    p, q = arma.phi.size, arma.theta.size
    r = np.zeros(total)
    for t in range(total):
        value = arma.phi0 + a[t]
        for j in range(1, p + 1):
            if t - j >= 0:
                value += arma.phi[j - 1] * r[t - j]
        for k in range(1, q + 1):
            if t - k >= 0:
                value += arma.theta[k - 1] * a[t - k]
        r[t] = value
    return r[burn:], sigma[burn:]
