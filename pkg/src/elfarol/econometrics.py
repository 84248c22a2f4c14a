"""Time-series pipeline: stationarity checks, VAR fitting, lag selection,
Granger causality, p-value aggregation and impulse responses.

Everything here is built directly on least squares. Critical values for
the unit-root and stationarity tests are embedded tabulated constants
(constant-only regression, level stationarity) with linear interpolation
for approximate p-values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DomainError, NumericalError

# Dickey-Fuller t-distribution quantiles, regression with constant and no
# trend, asymptotic sample size (Fuller 1976 style tabulation).
_DF_PROBS = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
_DF_TAUS = np.array([-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60])
_DF_CRIT_95 = -2.86

# KPSS level-stationarity statistic quantiles (upper tail).
_KPSS_PROBS = np.array([0.10, 0.05, 0.025, 0.01])
_KPSS_STATS = np.array([0.347, 0.463, 0.574, 0.739])
_KPSS_CRIT_95 = 0.463


@dataclass
class TestResult:
    """Outcome of one hypothesis test with its 95%-level decision."""

    statistic: float
    p_value: float
    reject_at_95: bool

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise DomainError(f"p_value must be in [0, 1], got {self.p_value}")


@dataclass
class BivariateSeries:
    """Aligned (diversity-change, volatility-change) series pair."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise DomainError("x and y must be equal-length vectors")
        if self.x.size < 20:
            raise DomainError(f"need at least 20 observations, got {self.x.size}")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise DomainError("series contain non-finite values")


@dataclass
class VarModel:
    """Fitted two-channel vector autoregression."""

    lag: int
    coefficients: np.ndarray  # (lag, 2, 2); coefficients[l][i, j]: y_i on x_j at lag l+1
    intercept: np.ndarray  # (2,)
    resid_cov: np.ndarray  # (2, 2), dof-corrected
    nobs: int
    rss: np.ndarray = field(default=None)  # per-equation residual sum of squares

    def companion_matrix(self) -> np.ndarray:
        k, p = 2, self.lag
        comp = np.zeros((k * p, k * p))
        comp[:k, :] = np.hstack([self.coefficients[l] for l in range(p)])
        if p > 1:
            comp[k:, :-k] = np.eye(k * (p - 1))
        return comp

    def is_stable(self) -> bool:
        return bool(np.max(np.abs(np.linalg.eigvals(self.companion_matrix()))) < 1.0)


def difference(series: Sequence[float]) -> np.ndarray:
    """First difference; output is one element shorter."""
    arr = np.asarray(series, dtype=float)
    if arr.size < 2:
        raise DomainError("differencing needs at least two observations")
    return np.diff(arr)


def _ols(y: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Least squares via lstsq; returns (coefficients, residuals, rss)."""
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise NumericalError("singular regressor matrix")
    resid = y - x @ coef
    return coef, resid, float(resid @ resid)


def _adf_regression(series: np.ndarray, p: int, trim: int):
    """Regression of dy_t on [1, y_{t-1}, dy_{t-1..p}], dropping ``trim`` head rows.

    ``trim`` >= p keeps a common estimation sample across candidate lags.
    """
    dy = np.diff(series)
    t = dy.size  # dy[i] = series[i+1] - series[i]
    y = dy[trim:]
    cols = [np.ones(t - trim), series[trim:t]]  # intercept, lagged level
    for j in range(1, p + 1):
        cols.append(dy[trim - j : t - j])
    x = np.column_stack(cols)
    return y, x


def adf_test(series: Sequence[float], max_lag: int | None = None) -> TestResult:
    """Augmented Dickey-Fuller unit-root test (constant, no trend).

    The augmentation lag is chosen by AIC over a common sample up to
    ``max_lag`` (default: Schwert-style 12 * (T/100)^(1/4)), then the
    chosen model is refit on the full usable sample. Null: unit root.
    """
    arr = np.asarray(series, dtype=float)
    t = arr.size
    if t < 25:
        raise DomainError(f"need at least 25 observations, got {t}")
    if float(arr.std()) == 0.0:
        raise DomainError("constant series has no unit-root test")
    if max_lag is None:
        max_lag = int(math.floor(12.0 * (t / 100.0) ** 0.25))
    max_lag = max(0, min(max_lag, (t - 1) // 2 - 2))

    best_p, best_aic = 0, math.inf
    for p in range(0, max_lag + 1):
        y, x = _adf_regression(arr, p, trim=max_lag)
        _, _, rss = _ols(y, x)
        nobs = y.size
        aic = nobs * math.log(rss / nobs) + 2 * x.shape[1]
        if aic < best_aic:
            best_aic, best_p = aic, p

    y, x = _adf_regression(arr, best_p, trim=best_p)
    coef, resid, rss = _ols(y, x)
    nobs, k = y.size, x.shape[1]
    s2 = rss / (nobs - k)
    xtx_inv = np.linalg.inv(x.T @ x)
    se = math.sqrt(s2 * xtx_inv[1, 1])
    tau = float(coef[1] / se)
    p_value = float(np.interp(tau, _DF_TAUS, _DF_PROBS))
    return TestResult(statistic=tau, p_value=p_value, reject_at_95=tau < _DF_CRIT_95)


def kpss_test(series: Sequence[float], bandwidth: int | None = None) -> TestResult:
    """KPSS level-stationarity test with Bartlett-kernel long-run variance.

    Default bandwidth floor(4 * (T/100)^(1/4)). Null: the series is
    (level-)stationary.
    """
    arr = np.asarray(series, dtype=float)
    t = arr.size
    if t < 25:
        raise DomainError(f"need at least 25 observations, got {t}")
    e = arr - arr.mean()
    if float(e.std()) == 0.0:
        raise DomainError("zero-variance series has no stationarity test")
    if bandwidth is None:
        bandwidth = int(math.floor(4.0 * (t / 100.0) ** 0.25))
    s = np.cumsum(e)
    lrv = float(e @ e) / t
    for lag in range(1, bandwidth + 1):
        w = 1.0 - lag / (bandwidth + 1.0)
        lrv += 2.0 * w * float(e[lag:] @ e[:-lag]) / t
    stat = float((s @ s) / (t**2 * lrv))
    p_value = float(np.interp(stat, _KPSS_STATS, _KPSS_PROBS))
    return TestResult(statistic=stat, p_value=p_value, reject_at_95=stat > _KPSS_CRIT_95)


def _var_design(series: BivariateSeries, lag: int, trim: int):
    """Stacked regressors for a VAR(lag), dropping ``trim`` leading rows."""
    data = np.column_stack([series.x, series.y])  # columns: (x, y)
    t = data.shape[0]
    y = data[trim:]
    cols = [np.ones(t - trim)]
    for l in range(1, lag + 1):
        cols.append(data[trim - l : t - l, 0])
        cols.append(data[trim - l : t - l, 1])
    x = np.column_stack(cols)
    return y, x


def fit_var(series: BivariateSeries, lag: int, trim: int | None = None) -> VarModel:
    """Equation-by-equation least squares VAR with intercept."""
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    t = series.x.size
    if t <= 2 * lag + 10:
        raise DomainError(f"series of length {t} too short for VAR({lag})")
    trim = lag if trim is None else max(trim, lag)
    y, x = _var_design(series, lag, trim)
    nobs, k = y.shape[0], x.shape[1]
    coefs = np.empty((2, k))
    resids = np.empty_like(y)
    rss = np.empty(2)
    for eq in range(2):
        coefs[eq], resids[:, eq], rss[eq] = _ols(y[:, eq], x)
    dof = nobs - k
    if dof <= 0:
        raise DomainError("not enough observations for degrees-of-freedom correction")
    resid_cov = resids.T @ resids / dof
    coefficients = np.empty((lag, 2, 2))
    for l in range(lag):
        # regressor layout: [1, x_{t-1}, y_{t-1}, x_{t-2}, y_{t-2}, ...]
        coefficients[l] = coefs[:, 1 + 2 * l : 3 + 2 * l]
    return VarModel(
        lag=lag,
        coefficients=coefficients,
        intercept=coefs[:, 0].copy(),
        resid_cov=resid_cov,
        nobs=nobs,
        rss=rss,
    )


def select_lag(series: BivariateSeries, max_lag: int = 10) -> tuple[int, np.ndarray]:
    """AIC-minimizing VAR order over a common estimation sample.

    Returns the selected lag and the AIC value for each candidate
    1..max_lag (useful for rank plots).
    """
    if max_lag < 1:
        raise DomainError(f"max_lag must be >= 1, got {max_lag}")
    t = series.x.size
    while max_lag > 1 and t <= 2 * max_lag + 10:
        max_lag -= 1
    aics = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        y, x = _var_design(series, lag, trim=max_lag)
        nobs = y.shape[0]
        resids = np.empty_like(y)
        for eq in range(2):
            _, resids[:, eq], _ = _ols(y[:, eq], x)
        sigma_ml = resids.T @ resids / nobs
        det = float(np.linalg.det(sigma_ml))
        if det <= 0.0:
            raise NumericalError("non-positive residual covariance determinant")
        n_params = 2 * (2 * lag + 1)
        aics[lag - 1] = math.log(det) + 2.0 * n_params / nobs
    return int(np.argmin(aics)) + 1, aics


def granger_test(series: BivariateSeries, lag: int) -> TestResult:
    """F-test of "x does not help predict y" against the VAR(lag) alternative.

    Compares the y equation with and without the lagged-x regressors on
    the same estimation sample; p-value from F(lag, T - 2*lag - 1).
    """
    if lag < 1:
        raise DomainError(f"lag must be >= 1, got {lag}")
    y, x_full = _var_design(series, lag, trim=lag)
    target = y[:, 1]
    # Restricted model: intercept + lagged y only (drop lagged-x columns).
    keep = [0] + [2 + 2 * l for l in range(lag)]
    x_restricted = x_full[:, keep]
    _, _, rss_u = _ols(target, x_full)
    _, _, rss_r = _ols(target, x_restricted)
    if rss_r < rss_u - 1e-10 * max(1.0, rss_u):
        raise NumericalError("restricted RSS below unrestricted RSS")
    nobs = target.size
    df2 = nobs - x_full.shape[1]
    if df2 <= 0:
        raise DomainError("not enough observations for the F-test")
    f_stat = max(0.0, (rss_r - rss_u) / lag) / (rss_u / df2)
    p_value = float(stats.f.sf(f_stat, lag, df2))
    return TestResult(statistic=float(f_stat), p_value=p_value, reject_at_95=p_value < 0.05)


def harmonic_mean_p(p_values: Sequence[float]) -> float:
    """Harmonic mean of p-values: n / sum(1/p_i)."""
    arr = np.asarray(p_values, dtype=float)
    if arr.size == 0:
        raise DomainError("need at least one p-value")
    if np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise DomainError("p-values must lie in (0, 1]")
    return float(arr.size / np.sum(1.0 / arr))


@dataclass
class IrfResult:
    """Orthogonalized impulse responses (first channel ordered first)."""

    responses: np.ndarray  # (horizon+1, 2, 2); responses[h][i, j]: channel i to shock j
    stable: bool

    def unit_shock_response(self, target: int = 1, shock: int = 0) -> np.ndarray:
        """Response of ``target`` to a one-unit shock in ``shock`` at each horizon."""
        scale = self.responses[0, shock, shock]
        return self.responses[:, target, shock] / scale


def impulse_response(model: VarModel, horizon: int = 15) -> IrfResult:
    """Moving-average coefficients times the lower Cholesky factor of the
    residual covariance.

    An unstable model is flagged but the responses are still computed.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    stable = model.is_stable()
    p = model.lag
    phi = [np.eye(2)]
    for h in range(1, horizon + 1):
        acc = np.zeros((2, 2))
        for j in range(1, min(h, p) + 1):
            acc += model.coefficients[j - 1] @ phi[h - j]
        phi.append(acc)
    try:
        chol = np.linalg.cholesky(model.resid_cov)
    except np.linalg.LinAlgError:
        # PSD but singular covariance: fall back to a sqrt via eigendecomposition.
        w, v = np.linalg.eigh(model.resid_cov)
        chol = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
    responses = np.stack([p_h @ chol for p_h in phi])
    return IrfResult(responses=responses, stable=stable)


@dataclass
class PipelineResult:
    """Per-run output of the diversity -> volatility causality pipeline."""

    adf_x: TestResult
    adf_y: TestResult
    kpss_x: TestResult
    kpss_y: TestResult
    stationarity_ok: bool
    selected_lag: int
    aic_by_lag: np.ndarray
    granger: TestResult
    model: VarModel
    irf: IrfResult


def causality_pipeline(
    diversity: Sequence[float],
    volatility: Sequence[float],
    *,
    max_lag: int = 10,
    horizon: int = 15,
) -> PipelineResult:
    """Full per-run pipeline on aligned raw (not yet differenced) series.

    Both inputs are first-differenced, gate-checked for stationarity
    (failures recorded, not fatal), the VAR order is AIC-selected, and
    the Granger test plus impulse responses are computed.
    """
    div = np.asarray(diversity, dtype=float)
    vol = np.asarray(volatility, dtype=float)
    if div.size != vol.size:
        raise DomainError("diversity and volatility series must be aligned")
    series = BivariateSeries(x=difference(div), y=difference(vol))
    adf_x = adf_test(series.x)
    adf_y = adf_test(series.y)
    kpss_x = kpss_test(series.x)
    kpss_y = kpss_test(series.y)
    stationarity_ok = (
        adf_x.reject_at_95
        and adf_y.reject_at_95
        and not kpss_x.reject_at_95
        and not kpss_y.reject_at_95
    )
    lag, aics = select_lag(series, max_lag=max_lag)
    model = fit_var(series, lag)
    granger = granger_test(series, lag)
    irf = impulse_response(model, horizon=horizon)
    return PipelineResult(
        adf_x=adf_x,
        adf_y=adf_y,
        kpss_x=kpss_x,
        kpss_y=kpss_y,
        stationarity_ok=stationarity_ok,
        selected_lag=lag,
        aic_by_lag=aics,
        granger=granger,
        model=model,
        irf=irf,
    )
