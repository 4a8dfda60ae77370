"""Residual diagnostics, the unit-root likelihood-ratio test and accuracy metrics."""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from .core import PeriodicSeries, season_of
from .errors import AlignmentError, DegenerateVariance, FitFailed, InputError, InsufficientData, PiarError
from .estimate import FittedModel, fit_par, fit_piar, residuals
from .forecast import ForecastResult

# 5% quantiles of the trace statistic without deterministic terms, keyed by
# the number of unit roots (Johansen 1995, "Likelihood-based inference in
# cointegrated vector autoregressive models", Table 15.1).
JOHANSEN_TRACE_5PCT = {1: 4.14, 2: 12.21, 3: 24.08, 4: 39.71, 5: 59.24}
JOHANSEN_SOURCE = "Johansen (1995), Table 15.1, no deterministic terms, 95% quantile"


@dataclass(frozen=True)
class PeriodicACF:
    """``rho[s-1, l-1]``: correlation of season-``s`` residuals with their lag ``l``."""

    rho: np.ndarray
    n_years: int

    @property
    def period(self) -> int:
        return self.rho.shape[0]

    @property
    def max_lag(self) -> int:
        return self.rho.shape[1]

    @property
    def bound(self) -> float:
        return 1.96 / math.sqrt(self.n_years)


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    critical_value: float
    source: str
    df: Optional[int] = None
    season: Optional[int] = None

    @property
    def reject(self) -> bool:
        return self.statistic > self.critical_value

    @property
    def decision(self) -> str:
        return "reject" if self.reject else "accept"


def periodic_acf(resid: PeriodicSeries, max_lag: int) -> PeriodicACF:
    """Season-wise residual autocorrelations up to ``max_lag``.

    Each ``rho(s, l)`` uses the pairs ``(e_t, e_{t-l})`` with ``t`` in season
    ``s`` and normalizes by the second moments of exactly those pairs, so
    ``|rho| <= 1``. Residuals are assumed to have mean zero.
    """
    d = resid.period
    if max_lag < 1:
        raise InputError("max_lag must be at least 1")
    n_years = len(resid) // d
    if n_years < max_lag + 2:
        raise InsufficientData(f"need at least {max_lag + 2} years of residuals, got {n_years}")
    e = resid.values
    seasons = resid.seasons
    rho = np.empty((d, max_lag))
    for lag in range(1, max_lag + 1):
        cur, prev = e[lag:], e[:-lag]
        sea = seasons[lag:]
        for s in range(1, d + 1):
            sel = sea == s
            a, b = cur[sel], prev[sel]
            den = math.sqrt(float(a @ a) * float(b @ b))
            if den == 0.0:
                raise DegenerateVariance(f"season {s} residuals have zero variance at lag {lag}")
            rho[s - 1, lag - 1] = float(a @ b) / den
    return PeriodicACF(rho, n_years)


def mcleod_stat(acf: PeriodicACF, p_fitted: int) -> List[TestReport]:
    """Per-season portmanteau ``Q_s = N sum_l rho(s, l)^2`` against chi-square with ``L - p`` df."""
    df = acf.max_lag - p_fitted
    if df < 1:
        raise InputError(f"max lag {acf.max_lag} must exceed the fitted order {p_fitted}")
    crit = float(stats.chi2.ppf(0.95, df))
    q = acf.n_years * np.sum(acf.rho ** 2, axis=1)
    return [TestReport("mcleod", float(q[s]), crit, f"chi2({df}) 95% quantile", df=df, season=s + 1)
            for s in range(acf.period)]


def _vs_residuals(resid: PeriodicSeries, first_year: int, last_year: int) -> np.ndarray:
    d = resid.period
    start = (first_year - 1) * d + 1
    i0 = start - resid.origin
    block = resid.values[i0 : i0 + (last_year - first_year + 1) * d]
    return block.reshape(-1, d)[:, ::-1]


def lr_statistic(null_resid: PeriodicSeries, alt_resid: PeriodicSeries, covariance: str = "diagonal") -> float:
    """Likelihood-ratio statistic from null and alternative residuals.

    ``covariance="diagonal"`` compares per-season residual variances over all
    common residual times, ``sum_s n_s log(S0_ss / S_ss)``; this is twice
    the log-likelihood difference of the fitted models and is non-negative
    for nested least-squares fits. ``covariance="full"`` uses the ``d x d``
    VS residual cross-product matrices over the common complete years,
    ``N log(|S0| / |S|)``.
    """
    d = null_resid.period
    start = max(null_resid.origin, alt_resid.origin)
    end = min(int(null_resid.times[-1]), int(alt_resid.times[-1]))
    if covariance == "diagonal":
        e0 = null_resid.values[start - null_resid.origin : end - null_resid.origin + 1]
        e1 = alt_resid.values[start - alt_resid.origin : end - alt_resid.origin + 1]
        seasons = season_of(np.arange(start, end + 1), d)
        stat = 0.0
        for s in range(1, d + 1):
            sel = seasons == s
            r0, r1 = float(e0[sel] @ e0[sel]), float(e1[sel] @ e1[sel])
            if sel.sum() == 0 or r0 <= 0 or r1 <= 0:
                raise DegenerateVariance(f"season {s} residuals have zero variance")
            stat += sel.sum() * math.log(r0 / r1)
        return stat
    if covariance != "full":
        raise InputError(f"unknown covariance {covariance!r}")
    first_year = -(-(start - 1) // d) + 1
    last_year = end // d
    n_years = last_year - first_year + 1
    if n_years <= d:
        raise InsufficientData(f"need more than {d} complete years of residuals, got {max(n_years, 0)}")
    e0 = _vs_residuals(null_resid, first_year, last_year)
    e1 = _vs_residuals(alt_resid, first_year, last_year)
    sign0, ld0 = np.linalg.slogdet(e0.T @ e0 / n_years)
    sign1, ld1 = np.linalg.slogdet(e1.T @ e1 / n_years)
    if sign0 <= 0 or sign1 <= 0:
        raise DegenerateVariance("residual covariance matrix is singular")
    return n_years * (ld0 - ld1)


def lr_unit_root_test(x: PeriodicSeries, p: int, m1: int, blocks: Optional[Sequence[int]] = None,
                      demean: bool = False, covariance: str = "diagonal", **fit_kwargs) -> TestReport:
    """LR test of ``m1`` unit roots (null PIAR) against an unrestricted PAR(p).

    The null model is fitted by concentrated maximum likelihood so that the
    statistic compares maximized likelihoods.
    """
    if m1 not in JOHANSEN_TRACE_5PCT:
        raise InputError(f"no stored critical value for m1={m1}")
    try:
        null = fit_piar(x, p, m1, blocks, demean=demean, criterion="ml", **fit_kwargs)
        alt = fit_par(x, p, demean=demean)
    except PiarError as exc:
        raise FitFailed(f"{exc.code}: {exc}") from exc
    stat = lr_statistic(residuals(null, x), residuals(alt, x), covariance)
    return TestReport("lr_unit_root", float(stat), JOHANSEN_TRACE_5PCT[m1], JOHANSEN_SOURCE, df=m1)


@dataclass(frozen=True)
class FitMetrics:
    aic: float
    bic: float
    mape: np.ndarray
    rmse: np.ndarray


def fit_metrics(model: FittedModel, holdout: PeriodicSeries, forecasts: ForecastResult,
                back_transform: bool = False) -> FitMetrics:
    """Information criteria and cumulative MAPE (percent) / RMSE by forecast step.

    With ``back_transform`` the log-scale forecasts are exponentiated
    before comparison with ``holdout`` (given on the original scale).
    """
    if holdout.period != forecasts.period:
        raise AlignmentError("holdout and forecast periods differ")
    if holdout.origin != forecasts.origin:
        raise AlignmentError(f"holdout starts at t={holdout.origin}, forecasts at t={forecasts.origin}")
    times, pt, _, _, _ = forecasts.chronological()
    if len(holdout) > pt.size:
        raise AlignmentError(f"holdout of length {len(holdout)} exceeds the {pt.size} forecast steps")
    pred = np.exp(pt[: len(holdout)]) if back_transform else pt[: len(holdout)]
    actual = holdout.values
    err = pred - actual
    steps = np.arange(1, actual.size + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mape = 100.0 * np.cumsum(np.abs(err / actual)) / steps
    rmse = np.sqrt(np.cumsum(err ** 2) / steps)
    return FitMetrics(model.aic, model.bic, mape, rmse)


@dataclass(frozen=True)
class NormalitySummary:
    skewness: float
    excess_kurtosis: float
    theoretical: np.ndarray
    ordered: np.ndarray


def normality_summary(resid: PeriodicSeries) -> NormalitySummary:
    """Moments and normal QQ coordinates of season-standardized residuals."""
    d = resid.period
    seasons = resid.seasons - 1
    e = resid.values
    scale = np.array([np.sqrt(np.mean(e[seasons == s] ** 2)) if np.any(seasons == s) else np.nan
                      for s in range(d)])
    if np.any(scale[np.unique(seasons)] == 0):
        raise DegenerateVariance("a season has zero residual variance")
    z = e / scale[seasons]
    (theo, ordered), _ = stats.probplot(z, dist="norm")
    return NormalitySummary(float(stats.skew(z)), float(stats.kurtosis(z)), theo, ordered)

