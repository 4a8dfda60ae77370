"""Whole-year forecasts with error covariances.

Two equivalent routes are provided. The vector-of-seasons route writes a
PAR(p) model with ``p <= d`` as ``Phi0 X_T = Phi1 X_{T-1} + eps_T`` and
iterates ``B = Phi0^{-1} Phi1``. The multi-companion route iterates
``F_d`` on the state ``(X[N,d], ..., X[N,d] - m + 1)``, whose first ``d``
components are the VS vector.

Forecast rows are in descending season order, like the VS vectors.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import stats

from .core import PeriodicCoefficients, PeriodicSeries, season_of
from .errors import IncompleteYear, InputError, InsufficientHistory, OrderTooHigh, PeriodMismatch
from .estimate import FittedModel
from .mcmatrix import mc_from_coeffs, noise_cov_descending, sigma_u


@dataclass(frozen=True)
class ForecastResult:
    """``point[h-1]`` is the forecast for year ``N + h``.

    ``err_cov[h-1]`` is its error covariance; ``origin`` is the time index
    of the first forecast (season 1 of year ``N + 1``).
    """

    point: np.ndarray
    err_cov: np.ndarray
    period: int
    origin: int
    level: float = 0.95
    log_scale: bool = False

    @property
    def horizon(self) -> int:
        return self.point.shape[0]

    @property
    def std(self) -> np.ndarray:
        if self.horizon == 0:
            return np.empty_like(self.point)
        return np.sqrt(np.clip(np.diagonal(self.err_cov, axis1=1, axis2=2), 0.0, None))

    @property
    def lower(self) -> np.ndarray:
        return self.point - self._z() * self.std

    @property
    def upper(self) -> np.ndarray:
        return self.point + self._z() * self.std

    def _z(self) -> float:
        return float(stats.norm.ppf(0.5 + self.level / 2))

    def with_level(self, level: float) -> "ForecastResult":
        if not 0 < level < 1:
            raise InputError("level must lie in (0, 1)")
        return replace(self, level=level)

    def chronological(self, steps: Optional[int] = None):
        """``(times, point, lower, upper, std)`` for the first ``d`` components in time order.

        ``steps`` truncates to sub-year horizons.
        """
        d = self.period
        flip = slice(None, None, -1)
        pt = self.point[:, :d][:, flip].reshape(-1)
        lo = self.lower[:, :d][:, flip].reshape(-1)
        up = self.upper[:, :d][:, flip].reshape(-1)
        sd = self.std[:, :d][:, flip].reshape(-1)
        if steps is not None:
            if not 0 <= steps <= pt.size:
                raise InputError(f"steps must lie in [0, {pt.size}]")
            pt, lo, up, sd = pt[:steps], lo[:steps], up[:steps], sd[:steps]
        times = self.origin + np.arange(pt.size)
        return times, pt, lo, up, sd

    def back_transform(self):
        """``(times, point, lower, upper)`` exponentiated (no bias correction)."""
        times, pt, lo, up, _ = self.chronological()
        return times, np.exp(pt), np.exp(lo), np.exp(up)


def _final_year_start(x: PeriodicSeries) -> int:
    if len(x) == 0 or season_of(x.times[-1], x.period) != x.period:
        raise IncompleteYear("the series must end with a complete year (last observation in season d)")
    return int(x.times[-1]) + 1


def _check(model: FittedModel, x: PeriodicSeries):
    if x.period != model.period:
        raise PeriodMismatch(f"model period {model.period} != series period {x.period}")
    if model.sigma2.period != model.period:
        raise PeriodMismatch("noise variances do not match the model period")


def _accumulate(step: np.ndarray, state: np.ndarray, shock_cov: np.ndarray, horizon: int):
    k = state.size
    point = np.empty((horizon, k))
    covs = np.empty((horizon, k, k))
    cur = state
    acc = np.zeros((k, k))
    power = np.eye(k)
    for h in range(horizon):
        cur = step @ cur
        point[h] = cur
        acc = acc + power @ shock_cov @ power.T
        covs[h] = 0.5 * (acc + acc.T)
        power = step @ power
    return point, covs


def vs_matrices(coeffs: PeriodicCoefficients):
    """``(Phi0, Phi1)`` of the VS form for order ``p <= d``.

    Row ``j`` (1-based) belongs to season ``d - j + 1``:
    ``(Phi0)_{jk} = -phi_{k-j, d-j+1}`` for ``k > j`` with a unit diagonal,
    and ``(Phi1)_{jk} = phi_{k+d-j, d-j+1}``.
    """
    d, p = coeffs.period, coeffs.order
    if p > d:
        raise OrderTooHigh(f"the VS form needs p <= d, got p={p}, d={d}")
    phi0 = np.eye(d)
    phi1 = np.zeros((d, d))
    for j in range(1, d + 1):
        s = d - j + 1
        for k in range(1, d + 1):
            if k > j:
                phi0[j - 1, k - 1] = -coeffs.coef(k - j, s)
            phi1[j - 1, k - 1] = coeffs.coef(k + d - j, s)
    return phi0, phi1


def forecast_vs(model: FittedModel, x: PeriodicSeries, horizon: int, level: float = 0.95) -> ForecastResult:
    """``X_{N+h} = (Phi0^{-1} Phi1)^h X_N`` with the accumulated error covariance."""
    _check(model, x)
    if horizon < 0:
        raise InputError("horizon must be non-negative")
    coeffs = model.full_filter
    d = coeffs.period
    phi0, phi1 = vs_matrices(coeffs)
    origin = _final_year_start(x)
    if len(x) < d:
        raise InsufficientHistory("need the last complete year")
    last = x.values[-d:][::-1] - model.mean
    phi0_inv = np.linalg.solve(phi0, np.eye(d))
    step = phi0_inv @ phi1
    shock = phi0_inv @ noise_cov_descending(model.sigma2.sigma2, d) @ phi0_inv.T
    point, covs = _accumulate(step, last, shock, horizon)
    return ForecastResult(point + model.mean, covs, d, origin, level)


def forecast_mc(model: FittedModel, x: PeriodicSeries, horizon: int, level: float = 0.95) -> ForecastResult:
    """``X_{N+h} = F_d^h X_N`` on the ``m = max(p, d)`` state with ``Sigma_u = Omega Sigma_eps Omega'``."""
    _check(model, x)
    if horizon < 0:
        raise InputError("horizon must be non-negative")
    coeffs = model.full_filter
    d = coeffs.period
    m = max(coeffs.order, d)
    origin = _final_year_start(x)
    if len(x) < m:
        raise InsufficientHistory(f"need {m} trailing observations, got {len(x)}")
    state = x.values[-m:][::-1] - model.mean
    f = mc_from_coeffs(coeffs)
    point, covs = _accumulate(f, state, sigma_u(coeffs, model.sigma2.sigma2), horizon)
    return ForecastResult(point + model.mean, covs, d, origin, level)
