"""Series container, season indexing and vector-of-seasons stacking.

Time ``t`` and the pair ``[T, s]`` (year ``T``, season ``s``) are linked by
``t = (T - 1) * d + s``. Series are stored chronologically; the descending
season order ``(X[T,d], ..., X[T,1])`` only appears at the vector-of-seasons
boundary (`to_vs` / `from_vs`).
"""

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, IncompleteYear, InputError


class SeasonIndex(NamedTuple):
    year: int
    season: int


def season_of(t, d):
    """Season of time ``t`` (1-based) for period ``d``.

    Works elementwise on arrays and for ``t <= 0`` (pre-sample times).
    """
    if np.any(np.asarray(d) < 1):
        raise InputError("period must be >= 1")
    return (np.asarray(t) - 1) % d + 1 if np.ndim(t) else int((t - 1) % d + 1)


def year_season(t: int, d: int) -> SeasonIndex:
    return SeasonIndex((t - 1) // d + 1, season_of(t, d))


def time_index(year: int, season: int, d: int) -> int:
    if not 1 <= season <= d:
        raise InputError(f"season {season} outside [1, {d}]")
    return (year - 1) * d + season


@dataclass(frozen=True)
class PeriodicSeries:
    """Univariate series with period ``period``.

    ``origin`` is the time index of ``values[0]``; the default 1 means the
    series starts at year 1, season 1.
    """

    values: np.ndarray
    period: int
    origin: int = 1

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if self.period < 1:
            raise InputError(f"period must be >= 1, got {self.period}")
        if not np.all(np.isfinite(v)):
            raise InputError("series values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "period", int(self.period))
        object.__setattr__(self, "origin", int(self.origin))

    def __len__(self):
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.origin + np.arange(self.values.size)

    @property
    def seasons(self) -> np.ndarray:
        return season_of(self.times, self.period)

    def with_values(self, values, origin=None):
        return PeriodicSeries(values, self.period, self.origin if origin is None else origin)


@dataclass(frozen=True)
class PeriodicCoefficients:
    """Seasonally varying lag coefficients.

    Row ``s - 1`` holds ``(a_{1,s}, ..., a_{q,s})`` of the filter
    ``1 - sum_i a_{i,s} L^i``. The same container serves as PAR
    coefficients, PI-filters and stationary filters.
    """

    phi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=float)
        if phi.ndim == 1:
            phi = phi.reshape(-1, 1)
        if phi.ndim != 2 or phi.shape[0] < 1:
            raise DimensionMismatch(f"coefficients must be a d x q matrix, got shape {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise InputError("coefficients must be finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def period(self) -> int:
        return self.phi.shape[0]

    @property
    def order(self) -> int:
        return self.phi.shape[1]

    @property
    def coeffs(self) -> np.ndarray:
        return self.phi

    @classmethod
    def zeros(cls, d, order=0):
        return cls(np.zeros((d, order)))

    def coef(self, i, s):
        """``a_{i,s}`` with d-periodic season and zero beyond the order."""
        if i < 1 or i > self.order:
            return 0.0
        return float(self.phi[season_of(s, self.period) - 1, i - 1])


PeriodicFilter = PeriodicCoefficients


@dataclass(frozen=True)
class NoiseSpec:
    """Per-season innovation variances ``sigma2[s - 1]``."""

    sigma2: np.ndarray = field()

    def __post_init__(self):
        s2 = np.array(self.sigma2, dtype=float).reshape(-1)
        if s2.size < 1 or not np.all(np.isfinite(s2)) or np.any(s2 < 0):
            raise InputError("sigma2 must be a non-empty vector of finite non-negative variances")
        s2.setflags(write=False)
        object.__setattr__(self, "sigma2", s2)

    @property
    def period(self) -> int:
        return self.sigma2.size

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.sigma2)


def to_vs(series: PeriodicSeries) -> np.ndarray:
    """Stack a series into vectors of seasons.

    Returns an ``N x d`` array whose row ``T - 1`` is
    ``(X[T,d], X[T,d-1], ..., X[T,1])``.
    """
    d, n = series.period, len(series)
    if season_of(series.origin, d) != 1 or n % d:
        raise IncompleteYear(
            f"series of length {n} starting at season {season_of(series.origin, d)} "
            f"does not consist of whole years of period {d}"
        )
    return series.values.reshape(-1, d)[:, ::-1].copy()


def from_vs(vectors: Sequence[Sequence[float]], d: int, first_year: int = 1) -> PeriodicSeries:
    """Inverse of `to_vs`."""
    arr = np.asarray(vectors, dtype=float)
    if arr.size == 0:
        return PeriodicSeries(np.empty(0), d, time_index(first_year, 1, d))
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise DimensionMismatch(f"each vector must have length {d}, got shape {arr.shape}")
    return PeriodicSeries(arr[:, ::-1].reshape(-1), d, time_index(first_year, 1, d))
