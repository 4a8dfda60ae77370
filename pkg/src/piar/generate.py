"""Simulation of PAR and periodically integrated AR series.

Integrated series are generated through their PI-filter: the
PI-parameters are derived from the seed-vectors, a stationary PAR part
``y_t`` is simulated with burn-in, and ``x_t = sum_i theta_{i,s} x_{t-i} + y_t``
is run from zero initial values. This avoids factoring ``F_d`` into
companion matrices and has the same law.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import NoiseSpec, PeriodicCoefficients, PeriodicSeries, season_of
from .errors import InputError, NonStationaryCoefficients, PeriodMismatch
from .mcmatrix import EigenSpec, mc_from_coeffs
from .pifilter import theta_general


def make_rng(seed: int, replication: Optional[int] = None) -> np.random.Generator:
    """Generator for ``seed``; ``replication`` selects an independent substream."""
    if replication is None:
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(replication),)))


def periodic_noise(noise: NoiseSpec, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    seasons = season_of(times, noise.period)
    return rng.standard_normal(times.size) * noise.sd[seasons - 1]


def _recurse(phi: np.ndarray, times: np.ndarray, drive: np.ndarray) -> np.ndarray:
    """``x_t = sum_i phi_{i,s(t)} x_{t-i} + drive_t`` from zero pre-sample values."""
    d, q = phi.shape
    if q == 0:
        return drive.copy()
    rows = phi[season_of(times, d) - 1]
    x = np.zeros(q + drive.size)
    for k in range(drive.size):
        # x[k + q] is time times[k]; x[k:k+q] reversed holds lags 1..q
        x[k + q] = rows[k] @ x[k : k + q][::-1] + drive[k]
    return x[q:]


@dataclass
class SimConfig:
    """Simulation set-up.

    ``spec`` is either eigen information (the PI-filter is derived from the
    seeds) or the PI-filter coefficients themselves. ``replication`` selects
    an independent substream of ``rng_seed``.
    """

    spec: Union[EigenSpec, PeriodicCoefficients]
    noise: NoiseSpec
    n: int
    stationary: Optional[PeriodicCoefficients] = None
    burn_in: int = 0
    rng_seed: int = 0
    replication: Optional[int] = None

    @property
    def period(self) -> int:
        return self.spec.d if isinstance(self.spec, EigenSpec) else self.spec.period

    def pi_filter(self) -> PeriodicCoefficients:
        return theta_general(self.spec) if isinstance(self.spec, EigenSpec) else self.spec


def simulate_stationary(coeffs: PeriodicCoefficients, noise: NoiseSpec, n: int, burn_in: int,
                        rng: np.random.Generator) -> np.ndarray:
    """PAR draw for times ``1..n`` after ``burn_in`` discarded steps."""
    if noise.period != coeffs.period:
        raise PeriodMismatch("noise and coefficients disagree on the period")
    times = np.arange(1 - burn_in, n + 1)
    eps = periodic_noise(noise, times, rng)
    return _recurse(coeffs.phi, times, eps)[burn_in:]


def simulate_piar(config: SimConfig) -> PeriodicSeries:
    d = config.period
    if config.n < d or config.burn_in < 0:
        raise InputError("need n >= d and burn_in >= 0")
    if config.noise.period != d:
        raise PeriodMismatch("noise period differs from the model period")
    theta = config.pi_filter()
    psi = config.stationary if config.stationary is not None else PeriodicCoefficients.zeros(d)
    rng = make_rng(config.rng_seed, config.replication)
    y = simulate_stationary(psi, config.noise, config.n, config.burn_in, rng)
    x = _recurse(theta.phi, np.arange(1, config.n + 1), y)
    return PeriodicSeries(x, d)


def check_stationary(coeffs: PeriodicCoefficients, margin: float = 0.0) -> np.ndarray:
    eig = np.linalg.eigvals(mc_from_coeffs(coeffs)) if coeffs.order else np.zeros(1)
    if np.any(np.abs(eig) >= 1 - margin):
        raise NonStationaryCoefficients(
            f"multi-companion matrix has an eigenvalue of modulus {np.abs(eig).max():.6g} >= 1"
        )
    return eig


def simulate_par(coeffs: PeriodicCoefficients, noise: NoiseSpec, n: int, burn_in: int = 0,
                 rng_seed: int = 0, rng: Optional[np.random.Generator] = None) -> PeriodicSeries:
    """Periodically stationary PAR(p) draw of length ``n``."""
    check_stationary(coeffs)
    if n < 0 or burn_in < 0:
        raise InputError("n and burn_in must be non-negative")
    rng = make_rng(rng_seed) if rng is None else rng
    return PeriodicSeries(simulate_stationary(coeffs, noise, n, burn_in, rng), coeffs.period)
