"""Periodic autoregressions and periodically integrated autoregressions via multi-companion matrices."""

from .core import NoiseSpec, PeriodicCoefficients, PeriodicFilter, PeriodicSeries, from_vs, season_of, to_vs
from .diagnostics import (PeriodicACF, TestReport, fit_metrics, lr_statistic, lr_unit_root_test, mcleod_stat,
                          normality_summary, periodic_acf)
from .errors import InputError, NumericalError, PiarError
from .estimate import FittedModel, fit_par, fit_piar, residuals
from .forecast import ForecastResult, forecast_mc, forecast_vs
from .generate import SimConfig, simulate_par, simulate_piar
from .mcmatrix import EigenSpec, fd_from_eigen, mc_from_coeffs, omega_matrix, sigma_u, unit_jordan
from .pifilter import alpha_from_seed, apply_filter, cascade, compose, theta_general, theta_two_chained, theta_two_simple

__all__ = [
    "NoiseSpec", "PeriodicCoefficients", "PeriodicFilter", "PeriodicSeries", "from_vs", "season_of", "to_vs",
    "PeriodicACF", "TestReport", "fit_metrics", "lr_statistic", "lr_unit_root_test", "mcleod_stat",
    "normality_summary", "periodic_acf", "InputError", "NumericalError", "PiarError", "FittedModel", "fit_par",
    "fit_piar", "residuals", "ForecastResult", "forecast_mc", "forecast_vs", "SimConfig", "simulate_par",
    "simulate_piar", "EigenSpec", "fd_from_eigen", "mc_from_coeffs", "omega_matrix", "sigma_u", "unit_jordan",
    "alpha_from_seed", "apply_filter", "cascade", "compose", "theta_general", "theta_two_chained",
    "theta_two_simple",
]
