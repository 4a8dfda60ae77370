import numpy as np
import pytest

from piar.core import NoiseSpec, PeriodicCoefficients

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_par(rng, d, p, scale=0.4):
    """Random stationary PAR coefficients (rejection on the spectral radius)."""
    from piar.mcmatrix import mc_from_coeffs
    while True:
        c = PeriodicCoefficients(rng.uniform(-scale, scale, (d, p)))
        if np.max(np.abs(np.linalg.eigvals(mc_from_coeffs(c)))) < 0.9:
            return c


def random_noise(rng, d):
    return NoiseSpec(rng.uniform(0.5, 2.0, d))


def random_seeds(rng, d, k):
    """``d x k`` seeds with entries in [-1, 1] and ``|v| >= 0.05``."""
    v = rng.uniform(0.05, 1.0, (d, k))
    return v * rng.choice([-1.0, 1.0], (d, k))


def annihilation_series(rng, d, blocks, n_years=8):
    """Noise-free series driven only by unit roots.

    ``Z_T = J Z_{T-1}`` from a random ``Z_0``, ``X_T = X Z_T`` in VS order;
    returns the spec and the series of the first ``d`` components.
    """
    from piar.core import from_vs
    from piar.errors import InputError, SingularSimilarity
    from piar.mcmatrix import EigenSpec, similarity_matrix
    for _ in range(100):
        try:
            spec = EigenSpec(d, d, blocks, random_seeds(rng, d, sum(blocks)))
            xmat, jmat = similarity_matrix(spec)
        except (InputError, SingularSimilarity):
            continue
        z = rng.uniform(-1, 1, d)
        rows = []
        for _ in range(n_years):
            z = jmat @ z
            rows.append((xmat @ z)[:d])
        return spec, from_vs(rows, d)
    raise AssertionError("no valid spec found")


TABLE3 = {
    "I": {"true": [-1.07, 0.95, 0.70, -1.41, 0.15, 0.46, 0.24, 0.08],
          "mean": [-1.07, 0.95, 0.70, -1.41, 0.15, 0.45, 0.23, 0.07],
          "sd": [0.01, 0.02, 0.01, 0.01, 0.02, 0.07, 0.04, 0.01]},
    "II": {"true": [-0.73, 1.26, -4.00, -1.85, -1.12, 0.16, 4.17, -1.31, 0.29, 0.37, 0.44, 0.02],
           "mean": [-0.72, 1.27, -4.00, -1.86, -1.10, 0.16, 4.15, -1.33, 0.28, 0.37, 0.43, 0.02],
           "sd": [0.02, 0.02, 0.05, 0.01, 0.02, "<0.01", 0.08, 0.03, 0.05, 0.07, 0.08, "<0.01"]},
    "III": {"true": [-0.16, 1.83, 1.10, -3.21, -0.5, 0.28, -2.01, 3.53, 0.55, 0.91, -0.31, -6.45,
                     0.22, 0.35, 0.25, 0.05],
            "mean": [-0.15, 1.83, 1.10, -3.23, -0.5, 0.28, -2.02, 3.56, 0.55, 0.91, -0.31, -6.52,
                     0.22, 0.35, 0.25, 0.05],
            "sd": ["<0.01", 0.01, 0.01, 0.03, "<0.01", "<0.01", 0.02, 0.04, "<0.01", 0.01, "<0.01", 0.08,
                   0.04, 0.05, 0.04, 0.01]},
}


def table3_sd(name):
    """Published sd's; ``<0.01`` is read as its upper bound 0.01."""
    return np.array([0.01 if v == "<0.01" else v for v in TABLE3[name]["sd"]], dtype=float)


_MC_CACHE = {}


def mc_summary(name, reps, seed=42):
    """Monte Carlo refits of a built-in model at n = 240, cached per session."""
    from piar.experiment import run_experiment
    from piar.models import table2_model
    key = (name, reps, seed)
    if key not in _MC_CACHE:
        b = table2_model(name)
        _MC_CACHE[key] = run_experiment(b.spec, b.noise, 240, reps, seed)
    return _MC_CACHE[key]


_LR_CACHE = {}


def lr_null_statistics(reps=500, seed=7):
    """LR statistics for one unit root on Model I series (the null holds)."""
    from piar.diagnostics import lr_unit_root_test
    from piar.generate import SimConfig, simulate_piar
    from piar.models import table2_model
    key = (reps, seed)
    if key not in _LR_CACHE:
        b = table2_model("I")
        stats = []
        for r in range(reps):
            x = simulate_piar(SimConfig(b.spec, b.noise, 240, rng_seed=seed, replication=r))
            stats.append(lr_unit_root_test(x, 1, 1, n_starts=0).statistic)
        _LR_CACHE[key] = np.array(stats)
    return _LR_CACHE[key]


def mcleod_null_rejections(reps=2000, n_years=500, max_lag=12, seed=8):
    """Per-season McLeod rejections on simulated periodic white noise."""
    from piar.diagnostics import mcleod_stat, periodic_acf
    from piar.generate import make_rng
    from piar.core import PeriodicSeries
    rejected = total = 0
    for r in range(reps):
        e = PeriodicSeries(make_rng(seed, r).standard_normal(4 * n_years) * np.tile([1.0, 2.0, 0.5, 1.5], n_years), 4)
        for rep in mcleod_stat(periodic_acf(e, max_lag), 0):
            rejected += rep.reject
            total += 1
    return rejected / total
