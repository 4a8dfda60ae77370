"""Monte Carlo harness: simulate, refit and summarize parameter estimates.

Replication ``r`` draws from the substream ``(seed, r)``, so results do not
depend on how replications are spread over worker processes.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import NoiseSpec
from .errors import PiarError
from .estimate import fit_piar
from .generate import SimConfig, simulate_piar
from .mcmatrix import EigenSpec
from .pifilter import theta_general

logger = logging.getLogger(__name__)

THREADS_ENV = "PIAR_THREADS"


def parameter_names(d: int, m1: int) -> List[str]:
    return [f"theta_{i}_{s}" for i in range(1, m1 + 1) for s in range(1, d + 1)] + \
        [f"sigma2_{s}" for s in range(1, d + 1)]


@dataclass
class MCSummary:
    names: List[str]
    true: np.ndarray
    estimates: np.ndarray
    failures: int = 0

    @property
    def reps(self) -> int:
        return int(np.sum(np.all(np.isfinite(self.estimates), axis=1)))

    def _ok(self) -> np.ndarray:
        return self.estimates[np.all(np.isfinite(self.estimates), axis=1)]

    @property
    def mean(self) -> np.ndarray:
        return self._ok().mean(axis=0)

    @property
    def sd(self) -> np.ndarray:
        return self._ok().std(axis=0, ddof=1)

    @property
    def rmse(self) -> np.ndarray:
        return np.sqrt(np.mean((self._ok() - self.true) ** 2, axis=0))

    def rows(self):
        return [("true", self.true), ("mean", self.mean), ("sd", self.sd), ("RMSE", self.rmse)]


def worker_count(requested: Optional[int] = None) -> int:
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        requested = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(requested))


def _replicate(args) -> np.ndarray:
    spec, noise, n, seed, r, n_starts = args
    x = simulate_piar(SimConfig(spec, noise, n, rng_seed=seed, replication=r))
    k = spec.d * spec.m1 + spec.d
    try:
        fit = fit_piar(x, spec.m1, spec.m1, spec.blocks, n_starts=n_starts, seed=r)
    except PiarError as exc:
        logger.warning("replication %d failed: %s", r, exc)
        return np.full(k, np.nan)
    return np.concatenate([fit.pi_filter.phi.T.reshape(-1), fit.sigma2.sigma2])


def run_experiment(spec: EigenSpec, noise: NoiseSpec, n: int, reps: int, seed: int,
                   n_starts: int = 0, workers: Optional[int] = None) -> MCSummary:
    """Refit a pure PIAR(m1) model on ``reps`` simulated series of length ``n``."""
    jobs = [(spec, noise, n, seed, r, n_starts) for r in range(reps)]
    workers = worker_count(workers)
    if workers == 1 or reps < 2:
        results = [_replicate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs, chunksize=max(1, reps // (4 * workers))))
    est = np.array(results).reshape(reps, -1)
    true = np.concatenate([theta_general(spec).phi.T.reshape(-1), noise.sigma2])
    failures = int(np.sum(~np.all(np.isfinite(est), axis=1)))
    return MCSummary(parameter_names(spec.d, spec.m1), true, est, failures)
