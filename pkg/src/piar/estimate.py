"""Estimation of PAR and periodically integrated AR models.

PAR(p) models are fitted by per-season least squares. PIAR models are
fitted in two steps: the seed-vectors of the unit roots are estimated by
minimizing the residual sum of squares of the PI-filtered series (the
PI-parameters are always obtained by solving the per-season seed systems,
so the unit-root restrictions hold by construction), then a stationary
PAR of order ``p - m1`` is fitted to the filtered series.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .core import NoiseSpec, PeriodicCoefficients, PeriodicFilter, PeriodicSeries
from .errors import CollinearLags, InputError, InsufficientData, OptimizerFailed, PeriodMismatch, SingularSystem
from .mcmatrix import COND_LIMIT, mc_from_coeffs, unit_jordan
from .pifilter import apply_filter, compose, theta_from_seeds

logger = logging.getLogger(__name__)


def commutant_dim(blocks: Sequence[int]) -> int:
    """Dimension of the matrices commuting with the unit Jordan matrix.

    Seeds ``X`` and ``X G`` give the same PI-filter for every invertible
    ``G`` in this commutant, so this is the number of restrictions the
    unit roots impose on the ``d * m1`` PI-parameters.
    """
    return int(sum(min(a, b) for a in blocks for b in blocks))


@dataclass
class FittedModel:
    """Estimated ``psi_s(L) theta_s(L) (x_t - mean) = eps_t``."""

    pi_filter: PeriodicFilter
    stationary: PeriodicCoefficients
    sigma2: NoiseSpec
    rss_by_season: np.ndarray
    loglik: float
    n_used: int
    seeds: Optional[np.ndarray] = None
    blocks: Tuple[int, ...] = ()
    mean: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def period(self) -> int:
        return self.sigma2.period

    @property
    def m1(self) -> int:
        return self.pi_filter.order

    @property
    def p(self) -> int:
        return self.pi_filter.order + self.stationary.order

    @property
    def full_filter(self) -> PeriodicFilter:
        """PAR(p) coefficients of the whole model."""
        return compose(self.stationary, self.pi_filter)

    @property
    def n_params(self) -> int:
        return self.period * self.p + self.period - commutant_dim(self.blocks)

    @property
    def aic(self) -> float:
        return -2.0 * self.loglik + 2.0 * self.n_params

    @property
    def bic(self) -> float:
        return -2.0 * self.loglik + self.n_params * np.log(self.n_used)

    @classmethod
    def from_coefficients(cls, coeffs: PeriodicCoefficients, sigma2, mean: float = 0.0):
        """Wrap known PAR coefficients (no unit-root structure) as a model."""
        d = coeffs.period
        noise = sigma2 if isinstance(sigma2, NoiseSpec) else NoiseSpec(sigma2)
        return cls(PeriodicFilter(np.zeros((d, 0))), coeffs, noise, np.full(d, np.nan), np.nan, 0, mean=mean)


def gaussian_loglik(rss: np.ndarray, counts: np.ndarray) -> float:
    """Concentrated Gaussian log-likelihood with per-season variances ``rss / counts``."""
    s2 = rss / counts
    with np.errstate(divide="ignore"):
        return float(-0.5 * np.sum(counts * (np.log(2 * np.pi) + np.log(s2) + 1.0)))


def _lagged(x: PeriodicSeries, q: int):
    """Targets ``x_t`` (t > q), their ``q`` lags, and 0-based seasons."""
    v = x.values
    n = v.size
    target = v[q:]
    lags = np.column_stack([v[q - i : n - i] for i in range(1, q + 1)]) if q else np.empty((n - q, 0))
    return target, lags, x.seasons[q:] - 1


def _centre(x: PeriodicSeries, demean: bool):
    if not demean:
        return x, 0.0
    mean = float(np.mean(x.values))
    return x.with_values(x.values - mean), mean


def fit_par(x: PeriodicSeries, p: int, demean: bool = False) -> FittedModel:
    """Per-season least squares fit of a PAR(p) model.

    With ``demean=True`` the overall mean is subtracted first and stored
    on the model.
    """
    d, n = x.period, len(x)
    if p < 0:
        raise InputError("order p must be non-negative")
    if n < d * (p + 2):
        raise InsufficientData(f"need at least {d * (p + 2)} observations for PAR({p}) with d={d}, got {n}")
    x, mean = _centre(x, demean)
    target, lags, seasons = _lagged(x, p)
    phi = np.zeros((d, p))
    rss = np.zeros(d)
    counts = np.zeros(d)
    for s in range(d):
        sel = seasons == s
        y, z = target[sel], lags[sel]
        counts[s] = y.size
        if p:
            coef, _, rank, _ = np.linalg.lstsq(z, y, rcond=None)
            if rank < p:
                raise CollinearLags(f"lags are collinear for season {s + 1}")
            phi[s] = coef
            resid = y - z @ coef
        else:
            resid = y
        rss[s] = resid @ resid
    sigma2 = rss / counts
    return FittedModel(
        pi_filter=PeriodicFilter(np.zeros((d, 0))),
        stationary=PeriodicCoefficients(phi),
        sigma2=NoiseSpec(sigma2),
        rss_by_season=rss,
        loglik=gaussian_loglik(rss, counts),
        n_used=int(counts.sum()),
        mean=mean,
    )


def _block_starts(blocks: Optional[Sequence[int]], k: int):
    blocks = (1,) * k if blocks is None else tuple(blocks)
    starts = np.concatenate([[0], np.cumsum(blocks)[:-1]]).astype(int) if blocks else np.zeros(0, int)
    return list(zip(starts.tolist(), blocks))


def normalize_seeds(seeds: np.ndarray, blocks: Optional[Sequence[int]] = None) -> np.ndarray:
    """Scale seeds to unit norm with the first non-zero entry positive.

    Inside a Jordan chain only a common scale keeps the chain, so every
    column of a block is divided by the scale of the block's first column.
    """
    c = np.array(seeds, dtype=float)
    for k, r in _block_starts(blocks, c.shape[1]):
        col = c[:, k]
        nz = np.flatnonzero(np.abs(col) > 0)
        if nz.size:
            c[:, k : k + r] *= np.sign(col[nz[0]]) / np.linalg.norm(col)
    return c


class SeedObjective:
    """Seed criterion of the first estimation step.

    ``criterion="rss"`` is the residual sum of squares of the PI-filtered
    series. It is a quadratic form in each ``theta_s``, so the lag Gram
    matrices are accumulated once and each evaluation only solves ``d``
    small systems.

    ``criterion="ml"`` is the concentrated Gaussian criterion
    ``sum_s n_s log RSS_s`` of the whole PIAR(p) model, with the stationary
    part of order ``p - m1`` profiled out by per-season least squares on
    the filtered series.
    """

    def __init__(self, x: PeriodicSeries, blocks: Sequence[int], cond_limit: float = COND_LIMIT,
                 criterion: str = "rss", p: Optional[int] = None):
        if criterion not in ("rss", "ml"):
            raise InputError(f"unknown criterion {criterion!r}")
        self.criterion = criterion
        self.x = x
        self.d = x.period
        self.blocks = tuple(blocks)
        self.m1 = sum(self.blocks)
        self.j_unit = unit_jordan(self.blocks)
        self.cond_limit = cond_limit
        target, lags, seasons = _lagged(x, self.m1)
        d, m1 = self.d, self.m1
        self.gram = np.zeros((d, m1, m1))
        self.cross = np.zeros((d, m1))
        self.sumsq = np.zeros(d)
        self.counts = np.zeros(d)
        for s in range(d):
            sel = seasons == s
            z, y = lags[sel], target[sel]
            self.gram[s] = z.T @ z
            self.cross[s] = z.T @ y
            self.sumsq[s] = y @ y
            self.counts[s] = y.size
        s_idx = np.arange(1, d + 1)
        self.q = 0 if p is None else p - m1
        if self.q < 0:
            raise InputError(f"order p={p} below the number of unit roots {m1}")
        if self.q:
            self._seasons = seasons
            self._masks = [self._seasons[self.q :] == s for s in range(d)]
        self._tgt = d - s_idx
        self._lag = (d - s_idx + 1)[:, None] + np.arange(m1)[None, :]

    def theta(self, seeds: np.ndarray) -> Optional[np.ndarray]:
        """``d x m1`` PI-parameters, or ``None`` when a season system is ill-conditioned."""
        r = np.concatenate([seeds @ self.j_unit, seeds])
        a = r[self._lag].transpose(0, 2, 1)
        if not np.isfinite(a).all():
            return None
        sv = np.linalg.svd(a, compute_uv=False)
        # cond > limit, written without dividing by a possibly zero singular value
        if (sv[:, 0] > self.cond_limit * sv[:, -1]).any():
            return None
        return np.linalg.solve(a, r[self._tgt][..., None])[..., 0]

    def rss_by_season(self, theta: np.ndarray) -> np.ndarray:
        g_theta = np.matmul(self.gram, theta[..., None])[..., 0]
        return self.sumsq + (theta * (g_theta - 2.0 * self.cross)).sum(axis=1)

    def profile_rss(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Per-season RSS and counts after removing the order ``p - m1`` stationary part."""
        if not self.q:
            return self.rss_by_season(theta), self.counts
        v, m1, q = self.x.values, self.m1, self.q
        n = v.size
        rows = theta[self._seasons]
        y = v[m1:] - sum(rows[:, i - 1] * v[m1 - i : n - i] for i in range(1, m1 + 1))
        target = y[q:]
        lags = np.column_stack([y[q - j : y.size - j] for j in range(1, q + 1)])
        rss = np.empty(self.d)
        counts = np.empty(self.d)
        for s, sel in enumerate(self._masks):
            z, t = lags[sel], target[sel]
            coef = np.linalg.lstsq(z, t, rcond=None)[0]
            r = t - z @ coef
            rss[s] = r @ r
            counts[s] = t.size
        return rss, counts

    def __call__(self, seeds: np.ndarray) -> float:
        theta = self.theta(seeds)
        if theta is None:
            return np.inf
        if self.criterion == "rss":
            return float(np.sum(self.rss_by_season(theta)))
        rss, counts = self.profile_rss(theta)
        if np.any(rss <= 0):
            return -np.inf
        return float(np.sum(counts * np.log(rss)))


class _Chart:
    """Coordinates fixing one entry of each seed column to 1.

    Seeds ``X`` and ``X G`` with ``G`` commuting with the unit Jordan matrix
    give the same PI-filter. Within a chain such ``G`` are upper triangular
    Toeplitz, which is enough to set one entry per column to 1: the first
    column is scaled, later columns at chain position ``i`` are shifted by
    multiples of the columns ``i`` places before them.
    """

    def __init__(self, start: np.ndarray, blocks: Sequence[int]):
        self.shape = start.shape
        self.blocks = _block_starts(blocks, start.shape[1])
        d, k = start.shape
        self.pivots = np.zeros(k, dtype=int)
        for j, r in self.blocks:
            order = np.argsort(-np.abs(start[:, j]), kind="stable")
            self.pivots[j] = order[0]
            if r > 1:
                self.pivots[j + 1 : j + r] = order[1] if d > 1 else order[0]
        self._free = np.ones((d, k), dtype=bool)
        self._free[self.pivots, np.arange(k)] = False

    def to_params(self, seeds: np.ndarray) -> np.ndarray:
        c = np.array(seeds, dtype=float)
        for j, r in self.blocks:
            c[:, j : j + r] /= c[self.pivots[j], j]
            for i in range(1, r):
                p = self.pivots[j + i]
                t = (1.0 - c[p, j + i]) / c[p, j]
                c[:, j + i : j + r] += t * c[:, j : j + r - i]
        return c.T[self._free.T]

    def to_seeds(self, u: np.ndarray) -> np.ndarray:
        c = np.ones(self.shape[::-1])
        c[self._free.T] = u
        return c.T


def _real_invariant_basis(f: np.ndarray, m1: int) -> np.ndarray:
    """Real basis of the invariant subspace of the ``m1`` eigenvalues closest to 1."""
    w, v = np.linalg.eig(f)
    order = np.argsort(np.abs(w - 1.0))
    cols = []
    used = set()
    for k in order:
        if len(cols) >= m1:
            break
        if k in used:
            continue
        used.add(k)
        if abs(w[k].imag) > 1e-10:
            partner = int(np.argmin(np.abs(w - np.conj(w[k])) + (np.arange(w.size) == k)))
            used.add(partner)
            cols.extend([v[:, k].real, v[:, k].imag])
        else:
            cols.append(v[:, k].real)
    return np.column_stack(cols[:m1])


def _chain_basis(f: np.ndarray, basis: np.ndarray, blocks: Sequence[int]) -> np.ndarray:
    """Arrange an invariant-subspace basis as Jordan chains for ``blocks`` (best effort)."""
    if all(r == 1 for r in blocks):
        return basis
    b = np.linalg.lstsq(basis, f @ basis, rcond=None)[0] - np.eye(basis.shape[1])
    cols = []
    _, _, vt = np.linalg.svd(b)
    w = vt[-1]
    for _ in range(blocks[0]):
        cols.append(basis @ w)
        w = np.linalg.lstsq(b, w, rcond=None)[0]
    chain = np.column_stack(cols)
    rest = [basis[:, j] for j in range(basis.shape[1])]
    while chain.shape[1] < basis.shape[1] and rest:
        cand = np.column_stack([chain, rest.pop(0)])
        if np.linalg.matrix_rank(cand) == cand.shape[1]:
            chain = cand
    return chain


def initial_seeds(x: PeriodicSeries, p: int, blocks: Sequence[int]) -> Optional[np.ndarray]:
    """Starting seeds from the eigenvectors of an unrestricted PAR fit."""
    m1 = sum(blocks)
    try:
        par = fit_par(x, max(p, m1))
        f = mc_from_coeffs(par.stationary)
        basis = _chain_basis(f, _real_invariant_basis(f, m1), blocks)
    except (InputError, CollinearLags, np.linalg.LinAlgError):
        return None
    seeds = basis[: x.period]
    if seeds.shape[1] != m1 or np.linalg.matrix_rank(seeds) < m1:
        return None
    return normalize_seeds(seeds, blocks)


def _local_search(objective: SeedObjective, start: np.ndarray, scale: float, max_iter: int, polish: bool):
    chart = _Chart(start, objective.blocks)

    def f(u):
        return objective(chart.to_seeds(u)) / scale

    u0 = chart.to_params(start)
    if u0.size == 0:
        return start, objective(start), 1
    res = optimize.minimize(
        f, u0, method="Nelder-Mead",
        options={"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-10, "fatol": 1e-12,
                 "adaptive": u0.size > 4},
    )
    u, val, nfev = res.x, res.fun, res.nfev
    if polish and np.isfinite(val):
        with np.errstate(all="ignore"):
            res2 = optimize.minimize(f, u, method="BFGS", options={"gtol": 1e-10, "maxiter": 200})
        nfev += res2.nfev
        if np.isfinite(res2.fun) and res2.fun < val:
            u, val = res2.x, res2.fun
    return chart.to_seeds(u), val * scale, nfev


def estimate_seeds(x: PeriodicSeries, blocks: Sequence[int], p: Optional[int] = None, n_starts: int = 20,
                   seed: int = 0, max_iter: int = 5000, polish: bool = True,
                   start: Optional[np.ndarray] = None, criterion: str = "rss"):
    """Seeds minimizing the seed criterion (see `SeedObjective`).

    Multi-start: the data-driven start (or ``start``) followed by
    ``n_starts`` random unit-norm seed matrices; the best local optimum
    wins.
    """
    d = x.period
    m1 = sum(blocks)
    objective = SeedObjective(x, blocks, criterion=criterion, p=p if criterion == "ml" else None)
    rng = np.random.default_rng(seed)
    starts = []
    first = start if start is not None else initial_seeds(x, p if p is not None else m1, blocks)
    if first is not None:
        starts.append(np.asarray(first, dtype=float))
    starts.extend(normalize_seeds(rng.standard_normal((d, m1)), blocks) for _ in range(n_starts))

    finite = [objective(s0) for s0 in starts]
    scale = next((abs(v) for v in finite if np.isfinite(v) and v != 0), None)
    if scale is None:
        raise OptimizerFailed("objective is not finite at any starting point")

    best, best_val, total_fev = None, np.inf, 0
    for s0, v0 in zip(starts, finite):
        if not np.isfinite(v0):
            continue
        seeds, val, nfev = _local_search(objective, s0, scale, max_iter, polish)
        total_fev += nfev
        if val < best_val:
            best, best_val = seeds, val
    if best is None or not np.isfinite(best_val):
        raise OptimizerFailed("no start produced a finite objective")
    logger.debug("seed search: best RSS %.6g after %d evaluations", best_val, total_fev)
    return normalize_seeds(best, blocks), best_val, total_fev


def fit_piar(x: PeriodicSeries, p: int, m1: int, blocks: Optional[Sequence[int]] = None, *,
             n_starts: int = 20, seed: int = 0, demean: bool = False, max_iter: int = 5000,
             polish: bool = True, criterion: str = "rss") -> FittedModel:
    """Two-step fit of a PIAR(p) model with ``m1`` unit roots.

    ``blocks`` gives the unit Jordan block sizes (default: all simple).
    ``criterion="ml"`` chooses the seeds by the concentrated likelihood of
    the whole model instead of the first-step RSS (used by the LR test).
    """
    d = x.period
    blocks = tuple(blocks) if blocks is not None else (1,) * m1
    if not 1 <= m1 <= min(p, d):
        raise InputError(f"need 1 <= m1 <= min(p, d), got m1={m1}, p={p}, d={d}")
    if sum(blocks) != m1 or any(r < 1 for r in blocks):
        raise InputError(f"block sizes {blocks} must be positive and sum to m1={m1}")
    if len(x) < d * (p + 2):
        raise InsufficientData(f"need at least {d * (p + 2)} observations, got {len(x)}")
    x, mean = _centre(x, demean)

    seeds, rss_total, nfev = estimate_seeds(x, blocks, p=p, n_starts=n_starts, seed=seed,
                                            max_iter=max_iter, polish=polish, criterion=criterion)
    try:
        theta = theta_from_seeds(seeds, blocks)
    except SingularSystem as exc:
        raise OptimizerFailed(f"estimated seeds give a singular system: {exc}") from exc
    filtered = apply_filter(theta, x)
    stage2 = fit_par(filtered, p - m1)
    return FittedModel(
        pi_filter=theta,
        stationary=stage2.stationary,
        sigma2=stage2.sigma2,
        rss_by_season=stage2.rss_by_season,
        loglik=stage2.loglik,
        n_used=stage2.n_used,
        seeds=seeds,
        blocks=blocks,
        mean=mean,
        info={"seed_rss": rss_total, "evaluations": nfev},
    )


def residuals(model: FittedModel, x: PeriodicSeries) -> PeriodicSeries:
    """Innovations ``psi_s(L) theta_s(L) (x_t - mean)`` for ``t > p``."""
    if x.period != model.period:
        raise PeriodMismatch(f"model period {model.period} != series period {x.period}")
    centred = x.with_values(x.values - model.mean)
    out = apply_filter(model.pi_filter, centred)
    return apply_filter(model.stationary, out)


def residual_variances(resid: PeriodicSeries) -> np.ndarray:
    d = resid.period
    seasons = resid.seasons - 1
    return np.array([np.mean(resid.values[seasons == s] ** 2) for s in range(d)])
