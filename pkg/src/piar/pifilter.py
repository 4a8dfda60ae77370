"""Periodic filters and PI-filter parametrizations from seed-vectors.

A periodic filter of order ``q`` maps ``x`` to
``y_t = x_t - sum_{i=1}^q a_{i,s(t)} x_{t-i}``. Sequential application of
periodic filters does not commute: the inner filter's coefficients enter
the product with season-shifted indices (see `compose`).

Seeds are ``d x m1`` matrices whose row ``j`` is the seed entry ``c^{(j)}``.
Row ``j`` corresponds to season ``d - j + 1`` of the current year, so the
PI-parameters of season ``s`` relate rows ``d-s+1`` (target) and
``d-s+2, ..., d-s+m1+1`` (lags 1..m1), wrapping into the previous year
through the Jordan matrix of the unit roots.
"""

from typing import Sequence, Tuple

import numpy as np

from .core import PeriodicFilter, PeriodicSeries
from .errors import DegenerateSeeds, InputError, PeriodMismatch, SeriesTooShort, SingularSystem, ZeroSeedEntry
from .mcmatrix import COND_LIMIT, EigenSpec, unit_jordan


def identity_filter(d: int) -> PeriodicFilter:
    return PeriodicFilter(np.zeros((d, 0)))


def _lag_polynomials(f: PeriodicFilter) -> np.ndarray:
    """``d x (q+1)`` polynomial coefficients ``(1, -a_1, ..., -a_q)`` per season."""
    return np.hstack([np.ones((f.period, 1)), -f.phi])


def apply_filter(f: PeriodicFilter, x: PeriodicSeries) -> PeriodicSeries:
    """Filter output for ``t > q``; the result starts at ``origin + q``."""
    d, q = f.period, f.order
    if x.period != d:
        raise PeriodMismatch(f"filter period {d} != series period {x.period}")
    n = len(x)
    if n <= q:
        raise SeriesTooShort(f"series of length {n} too short for a filter of order {q}")
    v = x.values
    seasons = x.seasons[q:] - 1
    out = v[q:].copy()
    for i in range(1, q + 1):
        out -= f.phi[seasons, i - 1] * v[q - i : n - i]
    return PeriodicSeries(out, d, x.origin + q)


def compose(outer: PeriodicFilter, inner: PeriodicFilter) -> PeriodicFilter:
    """Filter equal to applying ``inner`` first and then ``outer``.

    Lag-``k`` polynomial coefficient at season ``s``:
    ``C_{k,s} = sum_{i+j=k} A_{i,s} B_{j,s-i}``.
    """
    if outer.period != inner.period:
        raise PeriodMismatch(f"cannot compose filters with periods {outer.period} and {inner.period}")
    d = outer.period
    a, b = _lag_polynomials(outer), _lag_polynomials(inner)
    qa, qb = outer.order, inner.order
    c = np.zeros((d, qa + qb + 1))
    s = np.arange(d)
    for i in range(qa + 1):
        shifted = b[(s - i) % d]
        c[:, i : i + qb + 1] += a[:, [i]] * shifted
    return PeriodicFilter(-c[:, 1:])


def alpha_from_seed(seed) -> PeriodicFilter:
    """Unit PI-filter ``alpha_s = c^{(d-s+1)} / c^{(d-s+2)}`` with ``c^{(d+1)} = c^{(1)}``."""
    c = np.asarray(seed, dtype=float).reshape(-1)
    if np.any(c == 0):
        raise ZeroSeedEntry("seed entries must be non-zero")
    d = c.size
    s = np.arange(1, d + 1)
    num = c[d - s]
    den = c[(d - s + 1) % d]
    return PeriodicFilter((num / den).reshape(-1, 1))


def stacked_seeds(seeds, j_unit) -> np.ndarray:
    """``m1 x 2d`` matrix ``(X^(1) J_unit ; X^(1))'``."""
    x1 = np.asarray(seeds, dtype=float)
    return np.vstack([x1 @ j_unit, x1]).T


def _solve_seasons(xbind: np.ndarray, d: int, cond_limit: float = COND_LIMIT, exc=SingularSystem) -> np.ndarray:
    m1 = xbind.shape[0]
    if m1 > d:
        raise InputError(f"number of unit roots m1 = {m1} exceeds the period d = {d}")
    theta = np.empty((d, m1))
    for s in range(1, d + 1):
        # 1-based columns (d-s+2):(d-s+m1+1) and d-s+1
        a = xbind[:, d - s + 1 : d - s + m1 + 1]
        rhs = xbind[:, d - s]
        if not np.all(np.isfinite(a)) or np.linalg.cond(a) > cond_limit:
            raise exc(f"PI-parameter system for season {s} is singular", season=s)
        theta[s - 1] = np.linalg.solve(a, rhs)
    return theta


def theta_from_seeds(seeds, blocks: Sequence[int], cond_limit: float = COND_LIMIT) -> PeriodicFilter:
    """PI-filter of order ``m1`` annihilating the unit roots described by ``seeds``."""
    seeds = np.asarray(seeds, dtype=float)
    if seeds.ndim == 1:
        seeds = seeds.reshape(-1, 1)
    if sum(blocks) != seeds.shape[1]:
        raise InputError(f"block sizes {tuple(blocks)} do not match {seeds.shape[1]} seed columns")
    xbind = stacked_seeds(seeds, unit_jordan(blocks))
    return PeriodicFilter(_solve_seasons(xbind, seeds.shape[0], cond_limit))


def theta_general(spec: EigenSpec) -> PeriodicFilter:
    return theta_from_seeds(spec.seeds, spec.blocks)


def _delta(c1, c2):
    """``Delta[i, j] = c1^(i) c2^(j) - c1^(j) c2^(i)`` (0-based)."""
    return np.outer(c1, c2) - np.outer(c2, c1)


def _wrapped_pair(seeds, chained: bool):
    x = np.asarray(seeds, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise InputError("expected a d x 2 seed matrix")
    c1, c2 = x[:, 0], x[:, 1]
    c1w = np.concatenate([c1, c1[:2]])
    c2w = np.concatenate([c2, c2[:2] - c1[:2] if chained else c2[:2]])
    return c1w, c2w


def _theta_two(seeds, chained: bool) -> PeriodicFilter:
    c1, c2 = _wrapped_pair(seeds, chained)
    d = c1.size - 2
    delta = _delta(c1, c2)
    theta = np.empty((d, 2))
    for s in range(1, d + 1):
        j = d - s  # 0-based index of c^{(d-s+1)}
        den = delta[j + 1, j + 2]
        if den == 0 or abs(den) < 1e-14 * max(1.0, np.abs(delta).max()):
            raise DegenerateSeeds(f"Delta denominator vanishes for season {s}", season=s)
        theta[s - 1] = delta[j, j + 2] / den, delta[j + 1, j] / den
    return PeriodicFilter(theta)


def theta_two_simple(seeds) -> PeriodicFilter:
    """Closed-form order-2 PI-filter for two simple unit roots."""
    return _theta_two(seeds, chained=False)


def theta_two_chained(seeds) -> PeriodicFilter:
    """Closed-form order-2 PI-filter for two chained unit roots (``c_2`` generalized)."""
    return _theta_two(seeds, chained=True)


def cascade(seeds, chained: bool = False, order: Tuple[int, int] = (1, 2)) -> Tuple[PeriodicFilter, PeriodicFilter]:
    """Unit PI-filters ``(alpha, beta)`` with ``(1 - beta_s L)(1 - alpha_s L)`` the order-2 PI-filter.

    For simple roots ``order`` picks which seed-vector is removed first,
    ``(1, 2)`` or ``(2, 1)``; both give the same order-2 filter. The chained
    case has a single solution and ignores ``order``.
    """
    seeds = np.asarray(seeds, dtype=float)
    if chained:
        order = (1, 2)
    elif tuple(order) not in ((1, 2), (2, 1)):
        raise InputError("order must be (1, 2) or (2, 1)")
    i1, i2 = order
    pair = seeds[:, [i1 - 1, i2 - 1]]
    c1, c2 = _wrapped_pair(pair, chained)
    d = c1.size - 2
    if np.any(c1 == 0):
        raise DegenerateSeeds("first seed-vector has a zero entry")
    s = np.arange(1, d + 1)
    j = d - s
    alpha = c1[j] / c1[j + 1]
    alpha_prev = np.roll(alpha, 1)
    den = c2[j + 1] - alpha_prev * c2[j + 2]
    if np.any(den == 0):
        raise DegenerateSeeds("beta denominator vanishes")
    beta = (c2[j] - alpha * c2[j + 1]) / den
    return PeriodicFilter(alpha.reshape(-1, 1)), PeriodicFilter(beta.reshape(-1, 1))


def cascade_theta(alpha: PeriodicFilter, beta: PeriodicFilter) -> PeriodicFilter:
    """Order-2 filter of the cascade: ``theta_1 = alpha_s + beta_s``, ``theta_2 = -beta_s alpha_{s-1}``."""
    return compose(beta, alpha)
