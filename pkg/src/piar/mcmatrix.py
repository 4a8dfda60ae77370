"""Companion and multi-companion matrices and their eigen parametrization.

A multi-companion matrix of companion order ``d`` and dimension ``m`` has
free first ``d`` rows and rows ``d+1..m`` equal to the shifted identity
``[I_{m-d} 0]``. ``F_d = A_d ... A_1`` built from the season companion
matrices of a PAR model is of this form. Conversely `fd_from_eigen` builds
``F_d = X J X^{-1}`` from eigenvalues and seed-vectors (the first ``d``
entries of each eigenvector).
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from .core import PeriodicCoefficients, season_of
from .errors import DimensionMismatch, InputError, SingularSimilarity, ZeroEigenvalue

COND_LIMIT = 1e12


def companion_dim(coeffs: PeriodicCoefficients) -> int:
    return max(coeffs.order, coeffs.period)


def companion_from_coeffs(coeffs: PeriodicCoefficients, season: int) -> np.ndarray:
    """``m x m`` companion matrix ``A_s`` with ``m = max(p, d)``."""
    d, p = coeffs.period, coeffs.order
    if not 1 <= season <= d:
        raise InputError(f"season {season} outside [1, {d}]")
    m = max(p, d)
    a = np.zeros((m, m))
    a[0, :p] = coeffs.phi[season - 1]
    a[1:, :-1] = np.eye(m - 1)
    return a


def mc_from_coeffs(coeffs: PeriodicCoefficients) -> np.ndarray:
    """Multi-companion matrix ``F_d = A_d A_{d-1} ... A_1``."""
    m = companion_dim(coeffs)
    f = np.eye(m)
    for s in range(1, coeffs.period + 1):
        f = companion_from_coeffs(coeffs, s) @ f
    return f


def omega_matrix(coeffs: PeriodicCoefficients) -> np.ndarray:
    """Loading matrix ``Omega`` with ``u_T = Omega eps_T``.

    Column 1 is ``e_1``; column ``j <= d`` is the first column of
    ``A_d ... A_{d-j+2}``; the remaining ``m - d`` columns are zero.
    """
    d = coeffs.period
    m = companion_dim(coeffs)
    om = np.zeros((m, m))
    prod = np.eye(m)
    om[:, 0] = prod[:, 0]
    for j in range(2, d + 1):
        prod = prod @ companion_from_coeffs(coeffs, d - j + 2)
        om[:, j - 1] = prod[:, 0]
    return om


def noise_cov_descending(sigma2, m: int) -> np.ndarray:
    """``diag`` of innovation variances for ``(eps[T,d], eps[T,d]-1, ...)``, length ``m``."""
    sigma2 = np.asarray(sigma2, dtype=float)
    d = sigma2.size
    seasons = season_of(d - np.arange(m), d)
    return np.diag(sigma2[seasons - 1])


def sigma_u(coeffs: PeriodicCoefficients, sigma2) -> np.ndarray:
    om = omega_matrix(coeffs)
    return om @ noise_cov_descending(sigma2, om.shape[0]) @ om.T


def is_multi_companion(f: np.ndarray, d: int, tol: float = 1e-10) -> bool:
    m = f.shape[0]
    if f.shape != (m, m) or m < d:
        return False
    tail = np.zeros((m - d, m))
    tail[:, : m - d] = np.eye(m - d)
    return bool(np.all(np.isfinite(f)) and np.allclose(f[d:], tail, rtol=0, atol=tol))


def jordan_block(eigenvalue: float, size: int) -> np.ndarray:
    return eigenvalue * np.eye(size) + np.eye(size, k=1)


def unit_jordan(blocks: Sequence[int]) -> np.ndarray:
    """Unit Jordan matrix ``diag(J^(1), ..., J^(g))`` for block sizes ``blocks``."""
    if not blocks:
        return np.zeros((0, 0))
    return block_diag(*[jordan_block(1.0, r) for r in blocks])


def extend_rows(seeds: np.ndarray, jmat: np.ndarray, m: int) -> np.ndarray:
    """Extend ``d x k`` seed rows to the full ``m x k`` eigenvector block.

    Uses the shifted-identity rows of ``F``: from ``F X = X J``, row ``d+i``
    satisfies ``x_{d+i} J = x_i``, i.e. ``x_{d+i} = x_i J^{-1}``. For a
    single eigenvalue this is ``x_{d+i} = x_i / lambda``; inside a Jordan
    chain it is applied recursively to the generalized eigenvectors.
    """
    seeds = np.asarray(seeds, dtype=float)
    d, k = seeds.shape
    if m < d:
        raise DimensionMismatch(f"m = {m} smaller than d = {d}")
    out = np.zeros((m, k))
    out[:d] = seeds
    if m == d or k == 0:
        return out
    jinv = np.linalg.inv(jmat)
    for i in range(d, m):
        out[i] = out[i - d] @ jinv
    return out


def extend_seed(seed, eigenvalue: float, m: int) -> np.ndarray:
    """Full eigenvector from its first ``d`` elements: ``x_{d+i} = x_i / lambda``."""
    if eigenvalue == 0:
        raise ZeroEigenvalue("zero eigenvalues take standard-basis eigenvectors")
    seed = np.asarray(seed, dtype=float).reshape(-1, 1)
    return extend_rows(seed, np.array([[eigenvalue]]), m)[:, 0]


@dataclass
class EigenSpec:
    """Eigen information of a multi-companion matrix.

    Parameters
    ----------
    d, m
        Companion order and dimension.
    blocks
        Sizes of the unit Jordan blocks, in the column order of ``seeds``.
        Inside a block, column ``i + 1`` is the chain successor of column ``i``.
    seeds
        ``d x m1`` matrix ``X^(1)``; column ``i`` is seed-vector ``c_i``.
    extra_eigen
        ``(eigenvalue, seed)`` pairs for real non-unit, non-zero eigenvalues.
        All other eigenvalues are zero.
    """

    d: int
    m: int
    blocks: Tuple[int, ...]
    seeds: np.ndarray
    extra_eigen: List[Tuple[float, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        self.blocks = tuple(int(r) for r in self.blocks)
        self.seeds = np.array(self.seeds, dtype=float).reshape(self.d, -1)
        self.extra_eigen = [(float(lam), np.asarray(c, dtype=float).reshape(-1))
                            for lam, c in self.extra_eigen]
        if self.d < 1 or self.m < self.d:
            raise InputError(f"need 1 <= d <= m, got d={self.d}, m={self.m}")
        if any(r < 1 for r in self.blocks) or sum(self.blocks) != self.seeds.shape[1]:
            raise InputError(f"block sizes {self.blocks} must sum to the number of seed columns")
        if self.m1 and np.linalg.matrix_rank(self.seeds) < self.m1:
            raise InputError("seed columns must be linearly independent")
        for lam, c in self.extra_eigen:
            if not 0 < abs(lam) < 1:
                raise InputError(f"extra eigenvalues must satisfy 0 < |lambda| < 1, got {lam}")
            if c.size != self.d:
                raise DimensionMismatch("extra seed-vectors must have length d")
        if self.m1 + len(self.extra_eigen) > self.m:
            raise InputError("more eigenvalues than the dimension m")

    @property
    def m1(self) -> int:
        return int(sum(self.blocks))

    @property
    def order(self) -> int:
        """Periodic integration order (largest unit Jordan block)."""
        return max(self.blocks, default=0)

    @property
    def j_unit(self) -> np.ndarray:
        return unit_jordan(self.blocks)

    def eigenvalues(self) -> np.ndarray:
        n_zero = self.m - self.m1 - len(self.extra_eigen)
        return np.concatenate([np.ones(self.m1), [lam for lam, _ in self.extra_eigen], np.zeros(n_zero)])


def similarity_matrix(spec: EigenSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Assemble ``(X, J)`` with ``F_d = X J X^{-1}``.

    Zero eigenvalues get standard basis vectors ``e_k``. Only ``k > m - d``
    keeps the shifted-identity rows intact; candidates are tried from
    ``e_m`` downwards and kept when they raise the rank.
    """
    d, m = spec.d, spec.m
    lam_extra = [lam for lam, _ in spec.extra_eigen]
    j_nz = block_diag(spec.j_unit, np.diag(lam_extra)) if (spec.m1 or lam_extra) else np.zeros((0, 0))
    seeds = np.column_stack([spec.seeds] + [c for _, c in spec.extra_eigen]) if lam_extra else spec.seeds
    x = extend_rows(seeds, j_nz, m) if j_nz.size else np.zeros((m, 0))

    n_zero = m - x.shape[1]
    cols = [x]
    rank = np.linalg.matrix_rank(x) if x.size else 0
    if rank < x.shape[1]:
        raise SingularSimilarity("eigenvectors of non-zero eigenvalues are linearly dependent")
    chosen = 0
    for k in range(m, max(m - d, 0), -1):
        if chosen == n_zero:
            break
        e = np.zeros((m, 1))
        e[k - 1] = 1.0
        trial = np.hstack(cols + [e])
        if np.linalg.matrix_rank(trial) > rank:
            cols.append(e)
            rank += 1
            chosen += 1
    if chosen < n_zero:
        raise SingularSimilarity("no admissible standard basis vectors complete the similarity matrix")
    x_full = np.hstack(cols)
    j_full = block_diag(j_nz, np.zeros((n_zero, n_zero))) if n_zero else j_nz
    if np.linalg.cond(x_full) > COND_LIMIT:
        raise SingularSimilarity("similarity matrix is numerically singular")
    return x_full, j_full


def fd_from_eigen(spec: EigenSpec) -> np.ndarray:
    """Multi-companion matrix ``X J X^{-1}`` with the given eigen information."""
    x, j = similarity_matrix(spec)
    return np.linalg.solve(x.T, (x @ j).T).T


def unit_root_count(f: np.ndarray, tol: float = 1e-6) -> int:
    """Number of eigenvalues within ``tol`` of 1."""
    if tol <= 0:
        raise InputError("tol must be positive")
    f = np.asarray(f, dtype=float)
    if f.size == 0:
        return 0
    return int(np.sum(np.abs(np.linalg.eigvals(f) - 1.0) < tol))
