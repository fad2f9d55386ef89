"""Sign-test statistics built on the Gram matrix of inner products rho_ij = U_i'U_j.

Each statistic is returned as a :class:`StatisticPair`. The standardized
value is computed from the off-diagonal (i < j) sum, which is already centered;
the raw chi-square-scale value is then ``dof + sqrt(2 dof) * standardized``.
Going this way round avoids subtracting ``dof`` (up to ``H p^2``) from a raw
value of the same magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .sampling import check_unit_rows, normalize_rows

TANGENT_TOL = 1e-12


@dataclass(frozen=True)
class StatisticPair:
    raw: float
    standardized: float
    dof: int

    @classmethod
    def from_standardized(cls, standardized: float, dof: int) -> "StatisticPair":
        return cls(raw=dof + math.sqrt(2.0 * dof) * standardized,
                   standardized=float(standardized), dof=int(dof))


@dataclass(frozen=True)
class SignAutocorr:
    h: int
    matrix: np.ndarray
    frobenius_sq: float


def _signs(U, normalize: bool) -> np.ndarray:
    return normalize_rows(U) if normalize else check_unit_rows(U)


@lru_cache(maxsize=64)
def _upper(n: int):
    return np.triu_indices(n, 1)


def _upper_sum(A: np.ndarray) -> float:
    """Sum of the strictly upper triangle (numpy's pairwise summation)."""
    n = A.shape[0]
    if n < 2:
        return 0.0
    return float(A[_upper(n)].sum())


def gram(U) -> np.ndarray:
    """n x n matrix of inner products of the rows of ``U``, exactly symmetric."""
    U = np.asarray(U, dtype=float)
    G = U @ U.T
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


# -- uniformity and location -------------------------------------------------

def _rayleigh_from_gram(G: np.ndarray, p: int) -> StatisticPair:
    n = G.shape[0]
    st = math.sqrt(2.0 * p) / n * _upper_sum(G)
    return StatisticPair.from_standardized(st, p)


def rayleigh(U, *, normalize: bool = False) -> StatisticPair:
    """Rayleigh statistic R_n = (p/n) sum_{i,j} rho_ij with its standardized form.

    The standardized value (R_n - p)/sqrt(2p) equals
    (sqrt(2p)/n) sum_{i<j} rho_ij and is asymptotically N(0, 1) under
    uniformity for any path of (n, p).
    """
    U = _signs(U, normalize)
    return _rayleigh_from_gram(gram(U), U.shape[1])


def _unit_theta(theta0, p):
    theta = np.asarray(theta0, dtype=float).ravel()
    if theta.size != p:
        raise DomainError(f"theta0 has dimension {theta.size}, data has p={p}")
    if abs(np.linalg.norm(theta) - 1.0) > 1e-12:
        raise DomainError("theta0 must be a unit vector (tolerance 1e-12)")
    return theta


def tangent_signs(U, theta0, *, normalize: bool = False) -> np.ndarray:
    """Signs of the projections of the rows of ``U`` onto the tangent space at theta0."""
    U = _signs(U, normalize)
    theta = _unit_theta(theta0, U.shape[1])
    P = U - np.outer(U @ theta, theta)
    norms = np.linalg.norm(P, axis=1)
    bad = np.flatnonzero(norms <= TANGENT_TOL)
    if bad.size:
        raise DomainError(f"row {int(bad[0])} is parallel to theta0; its tangent sign is undefined")
    return P / norms[:, None]


def location(U, theta0, *, normalize: bool = False) -> StatisticPair:
    """Spherical location sign test of H0: theta = theta0 (p - 1 degrees of freedom)."""
    U = _signs(U, normalize)
    if U.shape[1] < 2:
        raise DomainError("the location test requires p >= 2")
    W = tangent_signs(U, theta0)
    return _rayleigh_from_gram(gram(W), U.shape[1] - 1)


# -- serial dependence -------------------------------------------------------

def sign_autocorr(U, h: int, *, normalize: bool = False) -> SignAutocorr:
    """Lag-h sign autocorrelation matrix r(h) = (p/(n-h)) sum_t U_t U_{t-h}'."""
    U = _signs(U, normalize)
    n, p = U.shape
    if int(h) != h or not 1 <= h <= n - 1:
        raise DomainError(f"lag h must satisfy 1 <= h <= n-1 = {n - 1}, got {h!r}")
    h = int(h)
    r = (p / (n - h)) * (U[h:].T @ U[:-h])
    return SignAutocorr(h=h, matrix=r, frobenius_sq=float(np.sum(r * r)))


def _check_lags(H, n):
    # a lag of n-1 still has one cross product; the harness demands H <= n-2
    if int(H) != H or not 1 <= H <= n - 1:
        raise DomainError(f"max lag H must satisfy 1 <= H <= n-1 = {n - 1}, got {H!r}")
    return int(H)


def _portmanteau_from_gram(G: np.ndarray, p: int, H: int) -> StatisticPair:
    n = G.shape[0]
    H = _check_lags(H, n)
    acc = 0.0
    for h in range(1, H + 1):
        acc += _upper_sum(G[:-h, :-h] * G[h:, h:]) / (n - h)
    st = math.sqrt(2.0) * p / math.sqrt(H) * acc
    return StatisticPair.from_standardized(st, H * p * p)


def portmanteau(U, H: int, *, normalize: bool = False) -> StatisticPair:
    """Sign-based portmanteau statistic T_n = sum_h (n-h) ||r(h)||_F^2, dof H p^2."""
    U = _signs(U, normalize)
    return _portmanteau_from_gram(gram(U), U.shape[1], H)


def portmanteau_lowrank(U, H: int, *, normalize: bool = False) -> StatisticPair:
    """Lower-rank runs statistic sum_h (p/(n-h)) (sum_t U_{t-h}'U_t)^2, dof H.

    Its diagonal terms are not constant, so the standardized value is taken
    directly as (raw - H)/sqrt(2H); raw is of order H, so there is no
    cancellation to guard against.
    """
    U = _signs(U, normalize)
    n, p = U.shape
    H = _check_lags(H, n)
    raw = 0.0
    for h in range(1, H + 1):
        s = float(np.einsum("ij,ij->", U[:-h], U[h:]))
        raw += p / (n - h) * s * s
    return StatisticPair(raw=raw, standardized=(raw - H) / math.sqrt(2.0 * H), dof=H)


# -- independence and sphericity --------------------------------------------

def independence(U, V, *, normalize: bool = False) -> StatisticPair:
    """Sign test of independence between paired samples U (n x p) and V (n x q), dof pq."""
    U = _signs(U, normalize)
    V = _signs(V, normalize)
    if U.shape[0] != V.shape[0]:
        raise DomainError(f"paired samples must have equal n, got {U.shape[0]} and {V.shape[0]}")
    n, p = U.shape
    q = V.shape[1]
    st = math.sqrt(2.0 * p * q) / n * _upper_sum(gram(U) * gram(V))
    return StatisticPair.from_standardized(st, p * q)


def sphericity_dof(p: int) -> int:
    """d(p) = (p - 1)(p + 2)/2."""
    return (p - 1) * (p + 2) // 2


def sphericity(U, *, normalize: bool = False) -> StatisticPair:
    """Sign test of sphericity about the origin, S_n with dof d(p)."""
    U = _signs(U, normalize)
    n, p = U.shape
    if p < 2:
        raise DomainError("the sphericity test requires p >= 2")
    G = gram(U)
    centered = G * G - 1.0 / p
    st = p * math.sqrt(p + 2.0) / (n * math.sqrt(p - 1.0)) * _upper_sum(centered)
    return StatisticPair.from_standardized(st, sphericity_dof(p))
