"""Distribution functions, the sphere inner-product moment oracle, and KS distances.

The normal, chi-square and beta functions are thin, validated wrappers around
``scipy.special``; they exist so that every p-value and threshold in the
package goes through one place with one set of domain checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _finite(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


def _open_unit(u, name="u"):
    u = float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {u!r}")
    return u


def _dof(k):
    if int(k) != k or k < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {k!r}")
    return int(k)


# -- normal -----------------------------------------------------------------

def std_normal_pdf(x):
    """Standard normal density; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(x: float) -> float:
    """Phi(x), the standard normal distribution function."""
    return float(special.ndtr(_finite(x)))


def std_normal_sf(x: float) -> float:
    """1 - Phi(x), evaluated without cancellation in the upper tail."""
    return float(special.ndtr(-_finite(x)))


def std_normal_quantile(u: float) -> float:
    """Inverse of :func:`std_normal_cdf` on (0, 1)."""
    return float(special.ndtri(_open_unit(u)))


# -- chi-square -------------------------------------------------------------

def chi2_cdf(x: float, k: int) -> float:
    """Chi-square(k) distribution function, P(k/2, x/2) in incomplete-gamma terms."""
    k = _dof(k)
    x = _finite(x)
    if x < 0:
        raise DomainError(f"chi-square argument must be >= 0, got {x!r}")
    return float(special.gammainc(0.5 * k, 0.5 * x))


def chi2_sf(x: float, k: int) -> float:
    """Upper tail 1 - chi2_cdf(x, k), computed directly from Q(k/2, x/2)."""
    k = _dof(k)
    x = _finite(x)
    if x < 0:
        raise DomainError(f"chi-square argument must be >= 0, got {x!r}")
    return float(special.gammaincc(0.5 * k, 0.5 * x))


def chi2_quantile(u: float, k: int) -> float:
    """Lower-tail quantile of chi-square(k)."""
    k = _dof(k)
    return 2.0 * float(special.gammaincinv(0.5 * k, _open_unit(u)))


def chi2_isf(u: float, k: int) -> float:
    """Upper-tail quantile: the x with chi2_sf(x, k) == u."""
    k = _dof(k)
    return 2.0 * float(special.gammainccinv(0.5 * k, _open_unit(u)))


# -- beta -------------------------------------------------------------------

def beta_cdf(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta ratio I_x(a, b)."""
    x = _finite(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"beta argument must lie in [0, 1], got {x!r}")
    if not (a > 0 and b > 0):
        raise DomainError(f"beta shape parameters must be positive, got a={a!r}, b={b!r}")
    return float(special.betainc(a, b, x))


# -- moment oracle ----------------------------------------------------------

@dataclass(frozen=True)
class MomentValue:
    """E[rho^m] for rho the inner product of two independent uniform unit p-vectors."""

    p: int
    m: int
    exact: Fraction

    @property
    def value(self) -> float:
        return float(self.exact)

    @property
    def beta_parameters(self) -> tuple[float, float]:
        """Shape parameters of the Beta law followed by rho^2."""
        return 0.5, 0.5 * (self.p - 1)

    def product_form(self) -> str:
        """The product as printed factors, e.g. ``(1/3)*(3/5)``."""
        return "*".join(f"({1 + 2 * r}/{self.p + 2 * r})" for r in range(self.m // 2))


def rho_even_moment(p: int, m: int) -> MomentValue:
    """Exact even moment of rho = U'V, with U, V iid uniform on S^{p-1}.

    rho^2 ~ Beta(1/2, (p-1)/2), whose s-th moment is
    prod_{r=0}^{s-1} (1/2 + r) / (p/2 + r). With s = m/2 this is
    prod_{r=0}^{m/2-1} (1 + 2r) / (p + 2r).

    Odd moments vanish by symmetry and are rejected here.
    """
    if int(p) != p or p < 1:
        raise DomainError(f"dimension p must be a positive integer, got {p!r}")
    if int(m) != m or m < 2:
        raise DomainError(f"moment order m must be a positive even integer, got {m!r}")
    p, m = int(p), int(m)
    if m % 2:
        raise DomainError(f"odd moment order m={m}: E[rho^m] = 0 for every odd m")
    value = Fraction(1)
    for r in range(m // 2):
        value *= Fraction(1 + 2 * r, p + 2 * r)
    return MomentValue(p=p, m=m, exact=value)


# -- goodness of fit --------------------------------------------------------

@dataclass(frozen=True)
class KsDistance:
    d: float
    sample_size: int


def _vectorized(cdf: Callable, x: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(cdf(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError, DomainError):
        pass
    return np.array([cdf(float(v)) for v in x], dtype=float)


def normal_cdf_array(x) -> np.ndarray:
    """Vectorized Phi for whole samples."""
    return special.ndtr(np.asarray(x, dtype=float))


def ks_distance(sample, cdf: Callable = normal_cdf_array) -> KsDistance:
    """One-sample Kolmogorov-Smirnov distance sup |F_n - F|.

    ``sample`` must be sorted ascending. ``cdf`` may be vectorized or scalar.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("KS distance needs a nonempty one-dimensional sample")
    if np.any(np.diff(x) < 0):
        raise DomainError("KS sample must be sorted ascending")
    n = x.size
    f = _vectorized(cdf, x)
    i = np.arange(1, n + 1)
    d = max(float(np.max(f - (i - 1) / n)), float(np.max(i / n - f)))
    return KsDistance(d=d, sample_size=n)


def ks_two_sample(a, b) -> KsDistance:
    """Two-sample KS distance sup |F_a - F_b| over the pooled sample."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("two-sample KS needs two nonempty samples")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return KsDistance(d=float(np.max(np.abs(fa - fb))), sample_size=min(a.size, b.size))
