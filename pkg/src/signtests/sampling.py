"""Reproducible null-model samplers.

Every sampler takes an :class:`RngStream` *value* and builds a fresh generator
from it, so calling a sampler twice with the same stream and arguments returns
the same array. Streams are addressed by ``(master_seed, path)``; the harness
derives one stream per replicate, which is what makes results independent of
how replicates are scheduled across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ModelError

UNIT_NORM_TOL = 1e-8
_MASK64 = (1 << 64) - 1
_PROBE = np.linspace(-1.0, 1.0, 257)
_GRID_SIZE = 4096


@dataclass(frozen=True)
class RngStream:
    """Address of an independent random stream.

    The generator is Philox (counter-based) keyed through a ``SeedSequence``
    whose spawn key is ``path``; distinct paths give distinct keys.
    """

    master_seed: int
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed & _MASK64, spawn_key=tuple(int(x) & _MASK64 for x in self.path)
        )
        return np.random.Generator(np.random.Philox(seq))

    def child(self, *more) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(int(x) for x in more))


def derive_stream(master: int, path=()) -> RngStream:
    return RngStream(int(master), tuple(int(x) for x in path))


def _check_size(n, p):
    if int(n) != n or n < 1 or int(p) != p or p < 1:
        raise DomainError(f"n and p must be positive integers, got n={n!r}, p={p!r}")
    return int(n), int(p)


def sample_gaussian_matrix(stream: RngStream, n: int, p: int) -> np.ndarray:
    """n x p matrix of iid N(0, 1) entries (numpy's ziggurat transform)."""
    n, p = _check_size(n, p)
    return stream.generator().standard_normal((n, p))


def normalize_rows(X) -> np.ndarray:
    """Map each row to its spatial sign X_i / ||X_i||."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"expected a 2-d array of observations, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DomainError("observations contain non-finite values")
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    bad = np.flatnonzero(norms <= 1e-300)
    if bad.size:
        raise DomainError(f"row {int(bad[0])} is the zero vector and has no direction")
    return X / norms[:, None]


def check_unit_rows(U, tol: float = UNIT_NORM_TOL) -> np.ndarray:
    """Validate that ``U`` is an n x p array of unit rows and return it as float."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] < 1 or U.shape[1] < 1:
        raise DomainError(f"expected a nonempty n x p array of unit vectors, got shape {U.shape}")
    dev = np.abs(np.sqrt(np.einsum("ij,ij->i", U, U)) - 1.0)
    bad = np.flatnonzero(~(dev <= tol))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"row {i} is not a unit vector (| ||u|| - 1 | = {dev[i]:.3g} > {tol:g})")
    return U


def sample_uniform_sphere(stream: RngStream, n: int, p: int) -> np.ndarray:
    """n iid points uniform on S^{p-1}, as normalized Gaussian vectors."""
    return normalize_rows(sample_gaussian_matrix(stream, n, p))


def sample_independent_pair(stream: RngStream, n: int, p: int, q: int):
    """Signs of n iid N(0, I_{p+q}) vectors, split into (n x p, n x q) blocks."""
    n, p = _check_size(n, p)
    _check_size(n, q)
    X = sample_gaussian_matrix(stream, n, p + q)
    return normalize_rows(X[:, :p]), normalize_rows(X[:, p:])


# -- rotationally symmetric models -----------------------------------------

@dataclass(frozen=True, eq=False)
class RotationalModel:
    """Density proportional to f(u' theta0) on the sphere.

    ``kind`` is one of ``uniform``, ``vmf`` (f = exp(kappa w)), ``linear``
    (f = 1 + a w) or ``custom`` (any monotone nonnegative callable ``f``).
    The normalizing constant is never needed.
    """

    theta0: np.ndarray
    kind: str = "uniform"
    kappa: float = 0.0
    a: float = 0.0
    f: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        theta = np.asarray(self.theta0, dtype=float).ravel()
        object.__setattr__(self, "theta0", theta)
        if theta.size < 1 or abs(np.linalg.norm(theta) - 1.0) > 1e-12:
            raise ModelError("theta0 must be a unit vector (tolerance 1e-12)")
        if self.kind not in ("uniform", "vmf", "linear", "custom"):
            raise ModelError(f"unknown rotational model kind {self.kind!r}")
        if self.kind == "vmf" and not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ModelError(f"vMF concentration must be finite and >= 0, got {self.kappa!r}")
        if self.kind == "linear" and not 0.0 <= self.a <= 1.0:
            raise ModelError(f"linear generator 1 + a w needs 0 <= a <= 1, got {self.a!r}")
        if self.kind == "custom":
            if self.f is None:
                raise ModelError("custom rotational model needs a callable f")
            try:
                vals = np.asarray([float(self.f(w)) for w in _PROBE])
            except Exception as exc:  # user callable: any failure is a model error
                raise ModelError(f"f could not be evaluated: {exc}") from exc
            if not np.all(np.isfinite(vals)) or np.any(vals < 0):
                raise ModelError("f must be finite and nonnegative on [-1, 1]")
            if np.any(np.diff(vals) < 0):
                raise ModelError("f must be monotone nondecreasing on [-1, 1]")
            if not np.any(vals > 0):
                raise ModelError("f vanishes identically on [-1, 1]")

    @classmethod
    def uniform(cls, theta0):
        return cls(theta0, "uniform")

    @classmethod
    def von_mises_fisher(cls, theta0, kappa):
        return cls(theta0, "vmf", kappa=float(kappa))

    @classmethod
    def linear(cls, theta0, a):
        return cls(theta0, "linear", a=float(a))

    @classmethod
    def custom(cls, theta0, f):
        return cls(theta0, "custom", f=f)

    @property
    def p(self) -> int:
        return self.theta0.size

    def generator_fn(self, w):
        """Evaluate the angular generator f (up to proportionality)."""
        w = np.asarray(w, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(w)
        if self.kind == "vmf":
            return np.exp(self.kappa * w)
        if self.kind == "linear":
            return 1.0 + self.a * w
        return np.vectorize(lambda t: float(self.f(t)), otypes=[float])(w)

    def describe(self) -> dict:
        out = {"kind": self.kind, "theta0": [float(x) for x in self.theta0]}
        if self.kind == "vmf":
            out["kappa"] = self.kappa
        elif self.kind == "linear":
            out["a"] = self.a
        return out


def _uniform_cosines(rng, size, p):
    # u' theta0 for u uniform on S^{p-1}: w^2 ~ Beta(1/2, (p-1)/2), symmetric sign
    w = np.sqrt(rng.beta(0.5, 0.5 * (p - 1), size=size))
    return np.where(rng.random(size) < 0.5, -w, w)


def _rejection_cosines(rng, n, p, log_accept):
    out = np.empty(0)
    proposed = accepted = 0
    while out.size < n:
        need = n - out.size
        rate = max(accepted / proposed, 1e-4) if accepted else (1.0 if not proposed else 1e-4)
        batch = max(64, int(1.5 * need / rate))
        w = _uniform_cosines(rng, batch, p)
        keep = np.log(rng.random(batch)) <= log_accept(w)
        proposed += batch
        accepted += int(keep.sum())
        out = np.concatenate([out, w[keep]])
    return out[:n]


def _wood_cosines(rng, n, p, kappa):
    # Wood (1994): Beta proposal mapped through a Moebius transform, acceptance
    # stays high for every (kappa, p), unlike the exp(kappa) envelope
    d = p - 1
    b = d / (2.0 * kappa + math.sqrt(4.0 * kappa * kappa + d * d))
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + d * math.log(1.0 - x0 * x0)
    parts, have = [], 0
    while have < n:
        batch = max(64, 2 * (n - have))
        z = rng.beta(0.5 * d, 0.5 * d, size=batch)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        keep = kappa * w + d * np.log1p(-x0 * w) - c >= np.log(rng.random(batch))
        parts.append(w[keep])
        have += int(keep.sum())
    return np.concatenate(parts)[:n]


def _inverse_cdf_cosines(rng, n, p, model):
    # angle phi = arccos(w) has density prop. to f(cos phi) sin^{p-2} phi on [0, pi]
    phi = np.linspace(0.0, math.pi, _GRID_SIZE)
    dens = model.generator_fn(np.cos(phi)) * np.sin(phi) ** (p - 2)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(phi))])
    if not cum[-1] > 0:
        raise ModelError("angular density integrates to zero")
    cum /= cum[-1]
    return np.cos(np.interp(rng.random(n), cum, phi))


def _sample_cosines(rng, n, model: RotationalModel):
    p = model.p
    if model.kind == "uniform" or (model.kind == "vmf" and model.kappa == 0.0):
        return _uniform_cosines(rng, n, p)
    if model.kind == "vmf":
        return _wood_cosines(rng, n, p, model.kappa)
    if model.kind == "linear":
        bound = 1.0 + model.a
        return _rejection_cosines(rng, n, p, lambda w: np.log((1.0 + model.a * w) / bound))
    return _inverse_cdf_cosines(rng, n, p, model)


def _tangent_directions(rng, n, theta):
    p = theta.size
    V = np.empty((n, p))
    todo = np.arange(n)
    while todo.size:
        Z = rng.standard_normal((todo.size, p))
        Z -= np.outer(Z @ theta, theta)
        norms = np.linalg.norm(Z, axis=1)
        ok = norms >= 1e-12
        V[todo[ok]] = Z[ok] / norms[ok, None]
        todo = todo[~ok]
    return V


def sample_rotsym(stream: RngStream, n: int, model: RotationalModel, p: Optional[int] = None) -> np.ndarray:
    """n iid draws from the rotationally symmetric law ``model`` on S^{p-1}.

    Each row is w * theta0 + sqrt(1 - w^2) * V with w the cosine to theta0 and
    V uniform on the unit sphere of the orthogonal complement of theta0.
    """
    if p is None:
        p = model.p
    n, p = _check_size(n, p)
    if p != model.p:
        raise ModelError(f"model theta0 lives in R^{model.p}, requested p={p}")
    if p < 2:
        raise DomainError("rotationally symmetric sampling requires p >= 2")
    rng = stream.generator()
    w = np.clip(_sample_cosines(rng, n, model), -1.0, 1.0)
    V = _tangent_directions(rng, n, model.theta0)
    U = w[:, None] * model.theta0[None, :] + np.sqrt(1.0 - w * w)[:, None] * V
    # one renormalization keeps rows on the sphere to rounding level
    return U / np.linalg.norm(U, axis=1, keepdims=True)
