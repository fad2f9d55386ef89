"""Acceptance criteria, each at its stated tolerance.

Seeds were fixed before the first run and have not been changed. The terminal
summary prints one PASS/FAIL line per criterion.
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from direct_forms import (
    independence_direct,
    location_direct,
    portmanteau_direct,
    rayleigh_direct,
    sphericity_direct,
    standardize,
)
from signtests.distributions import ks_two_sample, rho_even_moment
from signtests.harness import SimulationConfig, run_cell, run_grid, with_workers
from signtests.report import canonical_bytes
from signtests.sampling import derive_stream, normalize_rows, sample_uniform_sphere
from signtests.statistics import independence, location, portmanteau, rayleigh, sphericity

SEED = 31415


def cell(family, n, p, M, workers=4, **kw):
    cfg = SimulationConfig(family=family, grid_n=[n], grid_p=[p], M=M, master_seed=SEED, workers=workers, **kw)
    return run_cell(cfg, n, p)


def mean_se(x):
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def variance_se(x):
    x = np.asarray(x)
    d = x - x.mean()
    m2, m4 = np.mean(d**2), np.mean(d**4)
    return math.sqrt((m4 - m2 * m2) / x.size)


# 1 ---------------------------------------------------------------------------

@pytest.mark.criterion(1, "universal Gaussian regime at (n, p) = (200, 200), M = 2000")
@pytest.mark.parametrize("family", ["uniformity", "serial", "independence", "sphericity"])
def test_criterion_1_gaussian_regime(family):
    c = cell(family, 200, 200, 2000, H=3)
    if family == "independence":
        assert (c.p, c.q) == (200, 100)
    assert abs(c.mean) <= 0.08
    assert 0.88 <= c.variance <= 1.12
    assert c.ks_normal.d <= 0.045
    assert 0.035 <= c.rejection_rate_universal <= 0.065


# 2 ---------------------------------------------------------------------------

@pytest.mark.criterion(2, "exact null means and variances at (30, 30), M = 1e5, within 5 SE")
@pytest.mark.parametrize("family,target", [
    ("uniformity", 29 / 30),
    ("independence", 29 / 30),
    ("serial", 0.5 * (28 / 29 + 27 / 28)),
])
def test_criterion_2_exact_moments(family, target):
    c = cell(family, 30, 30, 100_000, workers=8, H=2)
    x = np.asarray(c.values)
    assert abs(c.mean) <= 5 * mean_se(x)
    assert abs(c.variance - target) <= 5 * variance_se(x)


# 3 ---------------------------------------------------------------------------

@pytest.mark.criterion(3, "fixed-p chi-square regime at p = 4, n = 1000, M = 2000")
def test_criterion_3_rayleigh_raw():
    raw = np.asarray(cell("uniformity", 1000, 4, 2000).raw_values)
    assert 3.75 <= raw.mean() <= 4.25
    assert 7.0 <= raw.var(ddof=1) <= 9.0


@pytest.mark.criterion(3, "fixed-p chi-square regime at p = 4, n = 1000, M = 2000")
def test_criterion_3_sphericity_raw():
    raw = np.asarray(cell("sphericity", 1000, 4, 2000).raw_values)
    assert abs(raw.mean() - 9) <= 0.4


# 4 ---------------------------------------------------------------------------

@pytest.mark.criterion(4, "small-n contrast at n = 4, p = 1000, M = 2000")
def test_criterion_4_small_n_contrast():
    ks_r = cell("uniformity", 4, 1000, 2000).ks_normal.d
    ks_t = cell("serial", 4, 1000, 2000, H=1).ks_normal.d
    assert ks_r <= 0.06
    assert ks_t > 2 * ks_r


# 5 ---------------------------------------------------------------------------

def beta_moment(p, m):
    a, b = 0.5, 0.5 * (p - 1)
    val, _ = integrate.quad(lambda x: x ** (m // 2), 0, 1, weight="alg", wvar=(a - 1, b - 1),
                            epsabs=0, epsrel=1e-13, limit=200)
    return val / special.beta(a, b)


@pytest.mark.criterion(5, "moment oracle against Beta quadrature, and a Monte-Carlo E[rho^2]")
def test_criterion_5_moment_quadrature():
    for p in range(2, 51):
        for m in (2, 4, 6, 8, 10):
            exact = rho_even_moment(p, m).value
            assert abs(exact - beta_moment(p, m)) <= 1e-10 * exact


@pytest.mark.criterion(5, "moment oracle against Beta quadrature, and a Monte-Carlo E[rho^2]")
def test_criterion_5_monte_carlo_second_moment():
    N, p = 100_000, 10
    U = sample_uniform_sphere(derive_stream(SEED, [5, 0]), N, p)
    V = sample_uniform_sphere(derive_stream(SEED, [5, 1]), N, p)
    r2 = np.einsum("ij,ij->i", U, V) ** 2
    assert abs(r2.mean() - 0.1) <= 4 * mean_se(r2)


# 6 ---------------------------------------------------------------------------

def random_inputs(family, count=100):
    rng = np.random.default_rng([SEED, 6, len(family)])
    for _ in range(count):
        n = int(rng.integers(3 if family == "serial" else 2, 51))
        p = int(rng.integers(2, 21))
        yield rng, n, p, normalize_rows(rng.standard_normal((n, p)))


def dual_pairs(family):
    for rng, n, p, U in random_inputs(family):
        if family == "uniformity":
            yield rayleigh(U), rayleigh_direct(U)
        elif family == "location":
            theta = normalize_rows(rng.standard_normal((1, p)))[0]
            yield location(U, theta), location_direct(U, theta)
        elif family == "serial":
            H = int(rng.integers(1, min(5, n - 2) + 1))
            yield portmanteau(U, H), portmanteau_direct(U, H)
        elif family == "independence":
            V = normalize_rows(rng.standard_normal((n, int(rng.integers(1, 21)))))
            yield independence(U, V), independence_direct(U, V)
        else:
            yield sphericity(U), sphericity_direct(U)


@pytest.mark.criterion(6, "dual-form identities on 100 random inputs per family")
@pytest.mark.parametrize("family", ["uniformity", "location", "serial", "independence", "sphericity"])
def test_criterion_6_dual_forms(family):
    for pair, (raw, dof) in dual_pairs(family):
        assert pair.dof == dof
        other = standardize(raw, dof)
        assert abs(pair.standardized - other) <= 1e-9 * abs(other)


# 7 ---------------------------------------------------------------------------

@pytest.mark.criterion(7, "location test distribution-free: f = 1 against f = exp(5w)")
def test_criterion_7_location_distribution_free():
    M = 10_000
    a = cell("location", 50, 20, M, null_model="rotsym", rotsym={"kind": "uniform"})
    b = cell("location", 50, 20, M, null_model="rotsym", rotsym={"kind": "vmf", "kappa": 5.0})
    assert ks_two_sample(a.values, b.values).d < 1.95 * math.sqrt(2 / M)


# 8 ---------------------------------------------------------------------------

def commutation(p):
    K = np.zeros((p * p, p * p))
    for i in range(p):
        for j in range(p):
            K[i * p + j, j * p + i] = 1.0
    return K


@pytest.mark.criterion(8, "fourth-moment identities at M = 1e5, entrywise within 5e-3")
def test_criterion_8_fourth_moments():
    M, p = 100_000, 3
    U = sample_uniform_sphere(derive_stream(SEED, [8, 0]), M, p)
    vecs = np.einsum("mi,mj->mji", U, U).reshape(M, p * p)
    vec_i = np.eye(p).ravel(order="F")
    target = (np.eye(p * p) + commutation(p) + np.outer(vec_i, vec_i)) / (p * (p + 2))
    assert np.max(np.abs(vecs.T @ vecs / M - target)) <= 5e-3


@pytest.mark.criterion(8, "fourth-moment identities at M = 1e5, entrywise within 5e-3")
def test_criterion_8_cross_moments():
    M, p, q = 100_000, 2, 3
    U = sample_uniform_sphere(derive_stream(SEED, [8, 1]), M, p)
    V = sample_uniform_sphere(derive_stream(SEED, [8, 2]), M, q)
    vecs = np.einsum("mi,mj->mji", U, V).reshape(M, p * q)
    assert np.max(np.abs(vecs.T @ vecs / M - np.eye(p * q) / (p * q))) <= 5e-3


# 9 ---------------------------------------------------------------------------

@pytest.mark.criterion(9, "run_grid byte-identical across workers 1, 4, 16 and repeated runs")
@pytest.mark.parametrize("family", ["uniformity", "location", "serial", "serial_lowrank", "independence", "sphericity"])
def test_criterion_9_determinism(family):
    cfg = SimulationConfig(family=family, grid_n=[4, 30], grid_p=[4, 30], M=200, master_seed=SEED, H=2)
    ref = canonical_bytes(run_grid(cfg))
    assert canonical_bytes(run_grid(cfg)) == ref
    for w in (4, 16):
        assert canonical_bytes(run_grid(with_workers(cfg, w))) == ref
