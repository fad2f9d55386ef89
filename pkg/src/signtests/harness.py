"""Monte-Carlo null-distribution experiments over (n, p) grids.

Replicate ``r`` of cell ``(n, p)`` always draws from the stream
``derive_stream(master_seed, [family_id, n, p, r])``. Worker threads only
change who computes which replicate, never what is computed, and results are
collected in replicate order, so a report is a pure function of the config.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import __version__
from .distributions import KsDistance, ks_distance
from .errors import CapacityError, DomainError, GridError
from .inference import FAMILIES
from .sampling import (
    RotationalModel,
    derive_stream,
    normalize_rows,
    sample_gaussian_matrix,
    sample_independent_pair,
    sample_rotsym,
    sample_uniform_sphere,
)
from . import statistics as stats

NULL_MODELS = ("uniform_sphere", "gaussian_directions", "rotsym")
DESK_GRID = (4, 30, 200)
FULL_GRID = (4, 30, 200, 1000)
DESK_M = 2000
FULL_M = 10_000
MAX_RETAINED = 10**6
DEFAULT_CAPACITY = 10**12
HIST_BINS = 60
HIST_RANGE = (-5.0, 5.0)


class ConfigError(DomainError):
    """Invalid simulation configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class SimulationConfig:
    family: str
    grid_n: tuple
    grid_p: tuple
    M: int = DESK_M
    master_seed: int = 0
    alpha: float = 0.05
    H: int = 3
    null_model: str = "uniform_sphere"
    rotsym: Optional[dict] = None
    workers: int = 1
    capacity: int = DEFAULT_CAPACITY

    def __post_init__(self):
        object.__setattr__(self, "grid_n", tuple(self.grid_n))
        object.__setattr__(self, "grid_p", tuple(self.grid_p))
        if self.family not in FAMILIES:
            raise ConfigError("family", f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        for name in ("grid_n", "grid_p"):
            grid = getattr(self, name)
            if not grid:
                raise ConfigError(name, "grid must be nonempty")
            if any(isinstance(v, bool) or int(v) != v or v < 1 for v in grid):
                raise ConfigError(name, f"grid entries must be positive integers, got {list(grid)}")
            object.__setattr__(self, name, tuple(int(v) for v in grid))
        for name in ("M", "workers", "H", "capacity"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ConfigError(name, f"must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if int(self.master_seed) != self.master_seed:
            raise ConfigError("master_seed", "must be an integer")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha!r}")
        if self.null_model not in NULL_MODELS:
            raise ConfigError("null_model", f"unknown null model {self.null_model!r}")
        if self.null_model == "rotsym":
            if self.family == "independence":
                raise ConfigError("null_model", "rotsym null is not defined for the independence family")
            rs = dict(self.rotsym or {"kind": "uniform"})
            if rs.get("kind", "uniform") not in ("uniform", "vmf", "linear"):
                raise ConfigError("rotsym", f"kind must be uniform, vmf or linear, got {rs.get('kind')!r}")
            object.__setattr__(self, "rotsym", rs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid_n"] = list(self.grid_n)
        d["grid_p"] = list(self.grid_p)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        known = {f.name for f in fields(cls)}
        required = {"family", "grid_n", "grid_p"}
        missing = required - set(d)
        if missing:
            raise ConfigError(sorted(missing)[0], "required field missing")
        return cls(**{k: v for k, v in d.items() if k in known})

    @property
    def family_id(self) -> int:
        return FAMILIES.index(self.family)

    def split_dims(self, p: int) -> tuple:
        """(p, q) used for a cell; independence splits the total dimension evenly."""
        if self.family == "independence":
            half = max(1, int(math.floor(p / 2 + 0.5)))
            return half, half
        return p, None


@dataclass
class CellSummary:
    family: str
    n: int
    p: int
    q: Optional[int]
    H: Optional[int]
    M: int
    seed_path: list
    mean: float
    variance: float
    skewness: float
    ks_normal: KsDistance
    rejection_rate_universal: float
    rejection_rate_fixed: float
    hist_edges: list
    hist_counts: list
    hist_underflow: int
    hist_overflow: int
    values: list = field(default_factory=list)
    raw_values: list = field(default_factory=list)

    @property
    def bin_width(self) -> float:
        return self.hist_edges[1] - self.hist_edges[0]


@dataclass
class SimulationReport:
    config: SimulationConfig
    cells: list
    wall_time: float = 0.0
    version: str = __version__

    @property
    def cell_seeds(self) -> list:
        return [c.seed_path for c in self.cells]

    def canonical_dict(self) -> dict:
        """Everything that is a function of the config: excludes timing and worker count."""
        from .report import report_to_dict

        d = report_to_dict(self)
        d["provenance"].pop("wall_time", None)
        d["config"].pop("workers", None)
        return d


# -- replicate evaluation ----------------------------------------------------

def _theta0(p):
    e = np.zeros(p)
    e[0] = 1.0
    return e


def _draw(config: SimulationConfig, stream, n, p):
    if config.null_model == "rotsym":
        rs = config.rotsym
        theta = _theta0(p)
        kind = rs.get("kind", "uniform")
        if kind == "vmf":
            model = RotationalModel.von_mises_fisher(theta, rs.get("kappa", 0.0))
        elif kind == "linear":
            model = RotationalModel.linear(theta, rs.get("a", 0.0))
        else:
            model = RotationalModel.uniform(theta)
        return sample_rotsym(stream, n, model)
    if config.null_model == "gaussian_directions":
        return normalize_rows(sample_gaussian_matrix(stream, n, p))
    return sample_uniform_sphere(stream, n, p)


def _replicate(config: SimulationConfig, n, p_total, r):
    stream = derive_stream(config.master_seed, [config.family_id, n, p_total, r])
    p, q = config.split_dims(p_total)
    fam = config.family
    if fam == "independence":
        U, V = sample_independent_pair(stream, n, p, q)
        return stats.independence(U, V)
    U = _draw(config, stream, n, p)
    if fam == "uniformity":
        return stats.rayleigh(U)
    if fam == "location":
        return stats.location(U, _theta0(p))
    if fam == "serial":
        return stats.portmanteau(U, config.H)
    if fam == "serial_lowrank":
        return stats.portmanteau_lowrank(U, config.H)
    return stats.sphericity(U)


def _chunk(config, n, p_total, start, stop):
    st = np.empty(stop - start)
    raw = np.empty(stop - start)
    for k, r in enumerate(range(start, stop)):
        pair = _replicate(config, n, p_total, r)
        st[k] = pair.standardized
        raw[k] = pair.raw
    return st, raw


def _dof(config, n, p, q):
    fam = config.family
    if fam == "uniformity":
        return p
    if fam == "location":
        return p - 1
    if fam == "serial":
        return config.H * p * p
    if fam == "serial_lowrank":
        return config.H
    if fam == "independence":
        return p * q
    return stats.sphericity_dof(p)


def _check_cell(config, n, p):
    fam = config.family
    if fam in ("serial", "serial_lowrank") and config.H > n - 2:
        raise DomainError(f"serial family needs H <= n-2, got H={config.H} with n={n}")
    if fam in ("location", "sphericity") and p < 2:
        raise DomainError(f"{fam} family requires p >= 2, got p={p}")
    work = n * p * config.M
    if work > config.capacity:
        raise CapacityError(f"n*p*M = {work} exceeds the capacity budget {config.capacity}")
    if config.M > MAX_RETAINED:
        raise CapacityError(f"M = {config.M} exceeds the retained-value limit {MAX_RETAINED}")


def _summarize(config, n, p_total, p, q, st, raw) -> CellSummary:
    M = st.size
    mean = float(np.mean(st))
    if M > 1:
        dev = st - mean
        variance = float(np.sum(dev * dev) / (M - 1))
        m2 = float(np.mean(dev * dev))
        skew = float(np.mean(dev**3) / m2**1.5) if m2 > 0 else 0.0
    else:
        variance, skew = 0.0, 0.0
    dof = _dof(config, n, p, q)
    # same decision rule as inference.evaluate, vectorized
    rej_u = float(np.mean(special.ndtr(-st) < config.alpha))
    rej_f = float(np.mean(special.gammaincc(0.5 * dof, 0.5 * np.maximum(raw, 0.0)) < config.alpha))
    lo, hi = HIST_RANGE
    edges = np.linspace(lo, hi, HIST_BINS + 1)
    counts, _ = np.histogram(np.clip(st, lo, hi), bins=edges)
    fam = config.family
    return CellSummary(
        family=fam,
        n=n,
        p=p_total,
        q=q,
        H=config.H if fam in ("serial", "serial_lowrank") else None,
        M=M,
        seed_path=[config.master_seed, config.family_id, n, p_total],
        mean=mean,
        variance=variance,
        skewness=skew,
        ks_normal=ks_distance(np.sort(st)),
        rejection_rate_universal=rej_u,
        rejection_rate_fixed=rej_f,
        hist_edges=[float(e) for e in edges],
        hist_counts=[int(c) for c in counts],
        hist_underflow=int(np.sum(st < lo)),
        hist_overflow=int(np.sum(st > hi)),
        values=[float(v) for v in st],
        raw_values=[float(v) for v in raw],
    )


def run_cell(config: SimulationConfig, n: int, p: int) -> CellSummary:
    """Simulate M null replicates of the configured statistic at one grid point.

    ``p`` is the total dimension; for the independence family it is split
    into two equal halves (p = q).
    """
    _check_cell(config, n, p)
    p_eff, q = config.split_dims(p)
    M = config.M
    workers = min(config.workers, M)
    bounds = np.linspace(0, M, workers + 1).astype(int)
    if workers == 1:
        parts = [_chunk(config, n, p, 0, M)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_chunk, config, n, p, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])]
            parts = [f.result() for f in futs]
    st = np.concatenate([s for s, _ in parts])
    raw = np.concatenate([r for _, r in parts])
    return _summarize(config, n, p, p_eff, q, st, raw)


def run_grid(config: SimulationConfig, progress: Optional[Callable] = None) -> SimulationReport:
    """Run every (n, p) cell in row-major order.

    Failing cells do not stop the sweep; if any fail, :class:`GridError` is
    raised carrying the partial report and a manifest of the failures.
    """
    t0 = time.perf_counter()
    cells, failures, errors = [], [], []
    for n in config.grid_n:
        for p in config.grid_p:
            try:
                cell = run_cell(config, n, p)
            except (DomainError, CapacityError) as exc:
                failures.append((n, p, str(exc)))
                errors.append(exc)
                if progress:
                    progress(None, n, p, exc)
                continue
            cells.append(cell)
            if progress:
                progress(cell, n, p, None)
    report = SimulationReport(config=config, cells=cells, wall_time=time.perf_counter() - t0)
    if failures:
        err = GridError(report, failures)
        err.errors = errors
        raise err
    return report


def desk_config(family: str, *, full: bool = False, **overrides) -> SimulationConfig:
    """Default grid: {4, 30, 200}^2 with M = 2000, or the full {4, 30, 200, 1000}^2, M = 10000."""
    grid = FULL_GRID if full else DESK_GRID
    base = dict(family=family, grid_n=grid, grid_p=grid, M=FULL_M if full else DESK_M)
    base.update(overrides)
    return SimulationConfig(**base)


def with_workers(config: SimulationConfig, workers: int) -> SimulationConfig:
    return replace(config, workers=workers)
