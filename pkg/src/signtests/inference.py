"""p-values and decisions for a :class:`StatisticPair` in both asymptotic regimes.

Both tests are one-sided (reject for large values):

* universal regime: standardized statistic against N(0, 1), valid whatever the
  relative growth of n and p;
* fixed-p regime: raw statistic against chi-square(dof).

Rejection is strict, ``p_value < alpha``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .distributions import chi2_sf, std_normal_sf
from .errors import DomainError
from .statistics import StatisticPair

FAMILIES = ("uniformity", "location", "serial", "serial_lowrank", "independence", "sphericity")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this class

    family: str
    pair: StatisticPair
    p_value_universal: float
    p_value_fixed: float
    alpha: float
    reject_universal: bool
    reject_fixed: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pair"] = asdict(self.pair)
        return out


def evaluate(pair: StatisticPair, alpha: float = 0.05, family: str = "uniformity", **meta) -> TestOutcome:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if family not in FAMILIES:
        raise DomainError(f"unknown test family {family!r}")
    p_univ = std_normal_sf(pair.standardized)
    # raw may dip below zero by rounding when it is exactly representable as 0
    p_fixed = chi2_sf(max(pair.raw, 0.0), pair.dof)
    return TestOutcome(
        family=family,
        pair=pair,
        p_value_universal=p_univ,
        p_value_fixed=p_fixed,
        alpha=float(alpha),
        reject_universal=p_univ < alpha,
        reject_fixed=p_fixed < alpha,
        meta=meta,
    )
