"""High-dimensional sign tests with universal (n, p) asymptotics.

Five families of sign statistics (uniformity, spherical location, serial
randomness, multivariate independence, sphericity), each available as a raw
fixed-p chi-square statistic and as a standardized statistic whose null law is
asymptotically standard normal however p grows with n.
"""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    beta_cdf,
    chi2_cdf,
    chi2_quantile,
    ks_distance,
    rho_even_moment,
    std_normal_cdf,
    std_normal_quantile,
)
from .errors import CapacityError, DomainError, GridError, ModelError, SignTestError  # noqa: E402
from .inference import TestOutcome, evaluate  # noqa: E402
from .sampling import (  # noqa: E402
    RngStream,
    RotationalModel,
    derive_stream,
    normalize_rows,
    sample_gaussian_matrix,
    sample_rotsym,
    sample_uniform_sphere,
)
from .statistics import (  # noqa: E402
    StatisticPair,
    gram,
    independence,
    location,
    portmanteau,
    portmanteau_lowrank,
    rayleigh,
    sign_autocorr,
    sphericity,
    tangent_signs,
)

__all__ = [
    "beta_cdf", "chi2_cdf", "chi2_quantile", "ks_distance", "rho_even_moment",
    "std_normal_cdf", "std_normal_quantile",
    "CapacityError", "DomainError", "GridError", "ModelError", "SignTestError",
    "TestOutcome", "evaluate",
    "RngStream", "RotationalModel", "derive_stream", "normalize_rows",
    "sample_gaussian_matrix", "sample_rotsym", "sample_uniform_sphere",
    "StatisticPair", "gram", "independence", "location", "portmanteau",
    "portmanteau_lowrank", "rayleigh", "sign_autocorr", "sphericity", "tangent_signs",
]
