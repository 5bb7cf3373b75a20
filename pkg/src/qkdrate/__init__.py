"""Secret-key throughput model for weak-coherent-pulse BB84 links."""

from qkdrate.photon_stats import poisson_pmf, p_at_least, truncation_bound
from qkdrate.secrecy import SystemParams, secrecy_capacity, optimize_mu, secrecy_rate

__all__ = [
    "poisson_pmf",
    "p_at_least",
    "truncation_bound",
    "SystemParams",
    "secrecy_capacity",
    "optimize_mu",
    "secrecy_rate",
]

__version__ = "0.1.0"
