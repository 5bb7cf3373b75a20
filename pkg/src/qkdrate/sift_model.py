"""Expected sifted-bit and error-bit counts per processing block."""

from dataclasses import dataclass, replace
import math

from qkdrate.detector_model import multi_photon_click_avg
from qkdrate.photon_stats import p_at_least


@dataclass(frozen=True)
class ChannelParams:
    alpha: float
    r_c: float
    r_d: float
    eta: float
    mu: float
    m: float

    def __post_init__(self):
        for name in ("alpha", "r_c", "r_d", "eta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if self.mu < 0 or not math.isfinite(self.mu):
            raise ValueError("mu must be finite and >= 0")
        if self.m < 1:
            raise ValueError("m must be >= 1")

    def with_mu(self, mu):
        return replace(self, mu=mu)


@dataclass(frozen=True)
class SiftOutcome:
    n: float
    e_T: float
    n1: float
    e_T1: float


def detect_probability(p: ChannelParams, mcs=False):
    """Per-pulse probability (before the 1/2 sifting factor) that Bob keeps a click.

    With click monitoring, only single-click cells survive: one arriving photon
    detected with probability eta, plus the single-click share of multi-photon
    arrivals.
    """
    if not mcs:
        return p_at_least(p.eta * p.mu * p.alpha, 1)
    x = p.mu * p.alpha
    return p.eta * x * math.exp(-x) + multi_photon_click_avg(p.mu, p.eta, p.alpha)


def sifted_count(p: ChannelParams, mcs=False, exact=False):
    """Expected sifted bits n.

    exact=True keeps the dark-count/photon coincidence factor (1 - r_d) that the
    usual r_d << 1 form drops.
    """
    q = detect_probability(p, mcs)
    if exact:
        return p.m / 2 * ((1 - p.r_d) * q + p.r_d)
    return p.m / 2 * (q + p.r_d)


def error_count(p: ChannelParams, mcs=False, exact=False):
    q = detect_probability(p, mcs)
    if exact:
        return p.m / 2 * ((1 - p.r_d / 2) * p.r_c * q + p.r_d / 2)
    return p.m / 2 * (p.r_c * q + p.r_d / 2)


def single_photon_parts(p: ChannelParams):
    """(n1, e_T1): contributions from pulses that carried exactly one photon to Bob."""
    x = p.eta * p.mu * p.alpha
    psi1 = x * math.exp(-x)
    return p.m / 2 * (psi1 + p.r_d), p.m / 2 * (p.r_c * psi1 + p.r_d / 2)


def sift_outcome(p: ChannelParams, mcs=False):
    n1, e1 = single_photon_parts(p)
    return SiftOutcome(sifted_count(p, mcs), error_count(p, mcs), n1, e1)


def naive_sifted_lower_bound(p: ChannelParams):
    # attenuating the detection probability instead of the photon number
    return p.m / 2 * (p.eta * p_at_least(p.mu, 1) * p.alpha + p.r_d)
