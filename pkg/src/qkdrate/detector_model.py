"""Detection-probability kernels for Bob's receiver and the eavesdropper.

Bob's receiver is modelled as a passive 50/50 splitter feeding two polarizing
splitters and four detectors. A photon prepared in one of Alice's states lands
on the matching detector of her basis with probability 1/2, on the orthogonal
detector of her basis never, and on each detector of the other basis with
probability 1/4. Each landing is registered with probability eta.
"""

from dataclasses import dataclass
from functools import lru_cache
import itertools
import math

import numpy as np
from scipy.stats import binom, multinomial

from qkdrate.photon_stats import poisson_pmf, truncation_bound

MAX_ENUM_PHOTONS = 12


def _check_prob(x, name):
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def z_hat_E(l):
    """Best unambiguous-discrimination success probability on l photons."""
    if l <= 2:
        return 0.0
    if l % 2 == 0:
        return 1.0 - 2.0 ** (1 - l / 2)
    return 1.0 - 2.0 ** ((1 - l) / 2)


def z_E_avg(mu):
    """Poisson average of z_hat_E, closed form."""
    r = math.sqrt(2.0)
    a = mu / r
    if mu < 0.05:
        # closed form cancels catastrophically here; the series converges fast
        ls = np.arange(3, 25)
        return float(np.dot(poisson_pmf(mu, ls), [z_hat_E(int(k)) for k in ls]))
    return 1.0 - math.exp(-mu) * (r * math.sinh(a) + 2 * math.cosh(a) - 1)


def z_hat_B(eta, l):
    """Probability that exactly one of Bob's four detectors fires on l photons."""
    _check_prob(eta, "eta")
    if l == 0:
        return 0.0
    if l == 1:
        return eta
    p0 = 1.0 - eta
    return sum((pd + p0) ** l - p0**l for pd in (eta / 2, eta / 4, eta / 4))


def Z_kernel(eta, a, l, min_l=1):
    """Binomially thinned single-click kernel.

    sum_{l'>=min_l} C(l,l') a^l' (1-a)^(l-l') z_hat_B(eta, l')
    """
    if min_l not in (1, 2):
        raise ValueError("min_l must be 1 or 2")
    _check_prob(a, "a")
    if l < min_l:
        return 0.0
    lp = np.arange(min_l, l + 1)
    zb = np.array([z_hat_B(eta, int(k)) for k in lp])
    return float(np.dot(binom.pmf(lp, l, a), zb))


@lru_cache(maxsize=256)
def _multi_click_coeffs(eta, a, lmax):
    return np.array([Z_kernel(eta, a, l, 2) for l in range(lmax + 1)])


def multi_photon_click_avg(mu, eta, a):
    """Poisson average of the l'>=2 part of Z_kernel."""
    if mu == 0:
        return 0.0
    lmax = truncation_bound(mu)
    coeff = _multi_click_coeffs(float(eta), float(a), lmax)
    return float(np.dot(poisson_pmf(mu, np.arange(lmax + 1)), coeff))


@dataclass(frozen=True)
class SurrogateDistribution:
    """Photon-number law of the pulse Eve resends after a direct attack."""

    pmf: tuple
    mu_E: float | None = None

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("surrogate pmf must be nonnegative and sum to 1")

    @classmethod
    def poisson(cls, mu_E):
        if mu_E < 0:
            raise ValueError("mu_E must be >= 0")
        L = truncation_bound(mu_E)
        p = poisson_pmf(mu_E, np.arange(L + 1))
        p = np.atleast_1d(p)
        p = p / p.sum()
        return cls(tuple(p.tolist()), mu_E)

    @classmethod
    def fixed(cls, l_E):
        p = [0.0] * (l_E + 1)
        p[l_E] = 1.0
        return cls(tuple(p))

    @property
    def array(self):
        return np.asarray(self.pmf, dtype=float)


@dataclass(frozen=True)
class TransparencyFactors:
    """Partial line attenuations around Eve and her transparency upgrades.

    alpha_AE * alpha_EB must reproduce the line attenuation. rho_XY scales the
    corresponding segment; rho = 1/alpha makes that segment lossless.
    """

    alpha_AE: float
    alpha_EB: float
    rho_AE: float = 1.0
    rho_EB: float = 1.0

    def __post_init__(self):
        for nm in ("alpha_AE", "alpha_EB"):
            _check_prob(getattr(self, nm), nm)
        if self.rho_AE < 0 or self.rho_EB < 0:
            raise ValueError("transparency factors must be >= 0")
        if self.a_AE > 1 + 1e-12 or self.a_EB > 1 + 1e-12:
            raise ValueError("alpha*rho must not exceed 1 on either segment")

    @property
    def a_AE(self):
        return self.alpha_AE * self.rho_AE

    @property
    def a_EB(self):
        return self.alpha_EB * self.rho_EB

    @property
    def alpha(self):
        return self.alpha_AE * self.alpha_EB

    def check_product(self, alpha, tol=1e-12):
        if abs(self.alpha - alpha) > tol:
            raise ValueError("alpha_AE * alpha_EB does not match the line attenuation")

    @classmethod
    def maximal(cls, alpha, split=0.5):
        """Eve replaces both segments with lossless ones."""
        a_ae = alpha**split
        a_eb = alpha / a_ae if a_ae > 0 else 0.0
        return cls(a_ae, a_eb, 1.0 / a_ae if a_ae else 1.0, 1.0 / a_eb if a_eb else 1.0)

    @classmethod
    def untouched(cls, alpha, split=0.5):
        a_ae = alpha**split
        return cls(a_ae, alpha / a_ae if a_ae else 0.0)


def surrogate_detect_factor(xi, eta, aeb, mcs=False):
    """Chance that Bob keeps Eve's resent surrogate pulse.

    Without click monitoring any click counts; with it only single clicks do.
    """
    _check_prob(aeb, "aeb")
    _check_prob(eta, "eta")
    p = xi.array
    lE = np.arange(len(p))
    if not mcs:
        return float(np.dot(p, 1.0 - (1.0 - eta * aeb) ** lE))
    total = 0.0
    for k, w in zip(lE, p):
        if w == 0.0 or k == 0:
            continue
        single = k * eta * aeb * (1 - aeb) ** (k - 1)
        total += w * (single + Z_kernel(eta, aeb, int(k), 2))
    return float(total)


def enumerate_detection_outcomes(l, eta, r_c=0.0):
    """Exact distribution of click patterns for l photons.

    Returns a dict mapping a 4-tuple of booleans (detectors 1..4, the first two
    in Alice's basis) to probability. Detector 2 is the error detector and
    collects a fraction r_c of the matching-basis landings.
    """
    if l > MAX_ENUM_PHOTONS:
        raise ValueError(f"exhaustive enumeration is limited to {MAX_ENUM_PHOTONS} photons")
    _check_prob(eta, "eta")
    probs = [1 - eta, eta / 2 * (1 - r_c), eta / 2 * r_c, eta / 4, eta / 4]
    out = {}
    if l == 0:
        return {(False, False, False, False): 1.0}
    for counts in itertools.product(range(l + 1), repeat=4):
        lost = l - sum(counts)
        if lost < 0:
            continue
        pr = multinomial.pmf([lost, *counts], l, probs)
        if pr == 0.0:
            continue
        key = tuple(c > 0 for c in counts)
        out[key] = out.get(key, 0.0) + float(pr)
    return out


def single_click_probability(outcomes):
    return sum(p for k, p in outcomes.items() if sum(k) == 1)
