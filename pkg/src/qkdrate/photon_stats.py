"""Poisson photon-number primitives for attenuated laser pulses."""

import math

import numpy as np
from scipy.stats import poisson

DEFAULT_TOL = 1e-15


def _check_mu(mu):
    if not np.all(np.isfinite(mu)) or np.any(np.asarray(mu) < 0):
        raise ValueError(f"mean photon number must be finite and >= 0, got {mu!r}")


def poisson_pmf(mu, l):
    """Probability that a pulse of mean `mu` holds exactly `l` photons.

    Accepts scalars or arrays for `l`. scipy evaluates in log space, so large
    photon numbers do not overflow the factorial.
    """
    _check_mu(mu)
    out = poisson.pmf(l, mu)
    return float(out) if np.ndim(out) == 0 else out


# shorthand used throughout the attack formulas
psi = poisson_pmf


def p_at_least(mu, k):
    """P(at least k photons) for k in {1, 2}."""
    _check_mu(mu)
    if k == 1:
        return -math.expm1(-mu)
    if k == 2:
        return -math.expm1(-mu) - mu * math.exp(-mu)
    raise ValueError(f"k must be 1 or 2, got {k!r}")


def truncation_bound(mu, tol=DEFAULT_TOL):
    """Photon number L beyond which the Poisson tail mass is below `tol`.

    Never smaller than max(10, ceil(mu + 10 sqrt(mu))) so series sums keep a
    safety margin even when the tail criterion is met early.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    _check_mu(mu)
    if mu == 0:
        return 0
    floor = max(10, math.ceil(mu + 10 * math.sqrt(mu)))
    ls = np.arange(0, int(mu + 40 * math.sqrt(mu) + 200))
    tail = poisson.sf(ls, mu)
    L = int(ls[np.argmax(tail < tol)])
    return max(L, floor)
