"""Privacy-amplification subtractions.

Covers leakage during reconciliation, the finite-block single-photon
frontier, and the multi-photon attack calculus (direct, indirect, combined)
with the region logic that picks Eve's strongest option per photon number.
All nu functions return the normalized value 2*nu/m.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import entr, erfinv
from scipy.stats import binom

from qkdrate.detector_model import (
    SurrogateDistribution,
    TransparencyFactors,
    surrogate_detect_factor,
    z_E_avg,
    z_hat_B,
    z_hat_E,
)
from qkdrate.photon_stats import p_at_least, poisson_pmf, truncation_bound

LN2 = math.log(2.0)

Y_ODD = 1.0 - 1.0 / math.sqrt(2.0)
Y_EVEN_2 = 1.0 - 2.0 ** (-1.0 / 3.0)


@dataclass(frozen=True)
class AttackContext:
    """Eavesdropper model.

    transparency=None means Eve is maximally transparent on both segments.
    j maps photon number to the fraction of those pulses hit by the indirect
    attack; "auto" lets the region logic choose.
    medium is "free_space" (y = eta*alpha) or "fiber" (Eve may swap the
    cable, so y = eta is also in play).
    """

    transparency: TransparencyFactors | None = None
    u: int = 1
    xi: SurrogateDistribution | None = None
    j: dict | str = "auto"
    mcs: bool = False
    medium: str = "free_space"
    direct_strength_factor: float = 1.0

    def __post_init__(self):
        if self.u < 1:
            raise ValueError("u must be >= 1")
        if self.medium not in ("free_space", "fiber"):
            raise ValueError(f"unknown medium {self.medium!r}")
        if not 0 < self.direct_strength_factor <= 1:
            raise ValueError("direct_strength_factor must lie in (0, 1]")
        if isinstance(self.j, dict) and any(not 0 <= v <= 1 for v in self.j.values()):
            raise ValueError("j_l must lie in [0, 1]")


@dataclass(frozen=True)
class RegionClass:
    region: int
    y: float


# ---------------------------------------------------------------- leakage

def binary_entropy(z):
    return (entr(z) + entr(1.0 - z)) / LN2


def leakage_ratio(x, zeta):
    """Q = x h(zeta)/zeta, leaked bits per error bit."""
    if zeta <= 0.0 or zeta >= 1.0:
        return 0.0
    return x * float(binary_entropy(zeta)) / zeta


def ec_leakage(x, n, e_T):
    if x < 1:
        raise ValueError("Shannon deficit x must be >= 1")
    if n <= 0 or e_T <= 0 or e_T >= n:
        return 0.0
    return x * n * float(binary_entropy(e_T / n))


# -------------------------------------------------------- defense frontier

def renyi_info_max(zeta):
    """Largest average Renyi information per single-photon bit at error rate zeta.

    Peaks at 1 for zeta = 1/3 and is held there beyond.
    """
    if zeta >= 1.0 / 3.0:
        return 1.0
    if zeta < 0:
        zeta = 0.0
    r = (1 - 3 * zeta) / (1 - zeta)
    return 1.0 + math.log2(1.0 - 0.5 * r * r)


def frontier_xi(n1, epsilon):
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    return float(erfinv(1.0 - epsilon)) / math.sqrt(2.0 * n1)


@dataclass(frozen=True)
class Frontier:
    t: float
    T: float
    saturated: bool


def frontier(n1, e_T, e_T1, epsilon, exact=False):
    if not 0 < e_T1 < n1:
        raise ValueError("need 0 < e_T1 < n1")
    xi = frontier_xi(n1, epsilon)
    z1 = e_T1 / n1
    arg = z1 + xi
    sat = arg >= 1.0 / 3.0
    ibar = renyi_info_max(arg)
    if exact:
        t = (n1 - e_T1) * ibar + xi * math.sqrt(n1 * (n1 - e_T1))
        return Frontier(t, t / e_T, sat)
    # ratios taken with the single-photon error count
    T = (n1 / e_T1 - 1.0) * ibar + xi * (n1 / e_T1) * math.sqrt(1.0 - z1)
    return Frontier(T * e_T, T, sat)


def defense_frontier(n1, e_T, e_T1, epsilon, exact=False):
    """Bits t removed to cover attacks on single-photon pulses."""
    return frontier(n1, e_T, e_T1, epsilon, exact).t


def frontier_T_infinity(n1, e_T1):
    return (n1 / e_T1 - 1.0) * renyi_info_max(e_T1 / n1)


# ----------------------------------------------------------- attack sums

def _lmax(mu, scale=1.0):
    return truncation_bound(mu * max(1.0, scale))


def _direct_coeff(l, a_ae):
    """sum_l' Bin(l, l', a_ae) z_hat_E(l')."""
    if l < 3:
        return 0.0
    lp = np.arange(3, l + 1)
    return float(np.dot(binom.pmf(lp, l, a_ae), [z_hat_E(int(k)) for k in lp]))


def nu_direct(mu, eta, tf: TransparencyFactors, xi: SurrogateDistribution, mcs=False, scope="all"):
    """Normalized privacy-amplification amount for direct (USD) attacks.

    scope is "all" or an integer photon number.
    """
    surrogate = surrogate_detect_factor(xi, eta, tf.a_EB, mcs)
    if scope == "all":
        ls = range(3, _lmax(mu) + 1)
    else:
        ls = [int(scope)] if scope >= 3 else []
    tot = 0.0
    for l in ls:
        tot += poisson_pmf(mu, l) * _direct_coeff(l, tf.a_AE)
    return tot * surrogate


def nu_direct_max(mu, scope="all"):
    if scope == "all":
        return z_E_avg(mu)
    return poisson_pmf(mu, scope) * z_hat_E(scope)


def _indirect_coeff(l, u, eta, a_ae, a_eb, mcs):
    """Per-pulse gain of the indirect attack on an l-photon pulse."""
    if l < 2:
        return 0.0
    if not mcs:
        if a_ae == 1.0:
            return 1.0 - (1.0 - eta * a_eb) ** (l - u)
        return 1.0 - (1.0 - eta * a_eb) ** (-u) * (1.0 - eta * a_ae * a_eb) ** l
    tot = 0.0
    lp = np.arange(u, l + 1)
    wts = binom.pmf(lp, l, a_ae)
    for k, w in zip(lp, wts):
        rem = int(k) - u
        if w == 0.0 or rem < 1:
            continue
        inner = 0.0
        for j in range(1, rem + 1):
            zb = eta if j == 1 else z_hat_B(eta, j)
            inner += binom.pmf(j, rem, a_eb) * zb
        tot += w * inner
    return tot


def nu_indirect(mu, eta, tf: TransparencyFactors, u=1, mcs=False, scope="all"):
    """Normalized privacy-amplification amount for indirect (PNS) attacks."""
    if u < 1:
        raise ValueError("u must be >= 1")
    if scope != "all":
        l = int(scope)
        if u >= l:
            raise ValueError("need u <= l - 1 for a particular-l indirect attack")
        return poisson_pmf(mu, l) * _indirect_coeff(l, u, eta, tf.a_AE, tf.a_EB, mcs)
    if not mcs and (tf.a_AE == 1.0 or mu < 0.05):
        ls = np.arange(u + 1, _lmax(mu) + 1)
        return float(sum(poisson_pmf(mu, int(l)) * _indirect_coeff(int(l), u, eta, tf.a_AE, tf.a_EB, False) for l in ls))
    if not mcs:
        # closed form of the series over l >= 2
        y = eta * tf.a_AE * tf.a_EB
        tail = math.exp(-mu * y) - math.exp(-mu) * (1.0 + mu * (1.0 - y))
        return p_at_least(mu, 2) - (1.0 - eta * tf.a_EB) ** (-u) * tail
    ls = np.arange(2, _lmax(mu) + 1)
    return float(sum(poisson_pmf(mu, int(l)) * _indirect_coeff(int(l), u, eta, tf.a_AE, tf.a_EB, True) for l in ls if l > u))


def nu_indirect_max(mu, eta, u=1, scope="all"):
    if scope == "all":
        ls = np.arange(u + 1, _lmax(mu) + 1)
        return float(np.dot(poisson_pmf(mu, ls), 1.0 - (1.0 - eta) ** (ls - u)))
    l = int(scope)
    if u >= l:
        raise ValueError("need u <= l - 1")
    return poisson_pmf(mu, l) * (1.0 - (1.0 - eta) ** (l - u))


# ------------------------------------------------------------ regions

def attack_strength_delta(k, y, parity):
    """Indirect minus direct strength for l = 2k (even) or l = 2k+1 (odd)."""
    if parity == "even":
        if k < 2:
            raise ValueError("even branch needs k >= 2")
        return 2.0 ** (1 - k) - (1.0 - y) ** (2 * k - 1)
    if parity == "odd":
        if k < 1:
            raise ValueError("odd branch needs k >= 1")
        return 2.0 ** (-k) - (1.0 - y) ** (2 * k)
    raise ValueError("parity must be 'even' or 'odd'")


def y_even_boundary(k):
    if k < 2:
        raise ValueError("k must be >= 2")
    return 1.0 - 2.0 ** (-(1 - k) / (1 - 2 * k))


def region_classify(y):
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    if y > Y_ODD:
        return RegionClass(1, y)
    if y < Y_EVEN_2:
        return RegionClass(2, y)
    return RegionClass(3, y)


def sigma_ratio(k, y, parity):
    """Indirect-to-direct strength ratio; >= 1 means indirect wins."""
    if parity == "even":
        if k < 2:
            raise ValueError("even branch needs k >= 2")
        return (1.0 - (1.0 - y) ** (2 * k - 1)) / (1.0 - 2.0 ** (1 - k))
    if parity == "odd":
        if k < 1:
            raise ValueError("odd branch needs k >= 1")
        return (1.0 - (1.0 - y) ** (2 * k)) / (1.0 - 2.0 ** (-k))
    raise ValueError("parity must be 'even' or 'odd'")


def j_selector(l, y, direct_scale=1.0):
    """1 if the indirect attack is the one Eve should use on l-photon pulses.

    direct_scale < 1 weakens the direct attack (click monitoring, reduced USD
    strength); in region 3 the choice is then made on the scaled strengths.
    """
    if l <= 2:
        return 1
    region = region_classify(y).region
    if region == 1:
        return 1
    if region == 2:
        return 0
    if direct_scale == 1.0:
        if l % 2 == 1:
            return 0
        return 1 if sigma_ratio(l // 2, y, "even") >= 1.0 else 0
    return 1 if 1.0 - (1.0 - y) ** (l - 1) >= direct_scale * z_hat_E(l) else 0


def _odd_direct_sum(mu):
    """sum over odd l of psi_l(mu) z_hat_E(l)."""
    r = math.sqrt(2.0)
    if mu < 0.05:
        ls = np.arange(3, 25, 2)
        return float(np.dot(poisson_pmf(mu, ls), [z_hat_E(int(k)) for k in ls]))
    return math.exp(-mu) * (math.sinh(mu) - r * math.sinh(mu / r))


def nu_region1(mu, y):
    """Every multi-photon pulse gets the u=1 indirect attack."""
    if y >= 1.0:
        return p_at_least(mu, 2)
    if mu < 0.05:
        ls = np.arange(2, 25)
        return float(np.dot(poisson_pmf(mu, ls), 1.0 - (1.0 - y) ** (ls - 1)))
    tail = math.exp(-mu * y) - math.exp(-mu) * (1.0 + mu * (1.0 - y))
    return p_at_least(mu, 2) - tail / (1.0 - y)


def nu_region2(mu, y, direct_scale=1.0):
    """Two-photon pulses indirect, everything larger direct."""
    return poisson_pmf(mu, 2) * y + direct_scale * z_E_avg(mu)


def nu_region3(mu, y, direct_scale=1.0):
    """Odd pulses direct; even pulses pick whichever attack is stronger."""
    tot = poisson_pmf(mu, 2) * y
    if direct_scale == 1.0:
        tot += _odd_direct_sum(mu)
    for l in range(3, _lmax(mu) + 1):
        if direct_scale == 1.0 and l % 2 == 1:
            continue
        ind = 1.0 - (1.0 - y) ** (l - 1)
        dirc = direct_scale * z_hat_E(l)
        tot += poisson_pmf(mu, l) * (ind if j_selector(l, y, direct_scale) else dirc)
    return tot


def nu_for_region(mu, y, region, direct_scale=1.0):
    if region == 1:
        return nu_region1(mu, y)
    if region == 2:
        return nu_region2(mu, y, direct_scale)
    return nu_region3(mu, y, direct_scale)


def nu_mixed(mu, y, j, direct_scale=1.0):
    """Explicit attack mix: j[l] of the l-photon pulses see the indirect attack."""
    tot = 0.0
    for l in range(2, _lmax(mu) + 1):
        jl = j.get(l, 1.0 if l == 2 else 0.0)
        ind = 1.0 - (1.0 - y) ** (l - 1)
        tot += poisson_pmf(mu, l) * (jl * ind + (1 - jl) * direct_scale * z_hat_E(l))
    return tot


def direct_scale(eta, ctx: AttackContext):
    return ctx.direct_strength_factor * (eta if ctx.mcs else 1.0)


def attack_y_values(eta, alpha, ctx: AttackContext):
    """Candidate y values Eve can realize on this channel."""
    if ctx.medium == "fiber":
        return (eta * alpha, eta)
    return (eta * alpha,)


def nu_max_total(mu, eta, alpha, ctx: AttackContext = AttackContext()):
    """Worst-case normalized multi-photon subtraction for the whole block."""
    c = direct_scale(eta, ctx)
    ys = attack_y_values(eta, alpha, ctx)
    if isinstance(ctx.j, dict):
        return max(nu_mixed(mu, y, ctx.j, c) for y in ys)
    regions = [region_classify(y).region for y in ys]
    if len(set(regions)) == 1:
        # same region at both ends: the larger y is the stronger channel for Eve
        y = max(ys)
        return nu_for_region(mu, y, regions[0], c)
    return max(nu_for_region(mu, y, r, c) for y, r in zip(ys, regions))


def nu_pyrrhic(mu):
    """Discard everything a multi-photon pulse could carry."""
    return p_at_least(mu, 2)


# ------------------------------------------------------ combined attacks

@dataclass(frozen=True)
class AttackSymbol:
    """Split of an l-photon pulse: l_d photons to USD, l_i to splitting with u kept."""

    l_d: int
    l_i: int
    u: int = 0

    @property
    def l(self):
        return self.l_d + self.l_i

    @property
    def kind(self):
        if self.l_i < 2:
            return "direct"
        if self.l_d < 3:
            return "indirect"
        return "combined"

    def __str__(self):
        d = f"({self.l_d})" if self.l_d < 3 and self.l_i >= 2 else str(self.l_d)
        i = f"({self.l_i})" if self.l_i < 2 else str(self.l_i)
        sup = f"^{{{self.u}+{self.l_i - self.u}}}" if self.l_i >= 2 else ""
        return f"({d},{i}){sup}"


def enumerate_attacks(l):
    """All distinct ways to split an l-photon pulse between the two attacks."""
    out = [AttackSymbol(l, 0), AttackSymbol(l - 1, 1)] if l >= 1 else [AttackSymbol(0, 0)]
    for li in range(2, l + 1):
        for u in range(1, li):
            out.append(AttackSymbol(l - li, li, u))
    return out


def combined_attack_strength(l, l_d, u, y):
    """Per-psi_l success coefficients (direct part, indirect part) of a combined attack."""
    if l < 5 or not 3 <= l_d <= l - 2 or not 1 <= u <= l - l_d - 1:
        raise ValueError(f"invalid combined attack l={l}, l_d={l_d}, u={u}")
    return z_hat_E(l_d), 1.0 - (1.0 - y) ** ((l - l_d) - u)


def attack_coefficient(sym: AttackSymbol, y):
    """Chance that the split yields the bit: either part succeeding is enough."""
    d = z_hat_E(sym.l_d) if sym.l_d >= 3 else 0.0
    i = 1.0 - (1.0 - y) ** (sym.l_i - sym.u) if sym.l_i >= 2 else 0.0
    return 1.0 - (1.0 - d) * (1.0 - i)


def nu_general(mu, eta, ctx: AttackContext):
    """Attack sum for explicit transparency factors.

    Per photon number Eve takes the indirect share j[l]; with j="auto" she
    takes whichever attack gains more.
    """
    tf = ctx.transparency or TransparencyFactors(1.0, 1.0)
    xi = ctx.xi or SurrogateDistribution.fixed(1)
    surrogate = surrogate_detect_factor(xi, eta, tf.a_EB, ctx.mcs) * ctx.direct_strength_factor
    tot = 0.0
    for l in range(2, _lmax(mu) + 1):
        ind = _indirect_coeff(l, ctx.u, eta, tf.a_AE, tf.a_EB, ctx.mcs) if l > ctx.u else 0.0
        dirc = _direct_coeff(l, tf.a_AE) * surrogate
        if isinstance(ctx.j, dict):
            jl = ctx.j.get(l, 1.0 if l == 2 else 0.0)
            tot += poisson_pmf(mu, l) * (jl * ind + (1 - jl) * dirc)
        else:
            tot += poisson_pmf(mu, l) * max(ind, dirc)
    return tot
