"""Effective secrecy capacity, rate and the photon-number optimization."""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from qkdrate.auth_cost import AuthParams, auth_total
from qkdrate.privacy_amp import (
    AttackContext,
    RegionClass,
    frontier,
    frontier_T_infinity,
    leakage_ratio,
    nu_general,
    nu_max_total,
    nu_pyrrhic,
    region_classify,
)
from qkdrate.sift_model import ChannelParams, detect_probability, single_photon_parts

NU_MODELS = ("region", "general", "pyrrhic", "none")


@dataclass(frozen=True)
class SystemParams:
    """Everything the capacity depends on.

    tau is the bit-cell period in seconds. nu_model picks how the
    multi-photon subtraction is computed: "region" (worst case over the
    attack regions), "general" (explicit transparency/surrogate/j in
    attack), "pyrrhic" (all multi-photon pulses) or "none".
    enemy=False drops every eavesdropping-related cost.
    """

    eta: float
    mu: float
    alpha: float
    r_c: float
    r_d: float
    m: float
    g_pa: int = 30
    auth: AuthParams = field(default_factory=AuthParams)
    epsilon: float = 1e-9
    x: float = 1.16
    tau: float = 1e-10
    mcs: bool = False
    medium: str = "free_space"
    attack: AttackContext = field(default_factory=AttackContext)
    nu_model: str = "region"
    mode: str = "discard"
    exact_frontier: bool = False
    enemy: bool = True

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.x < 1:
            raise ValueError("x must be >= 1")
        if self.g_pa < 0:
            raise ValueError("g_pa must be >= 0")
        if self.nu_model not in NU_MODELS:
            raise ValueError(f"nu_model must be one of {NU_MODELS}")
        if self.mode not in ("discard", "retain"):
            raise ValueError("mode must be 'discard' or 'retain'")
        # delegate range checks
        self.channel

    @property
    def channel(self):
        return ChannelParams(self.alpha, self.r_c, self.r_d, self.eta, self.mu, self.m)

    @property
    def context(self):
        return replace(self.attack, mcs=self.mcs, medium=self.medium)

    def with_mu(self, mu):
        return replace(self, mu=mu)


@dataclass(frozen=True)
class SecrecyResult:
    S: float
    R: float
    terms: dict
    region: RegionClass
    f: float

    @property
    def viable(self):
        return self.S > 0


def f_factor(Q, T, mode="discard"):
    if Q < 0 or T < 0:
        raise ValueError("Q and T must be >= 0")
    if mode == "discard":
        return 1.0 + Q + T
    if mode == "retain":
        return Q + T
    raise ValueError("mode must be 'discard' or 'retain'")


def secrecy_rate(S, tau):
    if not tau > 0:
        raise ValueError("tau must be > 0")
    return S / tau


def multi_photon_subtraction(p: SystemParams):
    """Normalized nu (that is 2 nu / m)."""
    if not p.enemy or p.nu_model == "none":
        return 0.0
    if p.nu_model == "pyrrhic":
        return nu_pyrrhic(p.mu)
    if p.nu_model == "general":
        return nu_general(p.mu, p.eta, p.context)
    return nu_max_total(p.mu, p.eta, p.alpha, p.context)


def secrecy_capacity(p: SystemParams, T_override=None):
    ch = p.channel
    m = p.m
    q = detect_probability(ch, p.mcs)
    n = m / 2 * (q + p.r_d)
    e_T = m / 2 * (p.r_c * q + p.r_d / 2)
    region = region_classify(p.eta * p.alpha)
    if not p.enemy:
        # nothing leaks and nothing needs authenticating
        f = f_factor(0.0, 0.0, p.mode)
        S = 0.5 * (q * (1 - f * p.r_c) + (1 - f / 2) * p.r_d)
        terms = dict(n=n / m, e_T=e_T / m, q=0.0, t=0.0, nu=0.0, g_pa=0.0, a=0.0)
        return SecrecyResult(S, secrecy_rate(S, p.tau), terms, region, f)

    Q = leakage_ratio(p.x, e_T / n) if n > 0 else 0.0
    n1, e1 = single_photon_parts(ch)
    if T_override is not None:
        T = T_override
    elif n1 > 0 and 0 < e1 < n1:
        T = frontier(n1, e_T, e1, p.epsilon, p.exact_frontier).T
    else:
        T = 0.0
    f = f_factor(Q, T, p.mode)
    nu = multi_photon_subtraction(p)
    a = auth_total(n, m, p.auth) if n >= 2 else float(p.auth.g_EC_tilde)
    S = 0.5 * (q * (1 - f * p.r_c) + (1 - f / 2) * p.r_d - nu) - (p.g_pa + a) / m
    terms = dict(
        n=n / m,
        e_T=e_T / m,
        q=Q * e_T / m,
        t=T * e_T / m,
        nu=nu / 2,
        g_pa=p.g_pa / m,
        a=a / m,
    )
    return SecrecyResult(S, secrecy_rate(S, p.tau), terms, region, f)


def secrecy_capacity_limit(p: SystemParams):
    """Infinite-block capacity: no statistical margin and no per-block overhead."""
    n1, e1 = single_photon_parts(p.channel)
    T_inf = frontier_T_infinity(n1, e1)
    r = secrecy_capacity(replace(p, g_pa=0), T_override=T_inf)
    S = r.S + r.terms["a"]
    return SecrecyResult(S, secrecy_rate(S, p.tau), dict(r.terms, a=0.0), r.region, r.f)


@dataclass(frozen=True)
class Optimum:
    mu: float
    S: float
    R: float
    viable: bool


def optimize_mu(p: SystemParams, bracket=(1e-4, 2.0), grid=200):
    """Maximize S over mu.

    A coarse grid finds the best cell, then a bounded Brent search refines it.
    """
    lo, hi = bracket
    if not 0 < lo < hi <= 5:
        raise ValueError("bracket must satisfy 0 < lo < hi <= 5")

    def S(mu):
        return secrecy_capacity(p.with_mu(mu)).S

    mus = np.linspace(lo, hi, grid)
    vals = np.array([S(u) for u in mus])
    k = int(np.argmax(vals))
    a, b = mus[max(k - 1, 0)], mus[min(k + 1, grid - 1)]
    res = minimize_scalar(lambda u: -S(u), bounds=(a, b), method="bounded", options={"xatol": 1e-9})
    mu_opt, S_opt = float(res.x), -float(res.fun)
    if vals[k] > S_opt:
        mu_opt, S_opt = float(mus[k]), float(vals[k])
    return Optimum(mu_opt, S_opt, secrecy_rate(S_opt, p.tau), S_opt > 0)


def viability(p: SystemParams, bracket=(1e-4, 2.0)):
    return optimize_mu(p, bracket).viable


def reconstruction_residual(p: SystemParams):
    """n - (S m + f e_T + nu + g_pa + a), in bits."""
    r = secrecy_capacity(p)
    t = r.terms
    m = p.m
    return m * (t["n"] - r.S - r.f * t["e_T"] - t["nu"] - t["g_pa"] - t["a"])


def no_enemy_capacity(p: SystemParams):
    return secrecy_capacity(replace(p, enemy=False))


__all__ = [
    "SystemParams",
    "SecrecyResult",
    "Optimum",
    "f_factor",
    "secrecy_capacity",
    "secrecy_capacity_limit",
    "secrecy_rate",
    "optimize_mu",
    "viability",
]
