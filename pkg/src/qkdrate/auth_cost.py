"""Continuous-authentication key cost with Wegman-Carter tags."""

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class AuthParams:
    g_auth: int = 30
    g_EC: int = 30
    g_EC_tilde: int = 30

    def __post_init__(self):
        for name in ("g_auth", "g_EC", "g_EC_tilde"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")


MIN_MESSAGE = 4


def _padded(c):
    # messages shorter than the smallest hashable length are padded up to it
    return max(c, MIN_MESSAGE)


def wegman_carter_w(g, c):
    """Secret-index bits needed to tag a c-bit message with a g-bit tag."""
    if c < 4:
        raise ValueError(f"message length must be >= 4 bits, got {c!r}")
    if g < 1:
        raise ValueError("tag length must be >= 1")
    lc = math.log2(c)
    return 4.0 * (g + math.log2(lc)) * lc


def auth_message_costs(n, m, p: AuthParams = AuthParams()):
    """Lengths of the five authenticated messages per block (bits)."""
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 and m >= 2")
    return (2 * n * (1 + math.log2(m)), 2 * n, n, p.g_EC, p.g_EC_tilde)


def auth_total(n, m, p: AuthParams = AuthParams()):
    """Secret bits consumed per block by continuous authentication."""
    c1, c2, c3, c4, c5 = (_padded(c) for c in auth_message_costs(n, m, p))
    return (
        p.g_EC_tilde
        + wegman_carter_w(p.g_auth, c1)
        + wegman_carter_w(p.g_auth, c2)
        + wegman_carter_w(p.g_EC, c3)
        + wegman_carter_w(p.g_auth, c4)
        + wegman_carter_w(p.g_auth, c5)
    )


def auth_over_m_limit_check(n_of_m, m_grid):
    """Largest a/m over the grid; n_of_m maps m to the sifted size."""
    ms = list(m_grid)
    if any(b <= a for a, b in zip(ms, ms[1:])):
        raise ValueError("m_grid must be increasing")
    return max(auth_total(n_of_m(m), m) / m for m in ms)


def _dw_dc(g, c):
    if c < MIN_MESSAGE:
        return 0.0
    lc = math.log2(c)
    return 4.0 / (c * math.log(2)) * (g + math.log2(lc) + 1.0 / math.log(2))


def auth_total_dn(n, m, p: AuthParams = AuthParams()):
    """Derivative of auth_total with respect to n."""
    c1, c2, c3, _, _ = auth_message_costs(n, m, p)
    return (
        _dw_dc(p.g_auth, c1) * 2 * (1 + math.log2(m))
        + _dw_dc(p.g_auth, c2) * 2
        + _dw_dc(p.g_EC, c3)
    )
