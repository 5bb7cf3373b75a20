"""Classical-channel and processor loads for sifting, reconciliation and privacy amplification."""

from dataclasses import dataclass
import math

from qkdrate.auth_cost import AuthParams
from qkdrate.privacy_amp import binary_entropy


@dataclass(frozen=True)
class ECParams:
    """rho: target errors per parity block; N2: clean validation rounds required."""

    n: float
    e_T0: float
    rho: float = 0.5
    N2: int = 30

    def __post_init__(self):
        if not 0 < self.rho <= 2:
            raise ValueError("rho must lie in (0, 2]")
        if self.N2 < 1:
            raise ValueError("N2 must be >= 1")
        if not 0 <= self.e_T0 < self.n:
            raise ValueError("need 0 <= e_T0 < n")


@dataclass(frozen=True)
class CommParams:
    m_p: int = 1000
    f_o: int = 400
    chi_EC: float = 2.0

    def __post_init__(self):
        if self.m_p < 1 or self.f_o < 0 or self.chi_EC < 1:
            raise ValueError("need m_p >= 1, f_o >= 0, chi_EC >= 1")

    def check_tags(self, tags: AuthParams):
        longest = max(tags.g_auth, tags.g_EC, tags.g_EC_tilde)
        if self.m_p < 2 * self.chi_EC * longest:
            raise ValueError("packet payload too small to carry a tag pair")

    @property
    def frame_factor(self):
        return 1.0 + self.f_o / self.m_p


@dataclass(frozen=True)
class ComputeParams:
    w: int = 64
    L0: float = 1e6

    def __post_init__(self):
        if self.w not in (32, 64):
            raise ValueError("w must be 32 or 64")


@dataclass(frozen=True)
class ECStatistics:
    beta: float
    N1: int
    e_T: tuple
    e_f: tuple
    J: tuple
    k: tuple
    e_Tr: float
    N2n: float
    N2f: float
    p_resid_bound: float


def ec_beta(rho):
    return (2 * rho - 1 + math.exp(-2 * rho)) / (2 * rho)


def ec_iterations(rho, e_T0):
    if e_T0 <= 2 * rho:
        return 0
    beta = ec_beta(rho)
    return math.ceil(math.log2(2 * rho / e_T0) / math.log2(beta))


def ec_statistics(p: ECParams):
    beta = ec_beta(p.rho)
    N1 = ec_iterations(p.rho, p.e_T0)
    e_T = tuple(beta**i * p.e_T0 for i in range(N1 + 1))
    e_f = tuple((1 - beta) * beta ** (i - 1) * p.e_T0 for i in range(1, N1 + 1))
    J = tuple(e_T[i - 1] / p.rho for i in range(1, N1 + 1))
    k = tuple(p.n / j for j in J)
    return ECStatistics(
        beta=beta,
        N1=N1,
        e_T=e_T,
        e_f=e_f,
        J=J,
        k=k,
        e_Tr=2 * p.rho,
        N2n=p.N2 + 2 * p.rho,
        N2f=2 * p.rho,
        p_resid_bound=math.exp(2 * p.rho) * 2.0 ** (-p.N2),
    )


def validation_counts_exact(N2, l):
    """Expected (clean, error-finding) validation rounds starting from l residual errors.

    A random-subset parity exposes a nonempty error set with probability 1/2,
    and each hit removes one error.
    """
    A = 1.0 - 2.0 ** (-N2)
    clean = A**l * N2 + A * (1 - A**l) / (1 - A)
    found = (2.0**N2 - 1) * (1 - A**l)
    return clean, found


def _sum_logk_ef(p: ECParams, beta, N1):
    if N1 == 0:
        return 0.0
    lb = math.log2(beta)
    return p.e_T0 * (
        math.log2(p.rho * p.n / p.e_T0) * (1 - beta**N1)
        - beta * lb / (1 - beta) * (1 - N1 * beta ** (N1 - 1) + (N1 - 1) * beta**N1)
    )


def _bisect_len(n):
    return math.ceil(1 + math.log2(n / 2))


def ec_parity_leakage(p: ECParams):
    """Parity bits disclosed by reconciliation (one direction)."""
    beta = ec_beta(p.rho)
    N1 = ec_iterations(p.rho, p.e_T0)
    phase1 = 0.0
    if N1 > 0:
        phase1 = 2 * (p.e_T0 - 2 * p.rho) / (1 - math.exp(-2 * p.rho)) + _sum_logk_ef(p, beta, N1)
    return phase1 + (p.N2 + 2 * p.rho) + 2 * p.rho * _bisect_len(p.n)


def ec_leakage_minimum(p: ECParams):
    return p.n * float(binary_entropy(p.e_T0 / p.n))


def packetized_size(message_bits, c: CommParams, mode="exact"):
    if message_bits < 1:
        raise ValueError("message must have at least one bit")
    if mode == "approx":
        return c.frame_factor * c.chi_EC * message_bits
    if mode != "exact":
        raise ValueError("mode must be 'exact' or 'approx'")
    coded = c.chi_EC * message_bits
    full = math.floor(coded / c.m_p)
    rest = coded - full * c.m_p
    return (c.m_p + c.f_o) * full + rest + (c.f_o if rest > 0 else 0)


@dataclass(frozen=True)
class CommLoad:
    C_BA: float
    C_AB: float
    R_BA: float
    R_AB: float


def comm_load(n, m, p: ECParams, c: CommParams = CommParams(), tags: AuthParams = AuthParams(), tau=1e-10):
    """Bits each way per block, and the throughput they need at cell period tau."""
    c.check_tags(tags)
    ff, chi = c.frame_factor, c.chi_EC
    st = ec_statistics(p)
    ec = 0.0
    for J, k, ef in zip(st.J, st.k, st.e_f):
        ec += ff * chi * J + math.ceil(math.log2(k)) * ff * chi * ef
    ec += st.N2n * (chi + c.f_o) + st.N2f * _bisect_len(n) * (chi + c.f_o)
    auth_msg = chi * tags.g_auth + c.f_o
    C_BA = ff * chi * 2 * n * (1 + math.log2(m)) + auth_msg + ec + chi * (tags.g_EC + tags.g_auth) + c.f_o
    C_AB = ff * chi * 2 * n + auth_msg + ec + chi * (tags.g_EC_tilde + tags.g_auth) + c.f_o
    return CommLoad(C_BA, C_AB, C_BA / (m * tau), C_AB / (m * tau))


HASH_OPS = 110
BIT_OPS = 25


def hash_applications(g, c):
    """Rough count of sub-hash evaluations for a c-bit message."""
    return c / (g + math.log2(math.log2(c)))


@dataclass(frozen=True)
class CompLoad:
    ops: float
    quadratic: float
    rate: float


def comp_load(n, m, p: ECParams, cp: ComputeParams = ComputeParams(), tags: AuthParams = AuthParams(), tau=1e-10, exact=False):
    """Processor operations per block.

    exact=False uses the collected upper bound that drops the double logs;
    exact=True sums the itemized per-step terms.
    """
    st = ec_statistics(p)
    N1, N2s = st.N1, st.N2n + st.N2f
    w = cp.w
    quad = 46 * n**2 / w**2
    if n <= 0:
        return CompLoad(cp.L0, 0.0, cp.L0 / (m * tau))
    if not exact:
        ops = (
            cp.L0
            + (50 + 220 / tags.g_auth) * n * (1 + math.log2(m))
            + (
                200 + 25 * N1 + 12.5 * (1 - math.exp(-2 * p.rho)) * N1 + 25 * p.rho + 37.5 * N2s
                + 43 / w + 220 / tags.g_auth + 110 / tags.g_EC
            ) * n
            + quad
        )
    else:
        c1 = 2 * n * (1 + math.log2(m))
        ops = (
            cp.L0
            + BIT_OPS * c1
            + HASH_OPS * hash_applications(tags.g_auth, c1)
            + BIT_OPS * 2 * n
            + HASH_OPS * hash_applications(tags.g_auth, 2 * n)
            + BIT_OPS * 2 * n
            + BIT_OPS * n
            + N1 * BIT_OPS * n
            + 12.5 * (1 - math.exp(-2 * p.rho)) * N1 * n
            + N2s * BIT_OPS * n
            + N2s * BIT_OPS * n / 2
            + st.e_Tr * BIT_OPS * n / 2
            + BIT_OPS * n
            + HASH_OPS * hash_applications(tags.g_EC, n)
            + BIT_OPS * 2 * n
            + 43 * n / w
            + quad
        )
    return CompLoad(ops, quad, ops / (m * tau))


@dataclass(frozen=True)
class MultiplexPlan:
    B_ceiling: float
    copies: int
    r: float
    R_single: float
    R_multiplexed: float


def multiplex_plan(C_ceiling, a1, R_of_B, b):
    """Split a quadratic-cost block into smaller parallel blocks.

    C_ceiling is the operation budget per block time and a1 the quadratic
    coefficient, so B_ceiling is the largest block the processor can take.
    """
    if not 0 < b < 1:
        raise ValueError("b must lie in (0, 1)")
    if C_ceiling <= 0 or a1 <= 0:
        raise ValueError("C_ceiling and a1 must be > 0")
    B = math.sqrt(C_ceiling / a1)
    R_single = R_of_B(B)
    r = R_of_B(b * B) / R_single if R_single else 0.0
    copies = math.floor(b**-2)
    return MultiplexPlan(B, copies, r, R_single, b**-2 * r * R_single)
