"""Simulation oracles: the quantum channel, reconciliation, and the hash functions."""

from dataclasses import dataclass
import csv
import math

import numpy as np

from qkdrate.auth_cost import wegman_carter_w
from qkdrate.loads import ECParams, ec_beta, ec_iterations
from qkdrate.sift_model import ChannelParams

# detector slots: 0 = Alice's bit, 1 = flipped bit, 2/3 = conjugate basis
RECORD_DTYPE = np.dtype(
    [
        ("index", np.int64),
        ("alice_basis", np.int8),
        ("alice_bit", np.int8),
        ("photons_emitted", np.int32),
        ("photons_arrived", np.int32),
        ("detector_clicks", np.uint8),
        ("dark_count", np.bool_),
        ("bob_basis", np.int8),
        ("bob_bit", np.int8),
    ]
)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class TransmissionResult:
    n_emp: int
    e_emp: int
    alice_sift: np.ndarray
    bob_sift: np.ndarray
    compatible_idx: np.ndarray
    incompatible_idx: np.ndarray
    records: np.ndarray | None


def _landing_probs(eta, r_c):
    return np.array([eta / 2 * (1 - r_c), eta / 2 * r_c, eta / 4, eta / 4, 1 - eta])


def simulate_transmission(p: ChannelParams, seed, mcs=False, keep_records=100_000, chunk=1 << 18):
    """Monte Carlo run over m bit cells.

    Records are kept only when m <= keep_records.
    """
    m = int(p.m)
    if m > 100_000_000:
        raise ValueError("m too large for the simulator")
    rng = make_rng(seed)
    probs = _landing_probs(p.eta, p.r_c)
    keep = m <= keep_records
    recs, a_s, b_s, comp, incomp = [], [], [], [], []
    n_emp = e_emp = 0
    for start in range(0, m, chunk):
        size = min(chunk, m - start)
        idx = np.arange(start, start + size)
        basis = rng.integers(0, 2, size, dtype=np.int8)
        bit = rng.integers(0, 2, size, dtype=np.int8)
        emitted = rng.poisson(p.mu, size)
        arrived = rng.binomial(emitted, p.alpha)
        counts = rng.multinomial(arrived, probs)[:, :4]
        det_total = counts.sum(axis=1)
        clicks = counts > 0

        # Bob reads the detector of one detected photon, chosen uniformly
        u = rng.random(size) * det_total
        cum = np.cumsum(counts, axis=1)
        chosen = np.where(det_total > 0, (u[:, None] >= cum).sum(axis=1), -1)

        dark = rng.random(size) < p.r_d
        dark_det = rng.integers(0, 4, size)
        clicks[np.arange(size)[dark], dark_det[dark]] = True
        chosen = np.where((chosen < 0) & dark, dark_det, chosen)

        if mcs:
            chosen = np.where(clicks.sum(axis=1) == 1, chosen, -1)
        fired = chosen >= 0
        sifted = fired & (chosen <= 1)
        bob_bit = np.where(chosen == 1, 1 - bit, np.where(chosen == 0, bit, rng.integers(0, 2, size)))
        n_emp += int(sifted.sum())
        e_emp += int((sifted & (chosen == 1)).sum())
        a_s.append(bit[sifted])
        b_s.append(bob_bit[sifted].astype(np.int8))
        comp.append(idx[sifted])
        incomp.append(idx[fired & (chosen >= 2)])
        if keep:
            r = np.zeros(size, RECORD_DTYPE)
            r["index"] = idx
            r["alice_basis"] = basis
            r["alice_bit"] = bit
            r["photons_emitted"] = emitted
            r["photons_arrived"] = arrived
            r["detector_clicks"] = (clicks * (1 << np.arange(4))).sum(axis=1)
            r["dark_count"] = dark
            r["bob_basis"] = np.where(fired, np.where(chosen <= 1, basis, 1 - basis), -1)
            r["bob_bit"] = np.where(fired, bob_bit, -1)
            recs.append(r)
    return TransmissionResult(
        n_emp,
        e_emp,
        np.concatenate(a_s) if a_s else np.zeros(0, np.int8),
        np.concatenate(b_s) if b_s else np.zeros(0, np.int8),
        np.concatenate(comp) if comp else np.zeros(0, np.int64),
        np.concatenate(incomp) if incomp else np.zeros(0, np.int64),
        np.concatenate(recs) if keep and recs else None,
    )


# ---------------------------------------------------------- reconciliation

@dataclass
class ECResult:
    alice: np.ndarray
    bob: np.ndarray
    parity_bits_exchanged: int
    N1_obs: int
    N2n_obs: int
    N2f_obs: int
    residual_errors: int


def _bisect(diff, positions):
    """Locate one error inside a block with odd error parity.

    Returns (position, parity bits spent).
    """
    spent = 0
    pos = positions
    while len(pos) > 1:
        half = pos[: len(pos) // 2]
        spent += 1
        pos = half if diff[half].sum() % 2 else pos[len(pos) // 2 :]
    return int(pos[0]), spent


def run_error_correction(alice, bob, p: ECParams, seed):
    """Block-parity search followed by random-subset validation.

    Both parties share the seeded permutations and subsets, so only parity
    bits cross the channel; every one of them is counted.
    """
    alice = np.asarray(alice, np.int8)
    bob = np.asarray(bob, np.int8).copy()
    if alice.shape != bob.shape:
        raise ValueError("strings must have equal length")
    n = len(alice)
    rng = make_rng(seed)
    diff = alice ^ bob
    bits = 0
    # block counts follow the expected error decay, not the errors actually found
    beta = ec_beta(p.rho)
    n1 = ec_iterations(p.rho, p.e_T0)
    for i in range(1, n1 + 1):
        J = math.ceil(beta ** (i - 1) * p.e_T0 / p.rho)
        order = rng.permutation(n)
        blocks = np.array_split(order, min(J, n))
        bits += len(blocks)
        for blk in blocks:
            if diff[blk].sum() % 2:
                at, spent = _bisect(diff, blk)
                bits += spent
                diff[at] ^= 1
    clean = hits = streak = 0
    while streak < p.N2:
        subset = np.flatnonzero(rng.random(n) < 0.5)
        bits += 1
        if len(subset) and diff[subset].sum() % 2:
            at, spent = _bisect(diff, subset)
            bits += spent
            diff[at] ^= 1
            hits += 1
            streak = 0
        else:
            clean += 1
            streak += 1
    bob = alice ^ diff
    return ECResult(alice, bob, bits, n1, clean, hits, int(diff.sum()))


def inject_errors(bits, count, rng):
    out = np.asarray(bits, np.int8).copy()
    at = rng.choice(len(out), size=count, replace=False)
    out[at] ^= 1
    return out


TRACE_COLUMNS = ("trial", "n_emp", "e_emp", "parity_bits", "N1_obs", "N2n_obs", "N2f_obs", "residual")


def run_ec_trials(n, n_errors, p: ECParams, trials, seed):
    """Independent reconciliation runs on random strings; one trace row per trial."""
    rows = []
    for t, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = make_rng(child)
        alice = rng.integers(0, 2, n, dtype=np.int8)
        bob = inject_errors(alice, n_errors, rng)
        r = run_error_correction(alice, bob, p, child.spawn(1)[0])
        rows.append(dict(trial=t, n_emp=n, e_emp=n_errors, parity_bits=r.parity_bits_exchanged,
                         N1_obs=r.N1_obs, N2n_obs=r.N2n_obs, N2f_obs=r.N2f_obs, residual=r.residual_errors))
    return rows


def write_trace_csv(rows, fh):
    w = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in TRACE_COLUMNS})


# ------------------------------------------------------------------ hashing

def _bits_to_int(bits):
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def wc_sub_hash_size(g, c):
    return math.ceil(g + math.log2(math.log2(c)))


def wc_key_length(g, c):
    return math.ceil(wegman_carter_w(g, c))


def wc_auth_tag(message, key, g):
    """Tree hash of the message down to s bits; the tag is its low g bits.

    Every level hashes 2s-bit blocks to s bits with one multiply-shift map
    ((a x + b) mod 2^2s) >> s, a odd, drawing 4s fresh key bits per level.
    """
    c = len(message)
    if c < 4:
        raise ValueError("message must have at least 4 bits")
    if len(key) != wc_key_length(g, c):
        raise ValueError(f"key must have {wc_key_length(g, c)} bits, got {len(key)}")
    s = wc_sub_hash_size(g, c)
    if g > s:
        raise ValueError("tag longer than sub-hash output")
    val, length = _bits_to_int(message), c
    off = 0
    mask2 = (1 << 2 * s) - 1
    while length > s:
        if off + 4 * s > len(key):
            raise ValueError("key exhausted")
        a = _bits_to_int(key[off : off + 2 * s]) | 1
        b = _bits_to_int(key[off + 2 * s : off + 4 * s])
        off += 4 * s
        nblk = -(-length // (2 * s))
        val <<= nblk * 2 * s - length
        out = 0
        for j in range(nblk):
            x = (val >> ((nblk - 1 - j) * 2 * s)) & mask2
            out = (out << s) | ((((a * x + b) & mask2)) >> s)
        val, length = out, nblk * s
    tag = val & ((1 << g) - 1)
    return [(tag >> (g - 1 - i)) & 1 for i in range(g)]


def cw_affine_pa_hash(x, M, P, out_bits, w=64):
    """M*x + P over little-endian w-bit word arrays, returning the low out_bits.

    One row of partial products per multiplier word, then a column sum with
    an overflow count carried into the next column.
    """
    N = len(x)
    if len(M) != N or len(P) != N:
        raise ValueError("x, M and P must have the same word count")
    if out_bits > N * w:
        raise ValueError("out_bits exceeds input length")
    mask = (1 << w) - 1
    row_len = 2 * N + 1
    rows = [[0] * row_len for _ in range(N)]
    for i, mp in enumerate(M):
        row = rows[i]
        for j, mc in enumerate(x):
            lo = i + j
            prod = mc * mp
            t = (prod & mask) + row[lo]
            row[lo] = t & mask
            hi = (prod >> w) + (t >> w) + row[lo + 1]
            row[lo + 1] = hi & mask
            row[lo + 2] += hi >> w
    out = [0] * row_len
    carry = 0
    for col in range(row_len):
        total = carry + (P[col] if col < N else 0) + sum(r[col] for r in rows)
        out[col] = total & mask
        carry = total >> w
    val = 0
    for k in reversed(range(row_len)):
        val = (val << w) | out[k]
    return val & ((1 << out_bits) - 1)


def words_from_int(v, N, w=64):
    mask = (1 << w) - 1
    return [(v >> (w * k)) & mask for k in range(N)]


def derive_pa_key_from_sift(result: TransmissionResult, order="compatible_first"):
    """Index parities of compatible and of incompatible cells, concatenated."""
    def parities(idx):
        return np.array([bin(int(i)).count("1") & 1 for i in idx], np.int8)

    comp = parities(result.compatible_idx)
    incomp = parities(result.incompatible_idx)
    if order == "compatible_first":
        return np.concatenate([comp, incomp])
    if order == "incompatible_first":
        return np.concatenate([incomp, comp])
    raise ValueError("order must be 'compatible_first' or 'incompatible_first'")
