"""Index-modulation codec: MAP/CAP pattern counting, (un)ranking, sub-block and frame mapping."""
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from mmafdm.core import DEFAULT_C2, DaftParams, default_c1


def count_patterns(M, n, k):
    """Return ``(n_map, n_cap, b1)`` for ``k``-of-``M`` modes over ``n`` chirps.

    ``b1 = floor(log2(n_map * n_cap))`` is taken from the integer bit length.
    """
    if not (1 <= k <= M):
        raise ValueError(f"need 1 <= k <= M, got k={k}, M={M}")
    if n < 1 or n % k:
        raise ValueError(f"n must be a positive multiple of k, got n={n}, k={k}")
    n_map = comb(M, k)
    n_cap = factorial(n) // factorial(n // k) ** k
    b1 = (n_map * n_cap).bit_length() - 1
    return n_map, n_cap, b1


@dataclass(frozen=True)
class SystemParams:
    """Frame layout: ``N`` chirps in ``G`` sub-blocks, ``k`` of ``M`` modes active, ``U`` points per mode."""

    N: int
    G: int
    M: int
    k: int
    U: int
    c1: float = None
    c2: float = DEFAULT_C2
    alpha_max: float = 1.0
    n: int = field(init=False)
    n_map: int = field(init=False)
    n_cap: int = field(init=False)
    b1: int = field(init=False)
    b2: int = field(init=False)

    def __post_init__(self):
        N, G, M, k, U = self.N, self.G, self.M, self.k, self.U
        if G < 1 or N % G:
            raise ValueError(f"N={N} is not divisible into G={G} sub-blocks")
        if U < 2 or U & (U - 1):
            raise ValueError(f"U must be a power of two >= 2, got {U}")
        n = N // G
        n_map, n_cap, b1 = count_patterns(M, n, k)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "n_map", n_map)
        object.__setattr__(self, "n_cap", n_cap)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", n * (U.bit_length() - 1))
        if self.c1 is None:
            object.__setattr__(self, "c1", default_c1(N, self.alpha_max))

    @property
    def b(self):
        return self.b1 + self.b2

    @property
    def B(self):
        return self.G * self.b

    @property
    def spectral_efficiency(self):
        return self.B / self.N

    @property
    def daft(self):
        return DaftParams(self.N, self.c1, self.c2)

    @property
    def codebook(self):
        return SubBlockCodebook(self.n_map, self.n_cap, self.b1)


@dataclass(frozen=True)
class SubBlockCodebook:
    n_map: int
    n_cap: int
    b1: int

    @property
    def valid_index_count(self):
        return 1 << self.b1


@dataclass(frozen=True, eq=False)
class SubBlockState:
    """One encoded sub-block.

    ``mode_assignment`` and ``symbol_positions`` are 0-based (mode index, point
    position within that mode) per chirp; ``symbols`` are the complex values.
    """

    i_map: int
    i_cap: int
    mode_assignment: tuple
    symbol_positions: tuple
    symbols: np.ndarray


def split_index(d, n_map, b1=None):
    """``d = i_map + n_map * i_cap`` -> ``(i_map, i_cap)``."""
    if d < 0 or (b1 is not None and d >= 1 << b1):
        raise ValueError(f"pattern index {d} out of range")
    return d % n_map, d // n_map


def unrank_map(i_map, M, k):
    """The ``i_map``-th k-subset of ``{1..M}`` in lexicographic order."""
    total = comb(M, k)
    if not 0 <= i_map < total:
        raise ValueError(f"MAP index {i_map} outside [0, {total})")
    out = []
    v = 1
    r = i_map
    for slot in range(k, 0, -1):
        while True:
            c = comb(M - v, slot - 1)
            if r < c:
                break
            r -= c
            v += 1
        out.append(v)
        v += 1
    return out


def rank_map(modes, M, k):
    """Inverse of :func:`unrank_map` for a sorted list of 1-based mode indices."""
    modes = list(modes)
    if len(modes) != k or sorted(set(modes)) != modes or modes[0] < 1 or modes[-1] > M:
        raise ValueError(f"{modes} is not a sorted {k}-subset of 1..{M}")
    r = 0
    prev = 0
    for slot, v in enumerate(modes):
        for u in range(prev + 1, v):
            r += comb(M - u, k - slot - 1)
        prev = v
    return r


def _multiset_perm_count(counts):
    total = factorial(sum(counts))
    for c in counts:
        total //= factorial(c)
    return total


def unrank_cap(i_cap, n, k):
    """The ``i_cap``-th lexicographic permutation of ``{1 x n/k, ..., k x n/k}``."""
    total = factorial(n) // factorial(n // k) ** k
    if n % k or not 0 <= i_cap < total:
        raise ValueError(f"CAP index {i_cap} outside [0, {total})")
    counts = [n // k] * k
    out = []
    r = i_cap
    for _ in range(n):
        for sym in range(k):
            if counts[sym] == 0:
                continue
            counts[sym] -= 1
            c = _multiset_perm_count(counts)
            if r < c:
                out.append(sym + 1)
                break
            r -= c
            counts[sym] += 1
    return out


def rank_cap(arrangement, n, k):
    """Inverse of :func:`unrank_cap`; rejects anything but a balanced arrangement."""
    arrangement = list(arrangement)
    if len(arrangement) != n or any(arrangement.count(j) != n // k for j in range(1, k + 1)):
        raise ValueError(f"{arrangement} does not use each of 1..{k} exactly {n // k} times")
    counts = [n // k] * k
    r = 0
    for sym in arrangement:
        for smaller in range(sym - 1):
            if counts[smaller]:
                counts[smaller] -= 1
                r += _multiset_perm_count(counts)
                counts[smaller] += 1
        counts[sym - 1] -= 1
    return r


def gray(v):
    return v ^ (v >> 1)


def gray_inverse(g):
    v = 0
    while g:
        v ^= g
        g >>= 1
    return v


def bits_to_int(bits):
    v = 0
    for bit in bits:
        v = (v << 1) | int(bit)
    return v


def int_to_bits(v, width):
    return [(v >> (width - 1 - i)) & 1 for i in range(width)]


def encode_subblock(bits, ms, sp):
    """Map ``b`` bits (``b1`` index bits MSB-first, then ``b2`` symbol bits) to a sub-block."""
    bits = [int(x) for x in bits]
    if len(bits) != sp.b or any(x not in (0, 1) for x in bits):
        raise ValueError(f"expected {sp.b} bits, got {len(bits)}")
    if ms.M != sp.M or ms.U != sp.U:
        raise ValueError("mode set does not match system parameters")
    d = bits_to_int(bits[:sp.b1])
    i_map, i_cap = split_index(d, sp.n_map, sp.b1)
    active = unrank_map(i_map, sp.M, sp.k)
    arrangement = unrank_cap(i_cap, sp.n, sp.k)
    q = sp.U.bit_length() - 1
    sym_bits = bits[sp.b1:]
    modes, positions = [], []
    for i, slot in enumerate(arrangement):
        mode = active[slot - 1] - 1
        pos = gray_inverse(bits_to_int(sym_bits[i * q:(i + 1) * q]))
        modes.append(mode)
        positions.append(pos)
    symbols = ms.points[modes, positions]
    return SubBlockState(i_map, i_cap, tuple(modes), tuple(positions), symbols)


def _nearest_position(ms, mode, value):
    return int(np.argmin(np.abs(ms.points[mode] - value)))


def decode_subblock(state, ms, sp):
    """Exact inverse of :func:`encode_subblock`.

    The symbol positions are re-derived from ``state.symbols`` (nearest point
    of the assigned mode), so a state rebuilt from a detected vector decodes too.
    """
    modes = [int(m) for m in state.mode_assignment]
    if len(modes) != sp.n:
        raise ValueError(f"mode assignment has {len(modes)} chirps, expected {sp.n}")
    active = sorted(set(modes))
    if len(active) != sp.k:
        raise ValueError(f"{len(active)} distinct modes in sub-block, expected {sp.k}")
    i_map = rank_map([m + 1 for m in active], sp.M, sp.k)
    i_cap = rank_cap([active.index(m) + 1 for m in modes], sp.n, sp.k)
    d = i_map + sp.n_map * i_cap
    if d >= 1 << sp.b1:
        raise ValueError(f"pattern index {d} is not addressable with {sp.b1} index bits")
    q = sp.U.bit_length() - 1
    bits = int_to_bits(d, sp.b1)
    for mode, value in zip(modes, np.asarray(state.symbols)):
        bits += int_to_bits(gray(_nearest_position(ms, mode, value)), q)
    return bits


def state_from_vector(x_g, ms, sp):
    """Recover the sub-block state of a vector whose symbols lie in the mode set."""
    x_g = np.asarray(x_g, dtype=np.complex128)
    flat = ms.points.ravel()
    idx = [int(np.argmin(np.abs(flat - v))) for v in x_g]
    modes = tuple(i // ms.U for i in idx)
    positions = tuple(i % ms.U for i in idx)
    active = sorted(set(modes))
    i_map = rank_map([m + 1 for m in active], sp.M, sp.k) if len(active) == sp.k else -1
    i_cap = rank_cap([active.index(m) + 1 for m in modes], sp.n, sp.k) if i_map >= 0 else -1
    return SubBlockState(i_map, i_cap, modes, positions, x_g)


def assemble_frame(bit_stream, ms, sp):
    """Concatenate the ``G`` encoded sub-blocks of a ``B``-bit stream into a length-``N`` vector."""
    bits = [int(x) for x in bit_stream]
    if len(bits) != sp.B:
        raise ValueError(f"expected {sp.B} bits, got {len(bits)}")
    return np.concatenate([
        encode_subblock(bits[g * sp.b:(g + 1) * sp.b], ms, sp).symbols for g in range(sp.G)
    ])


def disassemble_frame(x, ms, sp):
    """Bits of a frame vector (inverse of :func:`assemble_frame`)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (sp.N,):
        raise ValueError(f"expected a length-{sp.N} vector")
    bits = []
    for g in range(sp.G):
        bits += decode_subblock(state_from_vector(x[g * sp.n:(g + 1) * sp.n], ms, sp), ms, sp)
    return bits


@lru_cache(maxsize=32)
def _pattern_tables(M, n, k, n_map, b1):
    """Mode assignment per pattern index ``d < 2^b1`` and the reverse map keyed by base-``M`` digits."""
    assign = np.empty((1 << b1, n), dtype=np.int64)
    for d in range(1 << b1):
        i_map, i_cap = d % n_map, d // n_map
        active = unrank_map(i_map, M, k)
        assign[d] = [active[slot - 1] - 1 for slot in unrank_cap(i_cap, n, k)]
    reverse = np.full(M ** n, -1, dtype=np.int64)
    reverse[assign @ (M ** np.arange(n - 1, -1, -1))] = np.arange(1 << b1)
    assign.setflags(write=False)
    reverse.setflags(write=False)
    return assign, reverse


def _gray_tables(U):
    v = np.arange(U)
    g = v ^ (v >> 1)
    inv = np.empty(U, dtype=np.int64)
    inv[g] = v
    return g, inv


def encode_words(words, ms, sp):
    """Vectorised :func:`encode_subblock` on integer words ``0 <= w < 2^b``; returns ``(F, n)`` symbols."""
    words = np.asarray(words, dtype=np.int64)
    if words.size and (words.min() < 0 or words.max() >= 1 << sp.b):
        raise ValueError(f"sub-block words must lie in [0, 2^{sp.b})")
    assign, _ = _pattern_tables(sp.M, sp.n, sp.k, sp.n_map, sp.b1)
    q = sp.U.bit_length() - 1
    _, ginv = _gray_tables(sp.U)
    shifts = q * np.arange(sp.n - 1, -1, -1)
    pos = ginv[(words[:, None] >> shifts) & (sp.U - 1)]
    return ms.points[assign[words >> sp.b2], pos]


def decode_words(X, ms, sp):
    """Vectorised inverse of :func:`encode_words`.

    Each entry is snapped to the nearest point of the full mode set; rows whose
    mode pattern is not addressable decode to -1.
    """
    X = np.asarray(X, dtype=np.complex128)
    flat = ms.points.ravel()
    idx = np.argmin(np.abs(X[..., None] - flat), axis=-1)
    modes, pos = idx // ms.U, idx % ms.U
    _, reverse = _pattern_tables(sp.M, sp.n, sp.k, sp.n_map, sp.b1)
    d = reverse[modes @ (sp.M ** np.arange(sp.n - 1, -1, -1))]
    g, _ = _gray_tables(sp.U)
    q = sp.U.bit_length() - 1
    sym = (g[pos] << (q * np.arange(sp.n - 1, -1, -1))).sum(axis=-1)
    return np.where(d >= 0, (d << sp.b2) | sym, -1)


@lru_cache(maxsize=32)
def _subblock_table(ms, sp):
    table = encode_words(np.arange(1 << sp.b), ms, sp)
    table.setflags(write=False)
    return table


def subblock_table(ms, sp):
    """All ``2^b`` sub-block vectors, row ``v`` encoding the bit word with integer value ``v``."""
    return _subblock_table(ms, sp)


def modulate(words, ms, sp):
    """Vectorised frame mapping for a batch of per-sub-block integer words, shape ``(F, G)``."""
    words = np.asarray(words, dtype=np.int64)
    table = subblock_table(ms, sp)
    return table[words].reshape(words.shape[0], sp.N)


def words_to_bits(words, b):
    """Expand integer words ``(F, G)`` into a bit array ``(F, G * b)``, MSB first."""
    words = np.asarray(words, dtype=np.int64)
    shifts = np.arange(b - 1, -1, -1)
    return ((words[..., None] >> shifts) & 1).reshape(words.shape[0], -1).astype(np.uint8)
