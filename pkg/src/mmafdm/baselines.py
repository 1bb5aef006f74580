"""Reimplemented comparison schemes: classical AFDM and chirp-activation AFDM-IM.

Every scheme exposes the same small surface used by the sweep engine:
``N``, ``B``, ``daft``, ``frames(values)`` (integer bit patterns -> DAF-domain
frames) and ``groups`` (candidate split for the exhaustive ML search, ordered by
bit value).
"""
from functools import cached_property
from itertools import product
from math import comb

import numpy as np

from mmafdm.codec import gray_inverse, unrank_map
from mmafdm.core import DEFAULT_C2, DaftParams, default_c1
from mmafdm.detector import DEFAULT_BUDGET, BudgetExceeded, CandidateGroup, frames_from_values, mm_candidate_groups


def gray_qam(order):
    """Unit-energy rectangular QAM indexed by bit value; I and Q carry separate Gray labels."""
    if order == 2:
        return np.array([-1.0 + 0j, 1.0 + 0j])
    m = order.bit_length() - 1
    n_i, n_q = 1 << ((m + 1) // 2), 1 << (m // 2)
    qq = m // 2
    pts = np.empty(order, dtype=np.complex128)
    for v in range(order):
        gi = gray_inverse(v >> qq)
        gq = gray_inverse(v & ((1 << qq) - 1))
        pts[v] = complex(2 * gi - (n_i - 1), 2 * gq - (n_q - 1))
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


class MMAFDMIM:
    name = "MM_AFDM_IM"

    def __init__(self, sp, ms, budget=DEFAULT_BUDGET):
        self.sp, self.ms, self.budget = sp, ms, budget
        self.N, self.B, self.daft = sp.N, sp.B, sp.daft

    def frames(self, values):
        return frames_from_values(values, self.ms, self.sp)

    @cached_property
    def groups(self):
        return mm_candidate_groups(self.ms, self.sp, self.budget)


class ClassicalAFDM:
    """Every chirp carries one Gray-labelled ``order``-QAM symbol; no index bits."""

    name = "AFDM"

    def __init__(self, N, order, c1=None, c2=DEFAULT_C2, alpha_max=1.0, budget=DEFAULT_BUDGET):
        if order < 2 or order & (order - 1):
            raise ValueError("constellation order must be a power of two")
        self.N, self.order = N, order
        self.q = order.bit_length() - 1
        self.B = N * self.q
        self.budget = budget
        self.daft = DaftParams(N, default_c1(N, alpha_max) if c1 is None else c1, c2)
        self.points = gray_qam(order)

    def frames(self, values):
        values = np.asarray(values, dtype=np.int64)
        mask = self.order - 1
        idx = np.stack([(values >> (self.q * (self.N - 1 - i))) & mask for i in range(self.N)], axis=1)
        return self.points[idx]

    @cached_property
    def groups(self):
        if self.B > 62 or (1 << self.B) > self.budget:
            raise BudgetExceeded(f"2^{self.B} AFDM candidates exceed the budget of {self.budget}")
        h = self.N // 2
        t = self.N - h
        head = np.zeros((self.order ** h, self.N), dtype=np.complex128)
        for r, combo in enumerate(product(range(self.order), repeat=h)):
            head[r, :h] = self.points[list(combo)]
        tail = np.zeros((self.order ** t, self.N), dtype=np.complex128)
        for r, combo in enumerate(product(range(self.order), repeat=t)):
            tail[r, h:] = self.points[list(combo)]
        head_values = np.arange(len(head), dtype=np.int64) << (self.q * t)
        return [CandidateGroup(head, tail, head_values, np.arange(len(tail), dtype=np.int64))]


class AFDMIM:
    """Chirp-activation IM: ``k_act`` of ``n`` chirps per block carry scaled QAM, the rest are silent.

    Index bits pick the active set (lexicographic combination, first
    ``2^floor(log2 C(n, k_act))`` only); active symbols are scaled by
    ``sqrt(n / k_act)`` so the average frame energy equals ``N``.
    """

    name = "AFDM_IM"

    def __init__(self, N, G, k_act, order, c1=None, c2=DEFAULT_C2, alpha_max=1.0, budget=DEFAULT_BUDGET):
        if G < 1 or N % G:
            raise ValueError(f"N={N} is not divisible into G={G} blocks")
        self.N, self.G, self.n, self.k_act, self.order = N, G, N // G, k_act, order
        if not 1 <= k_act <= self.n:
            raise ValueError("need 1 <= active chirps <= chirps per block")
        self.q = order.bit_length() - 1
        self.b1 = comb(self.n, k_act).bit_length() - 1
        self.b2 = k_act * self.q
        self.b = self.b1 + self.b2
        self.B = G * self.b
        self.budget = budget
        self.daft = DaftParams(N, default_c1(N, alpha_max) if c1 is None else c1, c2)
        self.points = gray_qam(order) * np.sqrt(self.n / k_act)
        self.patterns = [np.array(unrank_map(i, self.n, k_act)) - 1 for i in range(1 << self.b1)]

    def block_vectors(self, words):
        words = np.asarray(words, dtype=np.int64)
        out = np.zeros((len(words), self.n), dtype=np.complex128)
        pat = words >> self.b2
        for p in np.unique(pat):
            rows = np.nonzero(pat == p)[0]
            active = self.patterns[p]
            for s, chirp in enumerate(active):
                sym = (words[rows] >> (self.q * (self.k_act - 1 - s))) & (self.order - 1)
                out[rows, chirp] = self.points[sym]
        return out

    def frames(self, values):
        values = np.asarray(values, dtype=np.int64)
        mask = (1 << self.b) - 1
        blocks = [self.block_vectors((values >> (self.b * (self.G - 1 - g))) & mask) for g in range(self.G)]
        return np.concatenate(blocks, axis=1)

    @cached_property
    def groups(self):
        if self.B > 62 or (1 << self.B) > self.budget:
            raise BudgetExceeded(f"2^{self.B} AFDM-IM candidates exceed the budget of {self.budget}")
        if self.G > 1:
            return self._block_product_groups()
        k1 = (self.k_act + 1) // 2
        k2 = self.k_act - k1
        groups = []
        for p, active in enumerate(self.patterns):
            head = np.zeros((self.order ** k1, self.N), dtype=np.complex128)
            for r, combo in enumerate(product(range(self.order), repeat=k1)):
                head[r, active[:k1]] = self.points[list(combo)]
            tail = np.zeros((self.order ** k2, self.N), dtype=np.complex128)
            for r, combo in enumerate(product(range(self.order), repeat=k2)):
                tail[r, active[k1:]] = self.points[list(combo)]
            head_values = (p << self.b2) + (np.arange(len(head), dtype=np.int64) << (self.q * k2))
            groups.append(CandidateGroup(head, tail, head_values, np.arange(len(tail), dtype=np.int64)))
        return groups

    def _block_product_groups(self):
        nw = 1 << self.b
        table = self.block_vectors(np.arange(nw))
        n, N = self.n, self.N
        tail = np.zeros((nw, N), dtype=np.complex128)
        tail[:, N - n:] = table
        words = np.array(list(product(range(nw), repeat=self.G - 1)), dtype=np.int64)
        head = np.zeros((len(words), N), dtype=np.complex128)
        head[:, :N - n] = table[words].reshape(len(words), -1)
        head_values = np.zeros(len(words), dtype=np.int64)
        for g in range(self.G - 1):
            head_values = (head_values << self.b) | words[:, g]
        return [CandidateGroup(head, tail, head_values << self.b, np.arange(nw, dtype=np.int64))]
