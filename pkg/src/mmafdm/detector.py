"""Joint ML detection by exhaustive search over every addressable frame."""
from dataclasses import dataclass
from itertools import product

import numpy as np

from mmafdm import kernels
from mmafdm.codec import int_to_bits, modulate, state_from_vector, subblock_table

DEFAULT_BUDGET = 1 << 22


class BudgetExceeded(ValueError):
    """The exhaustive search space is larger than the configured budget."""


@dataclass(frozen=True)
class CandidateGroup:
    """Candidates ``head[i] + tail[j]`` carrying the integer value ``head_values[i] + tail_values[j]``.

    Iterating ``i`` then ``j`` must visit values in ascending order.
    """

    head: np.ndarray
    tail: np.ndarray
    head_values: np.ndarray
    tail_values: np.ndarray

    @property
    def size(self):
        return len(self.head) * len(self.tail)


def search(Y, H, groups):
    """Minimum-distance search for a batch of observations.

    ``Y`` is ``(F, N)``, ``H`` is ``(F, N, N)``. Returns ``(values, metrics)``:
    the integer value of the winning candidate per frame and its metric. Groups
    are scanned in order with strict improvement, so among exact ties the
    earliest candidate (smallest value) wins.
    """
    Y = np.asarray(Y, dtype=np.complex128)
    H = np.asarray(H, dtype=np.complex128)
    F = Y.shape[0]
    best = np.full(F, np.inf)
    values = np.full(F, -1, dtype=np.int64)
    for grp in groups:
        local = kernels.residual_argmin(Y, H, grp.head, grp.tail, best)
        hit = local >= 0
        if hit.any():
            nb = len(grp.tail)
            values[hit] = grp.head_values[local[hit] // nb] + grp.tail_values[local[hit] % nb]
    return values, best


def mm_candidate_groups(ms, sp, budget=DEFAULT_BUDGET):
    """Split the ``2^B`` MM-AFDM-IM frames into (first G-1 sub-blocks) x (last sub-block)."""
    if sp.B > 62 or (1 << sp.B) > budget:
        raise BudgetExceeded(f"2^{sp.B} candidates exceed the exhaustive-search budget of {budget}")
    table = subblock_table(ms, sp)
    nw = len(table)
    N, n = sp.N, sp.n
    tail = np.zeros((nw, N), dtype=np.complex128)
    tail[:, N - n:] = table
    if sp.G == 1:
        head = np.zeros((1, N), dtype=np.complex128)
        head_values = np.zeros(1, dtype=np.int64)
    else:
        words = np.array(list(product(range(nw), repeat=sp.G - 1)), dtype=np.int64)
        head = np.zeros((len(words), N), dtype=np.complex128)
        head[:, :N - n] = table[words].reshape(len(words), -1)
        head_values = np.zeros(len(words), dtype=np.int64)
        for g in range(sp.G - 1):
            head_values = (head_values << sp.b) | words[:, g]
        head_values <<= sp.b
    return [CandidateGroup(head, tail, head_values, np.arange(nw, dtype=np.int64))]


def frames_from_values(values, ms, sp):
    """Frame vectors ``(F, N)`` for integer bit-pattern values (MSB = first bit)."""
    values = np.asarray(values, dtype=np.int64)
    mask = (1 << sp.b) - 1
    words = np.stack([(values >> (sp.b * (sp.G - 1 - g))) & mask for g in range(sp.G)], axis=1)
    return modulate(words, ms, sp)


def enumerate_candidates(sp, ms):
    """Yield ``(bits, x)`` for all ``2^B`` addressable frames, ascending bit pattern."""
    table = subblock_table(ms, sp)
    for v in range(1 << sp.B):
        bits = int_to_bits(v, sp.B)
        words = [(v >> (sp.b * (sp.G - 1 - g))) & ((1 << sp.b) - 1) for g in range(sp.G)]
        yield bits, np.concatenate([table[w] for w in words])


@dataclass(frozen=True)
class DetectionResult:
    x_hat: np.ndarray
    i_map_hat: list
    i_cap_hat: list
    bits_hat: list
    metric: float
    candidates_evaluated: int


def ml_detect(y, h_eff, ms, sp, budget=DEFAULT_BUDGET, groups=None):
    """Exhaustive ML: ``argmin ||y - h_eff x||^2`` over the ``2^B`` addressable frames."""
    y = np.asarray(y, dtype=np.complex128)
    h_eff = np.asarray(h_eff, dtype=np.complex128)
    if y.shape != (sp.N,) or h_eff.shape != (sp.N, sp.N):
        raise ValueError("dimension mismatch between y, h_eff and system parameters")
    if groups is None:
        groups = mm_candidate_groups(ms, sp, budget)
    values, _ = search(y[None], h_eff[None], groups)
    v = int(values[0])
    x_hat = frames_from_values([v], ms, sp)[0]
    states = [state_from_vector(x_hat[g * sp.n:(g + 1) * sp.n], ms, sp) for g in range(sp.G)]
    r = y - h_eff @ x_hat
    return DetectionResult(
        x_hat=x_hat,
        i_map_hat=[s.i_map for s in states],
        i_cap_hat=[s.i_cap for s in states],
        bits_hat=int_to_bits(v, sp.B),
        metric=float(np.vdot(r, r).real),
        candidates_evaluated=sum(g.size for g in groups),
    )
