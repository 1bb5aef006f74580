"""Disjoint constellation modes carved out of a parent QAM or PSK constellation."""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

EXHAUSTIVE_MAX_POINTS = 16


class PartitionError(ValueError):
    """Raised when no admissible mode partition can be built."""


@dataclass(frozen=True, eq=False)
class ModeSet:
    """``M`` disjoint modes of ``U`` points each, unit average energy over the union.

    ``points[m, p]`` is the p-th point of mode m (0-based), in labeling order:
    the codec maps Gray label ``p ^ (p >> 1)`` onto position ``p``.
    ``grid_points = points * energy_scale`` gives the unnormalized coordinates
    (odd-integer grid for QAM, unit circle for PSK).
    """

    points: np.ndarray
    parent_kind: str
    energy_scale: float
    M: int = field(init=False)
    U: int = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.complex128)
        if pts.ndim != 2 or pts.size == 0:
            raise ValueError("points must be a non-empty (M, U) array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "M", pts.shape[0])
        object.__setattr__(self, "U", pts.shape[1])
        flat = pts.ravel()
        d = np.abs(flat[:, None] - flat[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() <= 1e-12:
            raise ValueError("modes are not disjoint (repeated constellation point)")
        energy = np.mean(np.abs(flat) ** 2)
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"union average energy is {energy!r}, expected 1")

    @property
    def grid_points(self):
        return self.points * self.energy_scale

    @property
    def bits_per_symbol(self):
        return int(math.log2(self.U))

    def mode_energies(self):
        return np.mean(np.abs(self.points) ** 2, axis=1)


def _is_pow2(v):
    return v >= 1 and (v & (v - 1)) == 0


def qam_grid(size):
    """Rectangular QAM on odd integers, ``2^ceil(m/2) x 2^floor(m/2)``, sorted by (re, im)."""
    if size < 4 or not _is_pow2(size):
        raise PartitionError(f"rectangular QAM needs a power-of-two size >= 4, got {size}")
    m = size.bit_length() - 1
    n_i, n_q = 1 << ((m + 1) // 2), 1 << (m // 2)
    re = np.arange(-(n_i - 1), n_i, 2)
    im = np.arange(-(n_q - 1), n_q, 2)
    return np.array([complex(a, b) for a in re for b in im])


def _label_order(pts):
    """Order a mode's points by angle around its centroid (Gray neighbours end up adjacent)."""
    if len(pts) <= 2:
        return list(range(len(pts)))
    c = np.mean(pts)
    ang = np.round(np.angle(pts - c), 12)
    rad = np.round(np.abs(pts - c), 12)
    return sorted(range(len(pts)), key=lambda i: (ang[i], rad[i]))


def _sqdist_int(grid):
    g = [(int(round(z.real)), int(round(z.imag))) for z in grid]
    n = len(g)
    return [[(g[i][0] - g[j][0]) ** 2 + (g[i][1] - g[j][1]) ** 2 for j in range(n)] for i in range(n)]


def _maxmin_partition(D, M, U):
    """Branch-and-bound over balanced partitions maximising (mird^2, miad^2).

    ``D`` holds integer squared distances, so comparisons are exact. Points are
    placed in index order into groups opened in order, which visits each
    partition once and in lexicographic label order. A first pass finds the
    optimum value; a second pass returns the first (smallest) labeling with it.
    """
    n = len(D)
    INF = 1 << 60
    label = [-1] * n
    groups = [[] for _ in range(M)]

    def dfs(i, opened, mird, miad, target, state):
        if i == n:
            val = (mird, miad)
            if target is None:
                if val > state["best"]:
                    state["best"] = val
            elif val == target:
                state["hit"] = list(label)
                return True
            return False
        for g in range(min(opened + 1, M)):
            if len(groups[g]) == U:
                continue
            new_miad = miad
            for j in groups[g]:
                if D[i][j] < new_miad:
                    new_miad = D[i][j]
            new_mird = mird
            for j in range(i):
                if label[j] != g and D[i][j] < new_mird:
                    new_mird = D[i][j]
            bound = (new_mird, new_miad)
            if target is None:
                if bound <= state["best"]:
                    continue
            elif bound < target:
                continue
            label[i] = g
            groups[g].append(i)
            done = dfs(i + 1, max(opened, g + 1), new_mird, new_miad, target, state)
            groups[g].pop()
            label[i] = -1
            if done:
                return True
        return False

    state = {"best": (-1, -1), "hit": None}
    dfs(0, 0, INF, INF, None, state)
    if state["best"] == (-1, -1):
        raise PartitionError("partition search found no balanced partition")
    dfs(0, 0, INF, INF, state["best"], state)
    return state["hit"]


def _coset_labels(size, M):
    """Sub-lattice coset labels on the index grid, used above the exhaustive size limit."""
    m = size.bit_length() - 1
    n_q = 1 << (m // 2)
    a = M.bit_length() - 1
    m_i, m_q = 1 << ((a + 1) // 2), 1 << (a // 2)
    if m_q > n_q:
        m_i, m_q = M // n_q, n_q
    return [((k // n_q) % m_i) * m_q + (k % n_q) % m_q for k in range(size)]


def qam_mird_target(M, U):
    """Predicted QAM inter-mode distance ``2 sqrt(6) / sqrt(5MU - 4)``."""
    return 2.0 * math.sqrt(6.0) / math.sqrt(5 * M * U - 4)


def qam_miad_target(M, U):
    mird = qam_mird_target(M, U)
    return mird * math.sqrt(5 * U) / 2.0 if U == 2 else mird * math.sqrt(U)


def psk_mird_target(M, U):
    """Predicted PSK inter-mode distance ``2 sin(pi / MU)``."""
    return 2.0 * math.sin(math.pi / (M * U))


@lru_cache(maxsize=None)
def partition_qam(M, U):
    """Split the unit-energy ``MU``-QAM grid into ``M`` disjoint ``U``-point modes.

    Up to 16 parent points the partition is an exhaustive max-min search; above
    that a sub-lattice coset split is used. Either way the result must reach the
    predicted inter-mode distance or :class:`PartitionError` is raised.
    """
    if M < 2 or U < 2 or not (_is_pow2(M) and _is_pow2(U)):
        raise PartitionError(f"QAM modes need powers of two M >= 2 and U >= 2, got M={M}, U={U}")
    size = M * U
    grid = qam_grid(size)
    if size <= EXHAUSTIVE_MAX_POINTS:
        labels = _maxmin_partition(_sqdist_int(grid), M, U)
    else:
        labels = _coset_labels(size, M)
    modes = []
    for g in range(M):
        members = grid[[i for i in range(size) if labels[i] == g]]
        if len(members) != U:
            raise PartitionError("unbalanced partition")
        modes.append(members[_label_order(members)])
    scale = math.sqrt(np.mean(np.abs(grid) ** 2))
    ms = ModeSet(np.array(modes) / scale, "QAM", scale)
    _, mird = min_distances(ms)
    if mird < qam_mird_target(M, U) - 1e-9:
        raise PartitionError(f"partition reaches MIRD {mird:.6f} < target {qam_mird_target(M, U):.6f}")
    return ms


@lru_cache(maxsize=None)
def partition_psk(M, U):
    """Interleave ``MU``-PSK: mode m takes the phase indices congruent to m mod M."""
    if M < 1 or U < 1:
        raise PartitionError(f"PSK modes need M >= 1 and U >= 1, got M={M}, U={U}")
    size = M * U
    pts = np.exp(2j * np.pi * np.arange(size) / size)
    modes = np.array([pts[m::M] for m in range(M)])
    return ModeSet(modes, "PSK", 1.0)


def min_distances(ms):
    """Exhaustive ``(miad, mird)``; ``inf`` where a mode has one point or there is one mode."""
    pts = ms.points
    M, U = pts.shape
    miad = math.inf
    if U > 1:
        for m in range(M):
            d = np.abs(pts[m][:, None] - pts[m][None, :])
            miad = min(miad, float(d[np.triu_indices(U, 1)].min()))
    mird = math.inf
    for a in range(M):
        for b in range(a + 1, M):
            mird = min(mird, float(np.abs(pts[a][:, None] - pts[b][None, :]).min()))
    return miad, mird


def predicted_distances(kind, M, U):
    """Closed-form ``(miad, mird)`` predictions for a parent kind.

    For PSK the intra-mode value is the literal spacing of an interleaved
    subset, ``2 sin(pi M / MU)``.
    """
    kind = kind.upper()
    if kind == "QAM":
        return qam_miad_target(M, U), qam_mird_target(M, U)
    if kind == "PSK":
        miad = 2.0 * math.sin(math.pi * M / (M * U)) if U > 1 else math.inf
        mird = psk_mird_target(M, U) if M > 1 else math.inf
        return miad, mird
    raise ValueError(f"unknown parent kind {kind!r}")


def build_modes(kind, M, U):
    kind = kind.upper()
    if kind == "QAM":
        return partition_qam(M, U)
    if kind == "PSK":
        return partition_psk(M, U)
    raise ValueError(f"unknown parent kind {kind!r}")
