"""Pairwise error probabilities and the union bound on the average bit error probability."""
from dataclasses import dataclass

import numpy as np

from mmafdm import kernels
from mmafdm.channel import per_path_stack, sample_geometry
from mmafdm.core import RANK_TOL, hermitian_eigenvalues
from mmafdm.detector import frames_from_values

DEFAULT_PAIR_BUDGET = 1 << 10


class PairBudgetExceeded(ValueError):
    pass


def bit_error_count(bits_a, bits_b):
    """Hamming distance between two equal-length bit sequences."""
    a = np.asarray(bits_a, dtype=np.int64)
    b = np.asarray(bits_b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("bit sequences differ in length")
    return int(np.count_nonzero(a != b))


@dataclass(frozen=True, eq=False)
class PairwiseEvent:
    """Transmit ``x`` detected as ``x_hat``; ``upsilon = D^H D`` with ``D = Phi(x_hat) - Phi(x)``."""

    x: np.ndarray
    x_hat: np.ndarray
    phi_diff: np.ndarray
    upsilon: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    bit_errors: int

    @classmethod
    def build(cls, x, x_hat, per_path, bits_x=None, bits_x_hat=None):
        """``per_path`` is the ``(P, N, N)`` stack of per-path DAF-domain matrices."""
        x = np.asarray(x, dtype=np.complex128)
        x_hat = np.asarray(x_hat, dtype=np.complex128)
        D = np.einsum("pnm,m->np", np.asarray(per_path), x_hat - x)
        ups = D.conj().T @ D
        ev, rank = hermitian_eigenvalues(ups, return_rank=True)
        e = 0 if bits_x is None else bit_error_count(bits_x, bits_x_hat)
        return cls(x, x_hat, D, ups, ev, rank, e)


def upep_from_eigenvalues(eigenvalues, n0, P):
    """Closed-form UPEP ``prod 1/(1 + l1 e/P) / 12 + prod 1/(1 + l2 e/P) / 4``, ``l1 = 1/(4 n0)``, ``l2 = 1/(3 n0)``."""
    if not n0 > 0:
        raise ValueError("n0 must be positive")
    ev = np.asarray(eigenvalues, dtype=np.float64)
    keep = ev[ev > RANK_TOL * ev.max()] if ev.size and ev.max() > 0 else ev[:0]
    lam1, lam2 = 1.0 / (4.0 * n0), 1.0 / (3.0 * n0)
    return float(np.prod(1.0 / (1.0 + lam1 * keep / P)) / 12.0 + np.prod(1.0 / (1.0 + lam2 * keep / P)) / 4.0)


def upep(event, n0, P):
    """Unconditional pairwise error probability of ``event`` with ``h ~ CN(0, I/P)``."""
    return upep_from_eigenvalues(event.eigenvalues[: max(event.rank, 0)], n0, P)


def cpep_approx(delta, n0):
    """Conditional PEP with the two-exponential Q approximation; ``delta = ||D h||^2``."""
    return np.exp(-delta / (4.0 * n0)) / 12.0 + np.exp(-delta / (3.0 * n0)) / 4.0


def all_frames(ms, sp, pair_budget=DEFAULT_PAIR_BUDGET):
    if sp.B > 62 or (1 << sp.B) > pair_budget:
        raise PairBudgetExceeded(f"2^{sp.B} frames exceed the pairwise-enumeration budget of {pair_budget}")
    return frames_from_values(np.arange(1 << sp.B), ms, sp)


def bit_error_matrix(B):
    v = np.arange(1 << B, dtype=np.uint64)
    return np.bitwise_count(v[:, None] ^ v[None, :]).astype(np.int64)


def union_bound_fixed_geometry(X, per_path, n0s, B):
    """Union bound for one delay/Doppler geometry, for every noise level in ``n0s``.

    ``X`` is the ``(2^B, N)`` frame table ordered by bit value. Gains are
    averaged analytically through the quadratic-form MGF.
    """
    Hp = np.asarray(per_path)
    P = Hp.shape[0]
    Phi = np.einsum("pnm,km->knp", Hp, X)
    n0s = np.asarray(n0s, dtype=np.float64)
    with np.errstate(divide="ignore"):
        lam1 = np.where(np.isinf(n0s), 0.0, 1.0 / (4.0 * n0s))
        lam2 = np.where(np.isinf(n0s), 0.0, 1.0 / (3.0 * n0s))
    acc = kernels.pairwise_upep_sums(Phi, bit_error_matrix(B), lam1, lam2, RANK_TOL)
    return acc / (len(X) * B)


def abep_bound_curve(sp, ms, n0s, geometry_rng, R=100, P=3, d_max=1, alpha_max=1.0,
                     pair_budget=DEFAULT_PAIR_BUDGET):
    """Union bound averaged over ``R`` random delay/Doppler geometries, one value per ``n0``.

    Values are not clipped to 1 (the union bound can exceed 1 at low SNR).
    """
    if R < 1:
        raise ValueError("need at least one geometry draw")
    n0s = np.atleast_1d(np.asarray(n0s, dtype=np.float64))
    if np.any(n0s <= 0):
        raise ValueError("n0 must be positive")
    X = all_frames(ms, sp, pair_budget)
    total = np.zeros(len(n0s))
    for _ in range(R):
        delays, alphas, _ = sample_geometry(P, d_max, alpha_max, geometry_rng)
        Hp = per_path_stack(delays, alphas, sp.daft)
        total += union_bound_fixed_geometry(X, Hp, n0s, sp.B)
    return total / R


def abep_bound(sp, ms, n0, geometry_rng, R=100, P=3, d_max=1, alpha_max=1.0,
               pair_budget=DEFAULT_PAIR_BUDGET):
    """Geometry-averaged union bound at a single noise level."""
    return float(abep_bound_curve(sp, ms, [n0], geometry_rng, R, P, d_max, alpha_max, pair_budget)[0])


def pair_count(sp):
    """Number of ordered pairs of distinct frames entering the double sum."""
    K = 1 << sp.B
    return K * (K - 1)


def noise_limit_bound(B):
    """Bound value as ``n0 -> inf``: every UPEP tends to 1/3."""
    return float(bit_error_matrix(B).sum()) / 3.0 / ((1 << B) * B)

