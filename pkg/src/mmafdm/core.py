"""DAFT operators, structured matrices, a Jacobi eigensolver and the Q approximation."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from mmafdm import kernels

RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class DaftParams:
    """Chirp count ``N`` with post-chirp ``c1`` and pre-chirp ``c2``."""

    N: int
    c1: float
    c2: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise ValueError("c1 and c2 must be finite")


def default_c1(N, alpha_max):
    """Post-chirp parameter ``(2(alpha_max + 1) + 1) / (2N)``."""
    return (2 * (alpha_max + 1) + 1) / (2 * N)


# irrational pre-chirp default: the golden-ratio conjugate
DEFAULT_C2 = (np.sqrt(5.0) - 1.0) / 2.0


def dft_matrix(N):
    """Unitary DFT matrix with entries ``exp(-2j*pi*m*n/N) / sqrt(N)``."""
    if N < 1:
        raise ValueError("N must be positive")
    k = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)


def chirp_diag(c, N):
    """Diagonal chirp matrix ``diag(exp(-2j*pi*c*n^2))``."""
    if N < 1:
        raise ValueError("N must be positive")
    n = np.arange(N, dtype=np.float64)
    return np.diag(np.exp(-2j * np.pi * c * n * n))


@lru_cache(maxsize=64)
def _daft_matrix_cached(N, c1, c2):
    A = chirp_diag(c2, N) @ dft_matrix(N) @ chirp_diag(c1, N)
    A.setflags(write=False)
    return A


def daft_matrix(p):
    """The DAFT operator ``A = Lambda_c2 F Lambda_c1`` (read-only, cached)."""
    return _daft_matrix_cached(int(p.N), float(p.c1), float(p.c2))


def _check_len(x, N):
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != N:
        raise ValueError(f"expected trailing dimension {N}, got {x.shape[-1]}")
    return x


def daft(x, p):
    """Forward DAFT ``A x``. Accepts a vector or a stack of vectors on the last axis."""
    x = _check_len(x, p.N)
    return x @ daft_matrix(p).T


def idaft(x, p):
    """Inverse DAFT ``A^H x`` (time-domain samples from DAF-domain symbols)."""
    x = _check_len(x, p.N)
    return x @ daft_matrix(p).conj()


def hermitian_eigenvalues(H, return_rank=False):
    """Eigenvalues of a Hermitian matrix in descending order, via cyclic Jacobi.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``1e-12 * max(|trace|, ||H||_F)``. With ``return_rank=True`` the numerical
    rank (eigenvalues above ``RANK_TOL * largest``) is returned as well.
    """
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    asym = np.max(np.abs(H - H.conj().T))
    if asym > HERMITIAN_TOL * max(1.0, np.max(np.abs(H))):
        raise ValueError(f"matrix is not Hermitian (max asymmetry {asym:.3g})")
    H = 0.5 * (H + H.conj().T)
    ev = np.sort(kernels.jacobi_eigvalsh(H[None])[0])[::-1]
    if return_rank:
        return ev, numerical_rank(ev)
    return ev


def numerical_rank(eigenvalues, rel_tol=RANK_TOL):
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.size == 0:
        return 0
    top = ev.max()
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(ev > rel_tol * top))


def q_func_approx(x):
    """Two-exponential approximation ``exp(-x^2/2)/12 + exp(-2x^2/3)/4`` of Q(x), x >= 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("q_func_approx is defined for x >= 0 only")
    out = np.exp(-x * x / 2.0) / 12.0 + np.exp(-2.0 * x * x / 3.0) / 4.0
    return float(out) if out.ndim == 0 else out
