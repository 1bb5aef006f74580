"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module (``jacobi_eigvalsh``,
``residual_argmin``, ``pairwise_upep_sums``) dispatch on
``mmafdm._accel.USE_NUMBA``. Both flavours implement the same algorithm and
the same tie-breaking, so they agree up to floating-point summation order.
"""
import numpy as np

from mmafdm._accel import USE_NUMBA, njit

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


# ---------------------------------------------------------------------------
# Cyclic Jacobi eigenvalues of small Hermitian matrices
# ---------------------------------------------------------------------------

@njit(cache=True)
def _jacobi_inplace_nb(A, tol, max_sweeps):
    m = A.shape[0]
    scale = 0.0
    fro = 0.0
    for i in range(m):
        scale += A[i, i].real
        for j in range(m):
            fro += A[i, j].real * A[i, j].real + A[i, j].imag * A[i, j].imag
    scale = max(abs(scale), np.sqrt(fro))
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(m):
            for j in range(m):
                if i != j:
                    off += A[i, j].real * A[i, j].real + A[i, j].imag * A[i, j].imag
        if np.sqrt(off) <= tol * scale:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                z = A[p, q]
                r = abs(z)
                if r == 0.0:
                    continue
                u = z / r
                tau = (A[q, q].real - A[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                for k in range(m):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * uc * akq
                    A[k, q] = s * u * akp + c * akq
                for k in range(m):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * u * aqk
                    A[q, k] = s * uc * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
    out = np.empty(m)
    for i in range(m):
        out[i] = A[i, i].real
    return out


@njit(cache=True)
def _jacobi_batch_nb(H, tol, max_sweeps):
    K = H.shape[0]
    m = H.shape[1]
    out = np.empty((K, m))
    for b in range(K):
        out[b] = _jacobi_inplace_nb(H[b].copy(), tol, max_sweeps)
    return out


def _jacobi_batch_np(H, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    A = np.array(H, dtype=np.complex128, copy=True)
    K, m, _ = A.shape
    idx = np.arange(K)
    diag = np.einsum("kii->ki", A).real
    scale = np.maximum(np.abs(diag.sum(axis=1)), np.sqrt((np.abs(A) ** 2).sum(axis=(1, 2))))
    offmask = ~np.eye(m, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt((np.abs(A[:, offmask]) ** 2).sum(axis=1))
        active = off > tol * scale
        if not active.any():
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                z = A[:, p, q]
                r = np.abs(z)
                nz = active & (r > 0.0)
                rs = np.where(nz, r, 1.0)
                u = np.where(nz, z / rs, 1.0)
                tau = (A[:, q, q].real - A[:, p, p].real) / (2.0 * rs)
                sgn = np.where(tau >= 0.0, 1.0, -1.0)
                t = np.where(nz, sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau)), 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                akp = A[:, :, p].copy()
                akq = A[:, :, q].copy()
                A[:, :, p] = c[:, None] * akp - (s * uc)[:, None] * akq
                A[:, :, q] = (s * u)[:, None] * akp + c[:, None] * akq
                apk = A[:, p, :].copy()
                aqk = A[:, q, :].copy()
                A[:, p, :] = c[:, None] * apk - (s * u)[:, None] * aqk
                A[:, q, :] = (s * uc)[:, None] * apk + c[:, None] * aqk
                A[idx[nz], p, q] = 0.0
                A[idx[nz], q, p] = 0.0
    return np.einsum("kii->ki", A).real.copy()


# ---------------------------------------------------------------------------
# Exhaustive residual search: min_{i,j} ||y - H (head[i] + tail[j])||^2
# ---------------------------------------------------------------------------

@njit(cache=True)
def _project_nb(Hf, X, out):
    K, N = X.shape
    for k in range(K):
        for i in range(N):
            out[k, i] = 0.0
        for j in range(N):
            v = X[k, j]
            if v != 0.0:
                for i in range(N):
                    out[k, i] += Hf[i, j] * v


@njit(cache=True)
def _residual_argmin_nb(Y, H, head, tail, best):
    F, N = Y.shape
    A = head.shape[0]
    B = tail.shape[0]
    local = np.full(F, -1, dtype=np.int64)
    R = np.empty((A, N), dtype=np.complex128)
    P = np.empty((B, N), dtype=np.complex128)
    for f in range(F):
        _project_nb(H[f], head, R)
        for a in range(A):
            for i in range(N):
                R[a, i] = Y[f, i] - R[a, i]
        _project_nb(H[f], tail, P)
        b = best[f]
        for i in range(A):
            for j in range(B):
                acc = 0.0
                for n in range(N):
                    d = R[i, n] - P[j, n]
                    acc += d.real * d.real + d.imag * d.imag
                    if acc >= b:
                        break
                if acc < b:
                    b = acc
                    local[f] = i * B + j
        best[f] = b
    return local


def _residual_argmin_np(Y, H, head, tail, best, max_elems=1 << 22):
    F, N = Y.shape
    B = tail.shape[0]
    R = Y[:, None, :] - np.matmul(H, head.T).transpose(0, 2, 1)
    P = np.matmul(H, tail.T).transpose(0, 2, 1)
    local = np.full(F, -1, dtype=np.int64)
    rows = max(1, max_elems // max(1, B * N))
    for f in range(F):
        for i0 in range(0, R.shape[1], rows):
            d = R[f, i0:i0 + rows, None, :] - P[f, None, :, :]
            m = (d.real ** 2 + d.imag ** 2).sum(axis=-1).ravel()
            k = int(np.argmin(m))
            if m[k] < best[f]:
                best[f] = m[k]
                local[f] = i0 * B + k
    return local


# ---------------------------------------------------------------------------
# Union-bound accumulation over unordered frame pairs
# ---------------------------------------------------------------------------

@njit(cache=True)
def _pairwise_upep_sums_nb(Phi, bit_err, lam1, lam2, rank_tol):
    K, N, P = Phi.shape
    S = lam1.shape[0]
    acc = np.zeros(S)
    U = np.empty((P, P), dtype=np.complex128)
    D = np.empty((N, P), dtype=np.complex128)
    for i in range(K):
        for j in range(i + 1, K):
            e = bit_err[i, j]
            if e == 0:
                continue
            for n in range(N):
                for p in range(P):
                    D[n, p] = Phi[j, n, p] - Phi[i, n, p]
            for p in range(P):
                for q in range(P):
                    v = 0.0 + 0.0j
                    for n in range(N):
                        v += np.conj(D[n, p]) * D[n, q]
                    U[p, q] = v
            ev = _jacobi_inplace_nb(U, JACOBI_TOL, JACOBI_MAX_SWEEPS)
            emax = ev.max()
            for s in range(S):
                p1 = 1.0
                p2 = 1.0
                if emax > 0.0:
                    for t in range(P):
                        if ev[t] > rank_tol * emax:
                            p1 /= 1.0 + lam1[s] * ev[t] / P
                            p2 /= 1.0 + lam2[s] * ev[t] / P
                acc[s] += 2.0 * e * (p1 / 12.0 + p2 / 4.0)
    return acc


def _pairwise_upep_sums_np(Phi, bit_err, lam1, lam2, rank_tol, chunk=1 << 16):
    K, N, P = Phi.shape
    ii, jj = np.triu_indices(K, k=1)
    e_all = bit_err[ii, jj]
    keep = e_all != 0
    ii, jj, e_all = ii[keep], jj[keep], e_all[keep].astype(np.float64)
    acc = np.zeros(len(lam1))
    for c0 in range(0, len(ii), chunk):
        i, j, e = ii[c0:c0 + chunk], jj[c0:c0 + chunk], e_all[c0:c0 + chunk]
        D = Phi[j] - Phi[i]
        U = np.einsum("knp,knq->kpq", D.conj(), D)
        ev = _jacobi_batch_np(U)
        emax = ev.max(axis=1, keepdims=True)
        ev = np.where((emax > 0.0) & (ev > rank_tol * emax), ev, 0.0)
        for s in range(len(lam1)):
            p1 = np.prod(1.0 / (1.0 + lam1[s] * ev / P), axis=1)
            p2 = np.prod(1.0 / (1.0 + lam2[s] * ev / P), axis=1)
            acc[s] += np.sum(2.0 * e * (p1 / 12.0 + p2 / 4.0))
    return acc


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def jacobi_eigvalsh(H, use_numba=None):
    """Unsorted eigenvalues of a batch ``(K, m, m)`` of Hermitian matrices."""
    H = np.ascontiguousarray(H, dtype=np.complex128)
    if USE_NUMBA if use_numba is None else use_numba:
        return _jacobi_batch_nb(H, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return _jacobi_batch_np(H)


def residual_argmin(Y, H, head, tail, best, use_numba=None):
    """Search ``||Y[f] - H[f] (head[i] + tail[j])||^2`` over all ``(i, j)`` for every frame ``f``.

    ``best`` (shape ``(F,)``) holds the incumbent metric per frame and is
    updated in place. Only strict improvements are accepted, and pairs are
    visited in ascending ``i * B + j`` order, so the smallest index wins ties.
    Returns the flat local index per frame, or -1 where nothing improved.
    """
    Y, H, head, tail = (np.ascontiguousarray(a, dtype=np.complex128) for a in (Y, H, head, tail))
    if USE_NUMBA if use_numba is None else use_numba:
        return _residual_argmin_nb(Y, H, head, tail, best)
    return _residual_argmin_np(Y, H, head, tail, best)


def pairwise_upep_sums(Phi, bit_err, lam1, lam2, rank_tol, use_numba=None):
    """Sum of ``e(x -> x') * UPEP(x -> x')`` over all ordered pairs, per lambda pair.

    ``Phi`` has shape ``(K, N, P)``: column ``p`` of ``Phi[k]`` is ``H_p x_k``.
    """
    Phi = np.ascontiguousarray(Phi, dtype=np.complex128)
    bit_err = np.ascontiguousarray(bit_err, dtype=np.int64)
    lam1 = np.ascontiguousarray(lam1, dtype=np.float64)
    lam2 = np.ascontiguousarray(lam2, dtype=np.float64)
    if USE_NUMBA if use_numba is None else use_numba:
        return _pairwise_upep_sums_nb(Phi, bit_err, lam1, lam2, float(rank_tol))
    return _pairwise_upep_sums_np(Phi, bit_err, lam1, lam2, float(rank_tol))
