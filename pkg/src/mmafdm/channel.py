"""Doubly-dispersive channel: Jakes path sampling, DAF-domain matrices and noisy observations."""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from mmafdm.core import DaftParams, daft, daft_matrix, idaft


@dataclass(frozen=True)
class PathTriplet:
    """One path: complex gain, integer delay (samples), normalized Doppler (cycles/frame)."""

    h: complex
    d: int
    alpha: float
    theta: float = float("nan")

    @property
    def integer_doppler(self):
        return int(math.floor(self.alpha + 0.5))

    @property
    def fractional_doppler(self):
        return self.alpha - self.integer_doppler


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """``P`` paths plus the derived ``h_eff = sum_p h_p H_p`` for given DAFT parameters."""

    paths: tuple
    params: DaftParams
    per_path: np.ndarray = field(init=False, repr=False)
    h_eff: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        Hp = np.array([per_path_matrix(p, self.params) for p in self.paths])
        gains = np.array([p.h for p in self.paths], dtype=np.complex128)
        Hp.setflags(write=False)
        heff = np.tensordot(gains, Hp, axes=1)
        heff.setflags(write=False)
        object.__setattr__(self, "per_path", Hp)
        object.__setattr__(self, "h_eff", heff)

    @property
    def gains(self):
        return np.array([p.h for p in self.paths], dtype=np.complex128)

    def to_record(self, seed=None):
        """One-line JSON record of the path triplets (and the seed, if known)."""
        rec = {
            "N": self.params.N, "c1": self.params.c1, "c2": self.params.c2, "seed": seed,
            "paths": [[p.h.real, p.h.imag, p.d, p.alpha, p.theta] for p in self.paths],
        }
        return json.dumps(rec, allow_nan=True)

    @classmethod
    def from_record(cls, text):
        rec = json.loads(text)
        paths = [PathTriplet(complex(a, b), int(d), float(al), float(th)) for a, b, d, al, th in rec["paths"]]
        return cls(paths, DaftParams(rec["N"], rec["c1"], rec["c2"]))


def sample_geometry(P, d_max, alpha_max, rng):
    """Delays and Jakes Doppler angles: path 0 at delay 0, the rest uniform on ``0..d_max``."""
    delays = np.concatenate([[0], rng.integers(0, d_max + 1, size=P - 1)]).astype(np.int64)
    theta = rng.uniform(-np.pi, np.pi, size=P)
    return delays, alpha_max * np.cos(theta), theta


def sample_gains(P, rng, size=None):
    shape = (P,) if size is None else (size, P)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5 / P)


def sample_channel(P, d_max, alpha_max, rng, params):
    """Draw one realization: ``h_p ~ CN(0, 1/P)`` and Jakes Doppler ``alpha_max cos(theta)``."""
    if P < 1 or d_max < 0 or alpha_max < 0:
        raise ValueError("need P >= 1, d_max >= 0, alpha_max >= 0")
    gains = sample_gains(P, rng)
    delays, alphas, theta = sample_geometry(P, d_max, alpha_max, rng)
    paths = [PathTriplet(complex(h), int(d), float(a), float(t)) for h, d, a, t in zip(gains, delays, alphas, theta)]
    return ChannelRealization(paths, params)


def cpp_phases(d, c1, N):
    n = np.arange(N, dtype=np.float64)
    return np.where(n < d, np.exp(-2j * np.pi * c1 * (N * N - 2.0 * N * (d - n))), 1.0 + 0j)


def cpp_matrix(d, c1, N):
    """Diagonal chirp-periodic-prefix phase matrix for a path of delay ``d``."""
    if not 0 <= d < N:
        raise ValueError(f"delay {d} outside [0, {N})")
    return np.diag(cpp_phases(d, c1, N))


def doppler_matrix(alpha, N):
    return np.diag(np.exp(-2j * np.pi * alpha * np.arange(N) / N))


def shift_matrix(d, N):
    """``Pi^d``: forward cyclic shift, ``(Pi^d s)[n] = s[(n - d) mod N]``."""
    return np.roll(np.eye(N), d, axis=0)


def time_domain_path(d, alpha, c1, N):
    """``Gamma_CPP Delta_alpha Pi^d`` as a dense ``N x N`` matrix."""
    n = np.arange(N)
    T = np.zeros((N, N), dtype=np.complex128)
    T[n, (n - d) % N] = cpp_phases(d, c1, N) * np.exp(-2j * np.pi * alpha * n / N)
    return T


def per_path_matrix(path, params):
    """DAF-domain matrix ``A Gamma_CPP Delta Pi^d A^H`` of one path (gain excluded)."""
    A = daft_matrix(params)
    return A @ time_domain_path(path.d, path.alpha, params.c1, params.N) @ A.conj().T


def per_path_stack(delays, alphas, params):
    """Batched per-path matrices; ``delays``/``alphas`` of shape ``(..., P)`` -> ``(..., P, N, N)``."""
    N, c1 = params.N, params.c1
    delays = np.asarray(delays)
    alphas = np.asarray(alphas, dtype=np.float64)
    n = np.arange(N)
    rows = np.broadcast_to(n, delays.shape + (N,))
    cols = (rows - delays[..., None]) % N
    vals = np.where(rows < delays[..., None],
                    np.exp(-2j * np.pi * c1 * (N * N - 2.0 * N * (delays[..., None] - rows))), 1.0)
    vals = vals * np.exp(-2j * np.pi * alphas[..., None] * rows / N)
    T = np.zeros(delays.shape + (N, N), dtype=np.complex128)
    np.put_along_axis(T, cols[..., None], vals[..., None], axis=-1)
    A = daft_matrix(params)
    return A @ T @ A.conj().T


def sample_effective_channels(F, P, d_max, alpha_max, rng, params):
    """Draw ``F`` independent channels at once and return their ``h_eff`` stack ``(F, N, N)``."""
    gains = sample_gains(P, rng, size=F)
    delays = np.concatenate([np.zeros((F, 1), np.int64), rng.integers(0, d_max + 1, size=(F, P - 1))], axis=1)
    alphas = alpha_max * np.cos(rng.uniform(-np.pi, np.pi, size=(F, P)))
    Hp = per_path_stack(delays, alphas, params)
    return np.einsum("fp,fpij->fij", gains, Hp)


def awgn(shape, n0, rng):
    """Circular complex Gaussian noise with per-entry variance ``n0``."""
    if n0 == 0:
        return np.zeros(shape, dtype=np.complex128)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(n0 / 2.0)


def apply_channel(x, ch, n0, rng=None):
    """``y = h_eff x + w`` with ``w`` drawn directly in the DAF domain (``A`` is unitary)."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (ch.params.N,):
        raise ValueError(f"expected a length-{ch.params.N} frame")
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    y = ch.h_eff @ x
    if n0 > 0:
        if rng is None:
            raise ValueError("a random generator is required when n0 > 0")
        y = y + awgn(y.shape, n0, rng)
    return y


def simulate_time_domain(x, ch, cpp_len=None):
    """Noise-free reference path: IDAFT, CPP insertion, tapped delay line with Doppler, CPP removal, DAFT.

    Serves as an independent check of the matrix route in :func:`apply_channel`.
    """
    p = ch.params
    N, c1 = p.N, p.c1
    L = max(pp.d for pp in ch.paths) if cpp_len is None else cpp_len
    s = idaft(x, p)
    ext = np.empty(N + L, dtype=np.complex128)
    for m in range(-L, N):
        if m >= 0:
            ext[m + L] = s[m]
        else:
            ext[m + L] = s[N + m] * np.exp(-2j * np.pi * c1 * (N * N + 2 * N * m))
    r = np.zeros(N, dtype=np.complex128)
    for pp in ch.paths:
        for n in range(N):
            r[n] += pp.h * ext[n - pp.d + L] * np.exp(-2j * np.pi * pp.alpha * n / N)
    return daft(r, p)
