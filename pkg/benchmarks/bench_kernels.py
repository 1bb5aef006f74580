"""Time the numba and pure-numpy flavours of the hot kernels on realistic shapes.

    python benchmarks/bench_kernels.py [--repeat R]

The numpy flavour is what runs when MMAFDM_DISABLE_NUMBA=1 is set.
"""
import argparse
import time

import numpy as np

from mmafdm import kernels
from mmafdm._accel import HAVE_NUMBA
from mmafdm.analysis import bit_error_matrix
from mmafdm.channel import per_path_stack, sample_effective_channels, sample_geometry
from mmafdm.codec import SystemParams
from mmafdm.detector import frames_from_values, mm_candidate_groups
from mmafdm.modes import build_modes


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    ms = build_modes("QAM", 4, 2)

    sp = SystemParams(4, 1, 4, 2, 2)
    (g,) = mm_candidate_groups(ms, sp)
    H = sample_effective_channels(2000, 3, 1, 1.0, rng, sp.daft)
    Y = np.einsum("fij,fj->fi", H, frames_from_values(rng.integers(512, size=2000), ms, sp))
    yield "ML search, 2000 frames x 2^9", lambda nb: kernels.residual_argmin(
        Y, H, g.head, g.tail, np.full(2000, np.inf), use_numba=nb)

    sp2 = SystemParams(8, 2, 4, 2, 2)
    (g2,) = mm_candidate_groups(ms, sp2)
    H2 = sample_effective_channels(20, 3, 1, 1.0, rng, sp2.daft)
    Y2 = np.einsum("fij,fj->fi", H2, frames_from_values(rng.integers(1 << 18, size=20), ms, sp2))
    yield "ML search, 20 frames x 2^18", lambda nb: kernels.residual_argmin(
        Y2, H2, g2.head, g2.tail, np.full(20, np.inf), use_numba=nb)

    d, a, _ = sample_geometry(3, 1, 1.0, rng)
    Phi = np.einsum("pnm,km->knp", per_path_stack(d, a, sp.daft), frames_from_values(np.arange(512), ms, sp))
    E = bit_error_matrix(9)
    lam = 1.0 / (4.0 * 10.0 ** (-np.arange(0, 31, 5) / 10.0))
    yield "union bound, one geometry (130816 pairs)", lambda nb: kernels.pairwise_upep_sums(
        Phi, E, lam, lam * 4 / 3, 1e-10, use_numba=nb)

    D = rng.standard_normal((20000, 3, 3)) + 1j * rng.standard_normal((20000, 3, 3))
    U = D.conj().transpose(0, 2, 1) @ D
    yield "Jacobi eigenvalues, 20000 x 3x3", lambda nb: kernels.jacobi_eigvalsh(U, use_numba=nb)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':44s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fn in cases(np.random.default_rng(0)):
        fn(True)  # compile
        t_nb = best_of(lambda: fn(True), args.repeat)
        t_np = best_of(lambda: fn(False), args.repeat)
        print(f"{name:44s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
