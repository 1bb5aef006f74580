import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmafdm import kernels
from mmafdm._accel import HAVE_NUMBA
from conftest import crandn

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_jacobi_flavours_agree(seed, m):
    r = np.random.default_rng(seed)
    D = crandn(r, 7, m, m)
    H = D.conj().transpose(0, 2, 1) @ D
    a = np.sort(kernels.jacobi_eigvalsh(H, use_numba=True), axis=1)
    b = np.sort(kernels.jacobi_eigvalsh(H, use_numba=False), axis=1)
    ref = np.linalg.eigvalsh(H)
    assert np.allclose(a, ref, atol=1e-10 * max(1, ref.max()))
    assert np.allclose(b, ref, atol=1e-10 * max(1, ref.max()))


def test_residual_argmin_flavours_agree(rng):
    F, N = 9, 6
    Y, H = crandn(rng, F, N), crandn(rng, F, N, N)
    head, tail = crandn(rng, 5, N), crandn(rng, 11, N)
    b1, b2 = np.full(F, np.inf), np.full(F, np.inf)
    i1 = kernels.residual_argmin(Y, H, head, tail, b1, use_numba=True)
    i2 = kernels.residual_argmin(Y, H, head, tail, b2, use_numba=False)
    assert np.array_equal(i1, i2)
    assert np.allclose(b1, b2, rtol=1e-12)
    # an incumbent that is already better is left alone
    b3 = b1 / 2
    assert np.all(kernels.residual_argmin(Y, H, head, tail, b3.copy(), use_numba=True) == -1)


def test_pairwise_sums_flavours_agree(rng):
    Phi = crandn(rng, 16, 4, 3)
    E = np.bitwise_count(np.arange(16)[:, None] ^ np.arange(16)[None, :]).astype(np.int64)
    lam = np.array([0.0, 1.0, 100.0])
    a = kernels.pairwise_upep_sums(Phi, E, lam, lam * 4 / 3, 1e-10, use_numba=True)
    b = kernels.pairwise_upep_sums(Phi, E, lam, lam * 4 / 3, 1e-10, use_numba=False)
    assert np.allclose(a, b, rtol=1e-11)
    assert a[0] == pytest.approx(E.sum() / 3)


def test_env_flag_selects_numpy_and_matches():
    import os
    import subprocess
    import sys
    code = ("from mmafdm import _accel; from mmafdm.experiments import ExperimentConfig, run_ber_sweep, format_csv;"
            "print(_accel.USE_NUMBA);"
            "print(format_csv(run_ber_sweep(ExperimentConfig(snr_db=(5.0, 15.0), min_frame_errors=30,"
            " max_frames=600, chunk_frames=100, seed=2))), end='')")
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, MMAFDM_DISABLE_NUMBA=flag)
        r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        outs.append(r.stdout.split("\n", 1))
    assert outs[0][0] == "False" and outs[1][0] == "True"
    assert outs[0][1] == outs[1][1]
