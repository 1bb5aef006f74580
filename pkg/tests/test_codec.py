from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmafdm.codec import (SystemParams, assemble_frame, bits_to_int, count_patterns, decode_subblock, decode_words,
                          disassemble_frame, encode_subblock, encode_words, gray, gray_inverse, int_to_bits,
                          rank_cap, rank_map, split_index, state_from_vector, unrank_cap, unrank_map)
from mmafdm.modes import build_modes

TABLE1_MAP = [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]]
TABLE1_CAP = [[1, 1, 2, 2], [1, 2, 1, 2], [1, 2, 2, 1], [2, 1, 1, 2], [2, 1, 2, 1], [2, 2, 1, 1]]


def admissible():
    """Every (M, n, k, U) with M*U <= 16 and n <= 6 (PSK parent when M is not a power of two)."""
    out = []
    for M in range(1, 9):
        for U in (2, 4, 8, 16):
            if M * U > 16:
                continue
            for n in range(1, 7):
                for k in range(1, M + 1):
                    if n % k == 0:
                        out.append((M, n, k, U))
    return out


def modes_for(M, U):
    return build_modes("QAM" if M >= 2 and M & (M - 1) == 0 else "PSK", M, U)


def test_table1_rows():
    assert [unrank_map(i, 4, 2) for i in range(6)] == TABLE1_MAP
    assert [unrank_cap(i, 4, 2) for i in range(6)] == TABLE1_CAP


@pytest.mark.parametrize("M,n,k,expected", [(4, 4, 2, (6, 6, 5)), (2, 2, 2, (1, 2, 1)), (4, 2, 1, (4, 1, 2))])
def test_count_patterns(M, n, k, expected):
    assert count_patterns(M, n, k) == expected


def test_count_patterns_errors():
    with pytest.raises(ValueError):
        count_patterns(4, 3, 2)
    with pytest.raises(ValueError):
        count_patterns(2, 4, 3)


def test_small_layouts():
    sp = SystemParams(4, 1, 4, 2, 2)
    assert (sp.b1, sp.b2, sp.B) == (5, 4, 9)
    assert sp.c1 == pytest.approx(0.625)
    assert SystemParams(8, 2, 4, 2, 2).spectral_efficiency == 2.25


def test_split_index_example():
    assert split_index(31, 6, 5) == (1, 5)
    assert unrank_map(1, 4, 2) == [1, 3]
    with pytest.raises(ValueError):
        split_index(32, 6, 5)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda M: st.tuples(st.just(M), st.integers(1, M))), st.data())
def test_map_rank_roundtrip(Mk, data):
    M, k = Mk
    i = data.draw(st.integers(0, comb(M, k) - 1))
    pattern = unrank_map(i, M, k)
    assert pattern == sorted(set(pattern)) and len(pattern) == k
    assert rank_map(pattern, M, k) == i


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(n, k) for n in range(1, 9) for k in range(1, n + 1) if n % k == 0]), st.data())
def test_cap_rank_roundtrip(nk, data):
    n, k = nk
    total = factorial(n) // factorial(n // k) ** k
    i = data.draw(st.integers(0, total - 1))
    arr = unrank_cap(i, n, k)
    assert all(arr.count(s) == n // k for s in range(1, k + 1))
    assert rank_cap(arr, n, k) == i


def test_unrank_out_of_range():
    with pytest.raises(ValueError):
        unrank_map(6, 4, 2)
    with pytest.raises(ValueError):
        unrank_cap(6, 4, 2)
    with pytest.raises(ValueError):
        rank_cap([1, 1, 1, 2], 4, 2)


def test_gray():
    assert [gray(v) for v in range(4)] == [0, 1, 3, 2]
    assert all(gray_inverse(gray(v)) == v for v in range(256))
    assert bits_to_int(int_to_bits(37, 8)) == 37


def test_subblock_worked_example():
    sp, ms = SystemParams(4, 1, 4, 2, 2), build_modes("QAM", 4, 2)
    bits = [1, 1, 1, 1, 1, 0, 1, 0, 1]
    st_ = encode_subblock(bits, ms, sp)
    assert (st_.i_map, st_.i_cap) == (1, 5)
    # CAP 5 = [S2, S2, S1, S1] with MAP 1 = [M1, M3] -> modes (3, 3, 1, 1)
    assert st_.mode_assignment == (2, 2, 0, 0)
    assert decode_subblock(st_, ms, sp) == bits


def test_encode_rejects_bad_bits():
    sp, ms = SystemParams(4, 1, 4, 2, 2), build_modes("QAM", 4, 2)
    with pytest.raises(ValueError):
        encode_subblock([0] * 8, ms, sp)
    with pytest.raises(ValueError):
        encode_subblock([2] + [0] * 8, ms, sp)


def test_decode_rejects_unaddressable_pattern():
    # M=4, n=4, k=2 has 36 patterns but only 32 are addressable
    sp, ms = SystemParams(4, 1, 4, 2, 2), build_modes("QAM", 4, 2)
    x = np.array([ms.points[3, 0], ms.points[3, 0], ms.points[2, 0], ms.points[2, 0]])
    state = state_from_vector(x, ms, sp)
    assert state.i_map + sp.n_map * state.i_cap >= 32
    with pytest.raises(ValueError):
        decode_subblock(state, ms, sp)
    assert decode_words(x[None], ms, sp)[0] == -1


def test_scalar_codec_exhaustive_small():
    sp, ms = SystemParams(4, 1, 4, 2, 2), build_modes("QAM", 4, 2)
    for v in range(1 << sp.b):
        bits = int_to_bits(v, sp.b)
        state = encode_subblock(bits, ms, sp)
        assert decode_subblock(state, ms, sp) == bits
        assert decode_subblock(state_from_vector(state.symbols, ms, sp), ms, sp) == bits


@pytest.mark.parametrize("M,n,k,U", admissible())
def test_codec_bijection_exhaustive(M, n, k, U):
    ms = modes_for(M, U)
    sp = SystemParams(n, 1, M, k, U)
    words = np.arange(1 << sp.b, dtype=np.int64)
    for c0 in range(0, len(words), 1 << 17):
        w = words[c0:c0 + (1 << 17)]
        X = encode_words(w, ms, sp)
        assert np.array_equal(decode_words(X, ms, sp), w)
    # every used pattern keeps exactly k distinct modes, each on n/k chirps
    X = encode_words(words[:: max(1, len(words) >> 10)], ms, sp)
    for row in X:
        modes = np.argmin(np.abs(row[:, None] - ms.points.ravel()), axis=1) // U
        counts = np.bincount(modes, minlength=M)
        assert sorted(counts[counts > 0]) == [n // k] * k


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([c for c in admissible() if c[1] >= 2]), st.data())
def test_vector_codec_matches_scalar(case, data):
    M, n, k, U = case
    ms, sp = modes_for(M, U), SystemParams(n, 1, M, k, U)
    v = data.draw(st.integers(0, (1 << sp.b) - 1))
    bits = int_to_bits(v, sp.b)
    state = encode_subblock(bits, ms, sp)
    assert np.array_equal(encode_words([v], ms, sp)[0], state.symbols)
    assert decode_subblock(state, ms, sp) == bits


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**18 - 1))
def test_frame_roundtrip(v):
    sp, ms = SystemParams(8, 2, 4, 2, 2), build_modes("QAM", 4, 2)
    bits = int_to_bits(v, sp.B)
    x = assemble_frame(bits, ms, sp)
    assert x.shape == (8,)
    assert disassemble_frame(x, ms, sp) == bits
