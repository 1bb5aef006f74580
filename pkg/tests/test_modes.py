import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmafdm.modes import (ModeSet, PartitionError, build_modes, min_distances, partition_psk, partition_qam,
                          predicted_distances, qam_grid)


def brute_mird(points):
    best = math.inf
    for a, b in combinations(range(len(points)), 2):
        best = min(best, np.abs(points[a][:, None] - points[b][None, :]).min())
    return best


@pytest.mark.parametrize("M,U", [(2, 2), (4, 2), (4, 4)])
def test_psk_mird(M, U):
    ms = partition_psk(M, U)
    assert abs(brute_mird(ms.points) - 2 * math.sin(math.pi / (M * U))) < 1e-9


def test_psk_intra_spacing_is_interleaved():
    miad, _ = min_distances(partition_psk(4, 2))
    assert miad == pytest.approx(2 * math.sin(math.pi * 4 / 8))


def test_psk_single_mode():
    miad, mird = min_distances(partition_psk(1, 4))
    assert mird == math.inf
    assert miad == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("M,U", [(4, 2), (2, 4), (8, 2), (4, 4), (2, 8)])
def test_qam_search_reaches_target(M, U):
    ms = partition_qam(M, U)
    assert brute_mird(ms.points) >= 2 * math.sqrt(6) / math.sqrt(5 * M * U - 4) - 1e-9
    assert np.mean(np.abs(ms.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert set(np.round(ms.points.ravel(), 12)) == set(np.round(qam_grid(M * U) / ms.energy_scale, 12))


def test_qam_8_point_values():
    miad, mird = min_distances(partition_qam(4, 2))
    assert mird == pytest.approx(2 * math.sqrt(6) / 6, abs=1e-9)
    # the search beats the closed-form intra-mode prediction on the 4x2 grid
    assert miad >= predicted_distances("QAM", 4, 2)[0]


def test_qam_4_point_all_partitions():
    grid = qam_grid(4)
    grid = grid / np.sqrt(np.mean(np.abs(grid) ** 2))
    best = max(brute_mird([grid[list(c)], grid[[i for i in range(4) if i not in c]]])
               for c in combinations(range(4), 2))
    assert min_distances(partition_qam(2, 2))[1] == pytest.approx(best)


def test_qam_32_uses_cosets():
    ms = partition_qam(16, 2)
    assert ms.M == 16 and ms.U == 2
    assert min_distances(ms)[1] >= 2 * math.sqrt(6) / math.sqrt(5 * 32 - 4) - 1e-9


def test_invalid_partitions():
    with pytest.raises(PartitionError):
        partition_qam(3, 2)
    with pytest.raises(ValueError):
        build_modes("APSK", 2, 2)


def test_modeset_rejects_overlap():
    pts = np.array([[1.0, -1.0], [1.0, 1j]])
    with pytest.raises(ValueError):
        ModeSet(pts / np.sqrt(np.mean(np.abs(pts) ** 2)), "QAM", 1.0)


def test_two_singleton_modes():
    pts = np.array([[-1.0 + 0j], [1.0 + 0j]])
    miad, mird = min_distances(ModeSet(pts, "QAM", 1.0))
    assert miad == math.inf and mird == pytest.approx(2.0)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([("QAM", 4, 2), ("QAM", 4, 4), ("PSK", 4, 2), ("QAM", 2, 4)]), st.randoms())
def test_distances_permutation_invariant(case, rnd):
    kind, M, U = case
    ms = build_modes(kind, M, U)
    pts = [list(row) for row in ms.points]
    rnd.shuffle(pts)
    for row in pts:
        rnd.shuffle(row)
    shuffled = ModeSet(np.array(pts), ms.parent_kind, ms.energy_scale)
    assert min_distances(shuffled) == pytest.approx(min_distances(ms))
