import numpy as np
import pytest

from ordmax import corr_models as cm
from ordmax import gp_synth as gs
from ordmax.errors import DimensionMismatch
from ordmax.order_stats import (GridSpec, grid_indices, grid_scale,
                                maxima_pair, order_stat_path)


def _paths(values):
    return np.asarray(values, dtype=float)


def test_second_largest_of_three():
    vals = _paths([[3.0], [1.0], [2.0]])
    assert order_stat_path(vals, 2)[0] == 2.0


def test_single_path_identity():
    vals = _paths([[0.5, -1.0, 2.0]])
    np.testing.assert_array_equal(order_stat_path(vals, 1), vals[0])


def test_bottom_statistic_is_pointwise_min():
    rng = np.random.default_rng(0)
    vals = rng.normal(size=(2, 50))
    np.testing.assert_array_equal(order_stat_path(vals, 2),
                                  np.minimum(vals[0], vals[1]))


def test_monotone_in_selection_depth():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(5, 200))
    prev = order_stat_path(vals, 1)
    for m in range(2, 6):
        cur = order_stat_path(vals, m)
        assert np.all(prev >= cur)
        prev = cur


def test_exchangeability():
    rng = np.random.default_rng(2)
    vals = rng.normal(size=(4, 100))
    base = order_stat_path(vals, 2)
    for _ in range(5):
        perm = rng.permutation(4)
        np.testing.assert_array_equal(order_stat_path(vals[perm], 2), base)


def test_gaussian_path_inputs_share_lattice():
    lat_a = gs.LatticeSpec(0.1, 4)
    lat_b = gs.LatticeSpec(0.2, 4)
    pa = gs.GaussianPath(np.zeros(4), lat_a, 0)
    pb = gs.GaussianPath(np.zeros(4), lat_b, 0)
    with pytest.raises(DimensionMismatch):
        order_stat_path([pa, pb], 1)


def test_bad_depth_rejected():
    vals = _paths([[1.0], [2.0]])
    with pytest.raises(DimensionMismatch):
        order_stat_path(vals, 3)


# --- grids -----------------------------------------------------------------

def test_grid_spec_regimes():
    T, m, alpha = 1000.0, 1, 1.0
    sparse = GridSpec.sparse(10.0, T, m, alpha)
    assert sparse.ratio >= 10.0 - 1e-12
    crit = GridSpec.pickands(1.0, T, m, alpha)
    assert crit.ratio == pytest.approx(1.0)
    dense = GridSpec.dense(0.1, T, m, alpha)
    assert dense.ratio <= 0.1 + 1e-12
    with pytest.raises(ValueError):
        GridSpec.sparse(5.0, T, m, alpha)
    with pytest.raises(ValueError):
        GridSpec.dense(0.5, T, m, alpha)


def test_grid_scale_value():
    assert grid_scale(np.e, 1, 1.0) == pytest.approx(0.5)


def test_maxima_pair_dense_same_points():
    lat = gs.LatticeSpec(0.5, 4)
    # grid step == lattice step: identical point sets
    grid = GridSpec("dense", 0.5, 0.1, 1.01, 1, 1.0)
    osp = np.array([0.5, 1.5, -0.2, 0.9])
    sample = maxima_pair(osp, lat, grid)
    assert sample.m_grid == sample.m_cont == 1.5


def test_maxima_pair_single_point_grid():
    lat = gs.LatticeSpec(0.5, 4)
    grid = GridSpec("sparse", 2.0, 10.0, 40.0, 1, 1.0)  # ratio 14.8
    osp = np.array([0.7, 1.5, -0.2, 0.9])
    # only kp = 0 lies in [0, 1.5]
    sample = maxima_pair(osp, lat, grid)
    assert sample.m_grid == 0.7


def test_maxima_pair_alternate_points():
    lat = gs.LatticeSpec(0.5, 4)
    grid = GridSpec("sparse", 1.0, 10.0, 500.0, 1, 1.0)
    osp = np.array([0.5, 1.5, -0.2, 0.9])
    sample = maxima_pair(osp, lat, grid)
    assert sample.m_cont == 1.5
    assert sample.m_grid == 0.5  # max over indices {0, 2}


def test_offset_grid_snaps_to_nearest_lattice_point():
    # p = 0.8 on a 0.5-lattice: 0.8 is within delta/2 of index 2
    lat = gs.LatticeSpec(0.5, 4)
    grid = GridSpec("sparse", 0.8, 10.4, 665.1, 1, 1.0)
    np.testing.assert_array_equal(grid_indices(lat, grid), [0, 2])


def test_refining_grid_never_decreases_max():
    rng = np.random.default_rng(3)
    lat = gs.LatticeSpec(0.25, 64)
    osp = rng.normal(size=64)
    T = 1.01  # near-unit horizon scale so coarse multiples classify as dense
    maxes = []
    for k in (8, 4, 2, 1):
        grid = GridSpec("dense", k * 0.25, 0.1, T, 1, 1.0)
        maxes.append(maxima_pair(osp, lat, grid).m_grid)
    assert all(a <= b + 1e-15 for a, b in zip(maxes, maxes[1:]))
    assert maxes[-1] == osp.max()


def test_grid_max_never_exceeds_lattice_max():
    rng = np.random.default_rng(4)
    lat = gs.LatticeSpec(0.1, 128)
    for trial in range(20):
        osp = rng.normal(size=128)
        grid = GridSpec("sparse", 0.7, 10.0, 2000.0, 1, 1.0)
        s = maxima_pair(osp, lat, grid)
        assert s.m_grid <= s.m_cont


def test_maxima_pair_length_check():
    lat = gs.LatticeSpec(0.5, 4)
    grid = GridSpec("sparse", 1.0, 10.0, 500.0, 1, 1.0)
    with pytest.raises(DimensionMismatch):
        maxima_pair(np.zeros(5), lat, grid)
