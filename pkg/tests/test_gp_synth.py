import io
import math

import numpy as np
import pytest

from ordmax import corr_models as cm
from ordmax import gp_synth as gs
from ordmax.errors import EmbeddingNotPSD


def test_lattice_horizon_exact():
    lat = gs.LatticeSpec(0.25, 9)
    assert lat.horizon == 0.25 * 8
    assert len(lat.times()) == 9


def test_spectrum_three_point_exponential():
    # row [1, e^-1, e^-2, e^-1]: eigenvalues computable by hand via the
    # 4-point discrete Fourier transform
    spec = gs.circulant_spectrum(cm.exp_alpha(1.0), gs.LatticeSpec(1.0, 3))
    e1, e2 = math.exp(-1), math.exp(-2)
    expected = sorted([1 + 2 * e1 + e2, 1 - e2, 1 - 2 * e1 + e2, 1 - e2],
                      reverse=True)
    np.testing.assert_allclose(np.sort(spec.eigenvalues)[::-1], expected,
                               rtol=1e-12)


def test_spectrum_two_point_closed_form():
    for model in (cm.exp_alpha(0.7), cm.polya_log(1.0)):
        delta = 0.4
        spec = gs.circulant_spectrum(model, gs.LatticeSpec(delta, 2))
        r1 = cm.evaluate(model, delta)
        np.testing.assert_allclose(sorted(spec.eigenvalues),
                                   sorted([1 + r1, 1 - r1]), rtol=1e-12)


def test_gaussian_kernel_embedding_nonnegative():
    spec = gs.circulant_spectrum(cm.exp_alpha(2.0),
                                 gs.LatticeSpec(0.05, 4096))
    assert np.all(spec.eigenvalues >= 0)


def test_bad_row_raises():
    row = np.array([1.0, 0.9, 0.1, 0.9])
    with pytest.raises(EmbeddingNotPSD):
        gs._eigenvalues_from_row(row, "synthetic")


def test_sampling_determinism():
    spec = gs.circulant_spectrum(cm.exp_alpha(1.0), gs.LatticeSpec(0.1, 64))
    a = gs.sample_path(spec, 123)
    b = gs.sample_path(spec, 123)
    np.testing.assert_array_equal(a.values, b.values)
    c = gs.sample_path(spec, 124)
    assert not np.array_equal(a.values, c.values)


@pytest.fixture(scope="module")
def exp_paths():
    spec = gs.circulant_spectrum(cm.exp_alpha(1.0), gs.LatticeSpec(0.3, 12))
    return gs.sample_paths(spec, 100_000, 2024), 0.3


def test_marginal_variance(exp_paths):
    paths, _ = exp_paths
    var = paths[:, 0].var()
    se = math.sqrt(2.0 / len(paths))
    assert abs(var - 1.0) <= 3 * se


def test_lag_one_covariance(exp_paths):
    paths, delta = exp_paths
    cov = np.mean(paths[:, 0] * paths[:, 1])
    se = math.sqrt(2.0 / len(paths))
    assert abs(cov - math.exp(-delta)) <= 3 * se


@pytest.mark.parametrize("model", [cm.exp_alpha(1.0), cm.exp_alpha(2.0),
                                   cm.polya_log(1.0)])
def test_full_covariance_lags_zero_to_five(model):
    delta = 0.3
    spec = gs.circulant_spectrum(model, gs.LatticeSpec(delta, 8))
    paths = gs.sample_paths(spec, 100_000, 99)
    se = math.sqrt(2.0 / len(paths))
    for lag in range(6):
        emp = np.mean(paths[:, 0] * paths[:, lag])
        want = cm.evaluate(model, lag * delta)
        assert abs(emp - want) <= 4 * se, (model.family, lag)


def test_windowed_sampler_matches_covariance():
    model = cm.exp_alpha(1.0)
    lat = gs.LatticeSpec(0.3, 16)
    sampler = gs.PathSampler(model, lat)
    assert sampler.windows > 0
    paths = sampler.sample(100_000, 5)
    se = math.sqrt(2.0 / len(paths))
    for lag in (0, 1, 5):
        emp = np.mean(paths[:, 0] * paths[:, lag])
        assert abs(emp - cm.evaluate(model, lag * 0.3)) <= 4 * se


def test_windowed_sampler_cross_replicate_independence():
    sampler = gs.PathSampler(cm.exp_alpha(1.0), gs.LatticeSpec(0.3, 16))
    paths = sampler.sample(50_000, 6)
    # adjacent replicates come from adjacent windows of one draw
    cross = np.mean(paths[:-1, -1] * paths[1:, 0])
    assert abs(cross) <= 4 / math.sqrt(len(paths))


def test_windowing_refused_for_long_range_models():
    assert gs.windowing_gap(cm.polya_log_infty(0.5), 0.01) is None
    sampler = gs.PathSampler(cm.polya_log_infty(0.5), gs.LatticeSpec(0.1, 32))
    assert sampler.windows == 0


def test_fbm_starts_at_zero_and_is_deterministic():
    lat = gs.LatticeSpec(1 / 64, 65)
    path = gs.sample_fbm(0.7, lat, 11)
    assert path.values[0] == 0.0
    again = gs.sample_fbm(0.7, lat, 11)
    np.testing.assert_array_equal(path.values, again.values)


def test_brownian_special_case_iid_increments():
    lat = gs.LatticeSpec(1 / 64, 65)
    paths = gs.sample_fbm_paths(0.5, lat, 100_000, 21)
    inc = np.diff(paths, axis=1) / math.sqrt(1 / 64)
    corr = np.mean(inc[:, 0] * inc[:, 1])
    assert abs(corr) <= 3 / math.sqrt(len(paths))
    assert abs(inc[:, 0].var() - 1.0) <= 3 * math.sqrt(2 / len(paths))


def test_fbm_unit_variance_at_one(subtests=None):
    lat = gs.LatticeSpec(1 / 64, 65)
    paths = gs.sample_fbm_paths(0.4, lat, 100_000, 31)
    var = paths[:, -1].var()
    assert abs(var - 1.0) <= 3 * math.sqrt(2 / len(paths))


def test_fbm_self_similarity():
    lat = gs.LatticeSpec(1 / 64, 65)
    hurst = 0.7
    paths = gs.sample_fbm_paths(hurst, lat, 100_000, 41)
    for t in (0.25, 0.5, 1.0):
        k = int(round(t * 64))
        ratio = paths[:, k].var() / t ** (2 * hurst)
        assert abs(ratio - 1.0) <= 3 * math.sqrt(2 / len(paths)), t


def test_fbm_degenerate_hurst_one():
    # H = 1 collapses to B(t) = t Z; needed for the alpha = 2 envelopes
    lat = gs.LatticeSpec(0.25, 5)
    paths = gs.sample_fbm_paths(1.0, lat, 200, 51)
    slopes = paths[:, -1] / lat.horizon
    np.testing.assert_allclose(paths, np.outer(slopes, lat.times()),
                               atol=1e-12)


def test_fbm_rejects_bad_hurst():
    with pytest.raises(ValueError):
        gs.fgn_spectrum(1.2, 8)
    with pytest.raises(ValueError):
        gs.fgn_spectrum(0.0, 8)


def test_path_csv_dump_has_header():
    lat = gs.LatticeSpec(0.5, 3)
    path = gs.GaussianPath(np.array([0.1, -0.2, 0.3]), lat, 7)
    buf = io.StringIO()
    gs.dump_path_csv(path, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "index,t,value"
    assert len(lines) == 4
    assert lines[1].startswith("0,0,")
