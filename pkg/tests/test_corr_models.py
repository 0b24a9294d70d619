import math

import numpy as np
import pytest

from ordmax import corr_models as cm
from ordmax.errors import ValidationFailure

ALL_MODELS = [
    cm.exp_alpha(0.5),
    cm.exp_alpha(1.0),
    cm.exp_alpha(1.5),
    cm.exp_alpha(2.0),
    cm.polya_log(0.5),
    cm.polya_log(1.0),
    cm.polya_log(2.0),
    cm.polya_log_infty(0.3),
    cm.polya_log_infty(0.5),
    cm.polya_log_infty(0.8),
]


def test_evaluate_at_zero_is_one_exactly():
    for model in ALL_MODELS:
        assert cm.evaluate(model, 0.0) == 1.0


def test_exp_alpha_half_life():
    assert cm.evaluate(cm.exp_alpha(1.0), math.log(2)) == pytest.approx(0.5)


def test_strictly_below_one_for_positive_lags():
    ts = np.concatenate([np.logspace(-8, 8, 50)])
    for model in ALL_MODELS:
        vals = cm.evaluate(model, ts)
        assert np.all(vals < 1.0)
        assert np.all(np.abs(vals) <= 1.0)


def test_even_in_t():
    ts = np.array([0.1, 1.0, 7.3, 250.0])
    for model in ALL_MODELS:
        np.testing.assert_array_equal(cm.evaluate(model, ts),
                                      cm.evaluate(model, -ts))


@pytest.mark.parametrize("t", [1e-2, 1e-3, 1e-4])
def test_unit_local_coefficient(t):
    # (1 - r(t)) / t^alpha -> 1; within 10% already at t = 1e-2
    for model in ALL_MODELS:
        ratio = (1.0 - cm.evaluate(model, t)) / t ** model.alpha
        assert abs(ratio - 1.0) <= 0.1, (model.family, model.alpha, t)


def test_local_deviation_bound_small_lags():
    for model in ALL_MODELS:
        for t in (1e-2, 3e-3, 1e-3):
            lhs = abs(1.0 - cm.evaluate(model, t) - t ** model.alpha)
            assert lhs <= 0.1 * t ** model.alpha


def test_long_range_limits():
    assert cm.long_range_limit(cm.exp_alpha(1.0)) == 0.0
    assert cm.long_range_limit(cm.polya_log(1.0)) == 1.0
    assert cm.long_range_limit(cm.polya_log_infty(0.5)) == math.inf


def test_long_range_probe_polya_log():
    # r(t) ln t creeps up to the limit; the largest probe is within 5%
    probes = cm.probe_long_range(cm.polya_log(1.0))
    assert probes[0] < probes[1] < probes[2]
    assert abs(probes[2] - 1.0) <= 0.05
    # at t = 1e6 the deficit is still ~0.07 for this family
    assert abs(probes[1] - 1.0) <= 0.08


def test_long_range_probe_divergence():
    probes = cm.probe_long_range(cm.polya_log_infty(0.5))
    assert probes[2] > probes[1] > probes[0]
    assert probes[2] > 3.0


def test_exp_alpha_probe_vanishes():
    probes = cm.probe_long_range(cm.exp_alpha(1.0))
    assert probes[-1] < 1e-10


def test_polya_families_convex_decreasing():
    ts = np.linspace(0.0, 50.0, 2001)
    for model in ALL_MODELS:
        if model.family == "exp_alpha":
            continue
        vals = cm.evaluate(model, ts)
        assert np.all(np.diff(vals) < 0)
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert second.min() >= -1e-9


@pytest.mark.parametrize("theorem", ["T21", "T22", "T23"])
def test_finite_r_models_pass_weak_laws(theorem):
    for model in (cm.exp_alpha(1.0), cm.polya_log(1.0)):
        report = cm.validate_for_theorem(model, theorem)
        assert report.theorem == theorem
        assert all(ok for _, ok, _ in report.checks)


def test_exp_alpha_fails_strong_law():
    with pytest.raises(ValidationFailure, match="not inf"):
        cm.validate_for_theorem(cm.exp_alpha(1.0), "T24")


def test_polya_log_infty_passes_strong_law():
    report = cm.validate_for_theorem(cm.polya_log_infty(0.5), "T24")
    names = [name for name, _, _ in report.checks]
    assert "convexity" in names and "monotone_r_ln_t" in names


def test_infinite_r_model_fails_weak_laws():
    with pytest.raises(ValidationFailure, match="not finite"):
        cm.validate_for_theorem(cm.polya_log_infty(0.5), "T21")


def test_config_round_trip():
    for model in ALL_MODELS:
        back = cm.from_config_dict(cm.to_config_dict(model))
        assert back == model


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        cm.exp_alpha(3.0)
    with pytest.raises(ValueError):
        cm.polya_log(-1.0)
    with pytest.raises(ValueError):
        cm.polya_log_infty(1.5)
