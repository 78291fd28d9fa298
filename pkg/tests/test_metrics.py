import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hefs.adaline import IEC_GRID
from hefs.errors import InvalidSpecError, ShapeError
from hefs.iec import UNITY_SENSATION_AMPLITUDES
from hefs.metrics import convergence_time, error_stats, reconstruct_envelope, sensation
from hefs.pipeline import FrequencyMode, PipelineConfig, run_hefs
from hefs.signal_model import SamplingSpec, distorted_spec, synthesize


def test_sensation_of_reference_table_is_36():
    rep = sensation(UNITY_SENSATION_AMPLITUDES)
    np.testing.assert_allclose(rep.contributions, np.ones(36))
    assert rep.total == pytest.approx(36.0)
    assert "not a flickermeter output" in rep.label


def test_sensation_zero():
    assert sensation(np.zeros(36)).total == 0.0


def test_sensation_single_component():
    est = np.zeros(36)
    est[0] = 0.0234
    assert sensation(est).total == pytest.approx(1.0)


def test_sensation_rejects_bad_input():
    with pytest.raises(ShapeError):
        sensation(np.zeros(35))
    with pytest.raises(InvalidSpecError):
        sensation(np.full(36, -0.1))


def test_reconstruct_constant():
    s = reconstruct_envelope(1.2, np.zeros(36), np.zeros(36), IEC_GRID, SamplingSpec(1200, 0.1))
    np.testing.assert_allclose(s.samples, 1.2)
    assert len(s) == 120


def test_reconstruct_first_sample():
    amps = np.zeros(36)
    amps[IEC_GRID.frequencies.index(5.0)] = 0.02
    s = reconstruct_envelope(1.5, amps, np.zeros(36), IEC_GRID, SamplingSpec(1200, 0.1))
    assert s.samples[0] == pytest.approx(1.515)


def test_reconstruct_matches_direct_formula():
    rng = np.random.default_rng(1)
    amps, ph = rng.uniform(0, 0.02, 36), rng.uniform(-3, 3, 36)
    s = reconstruct_envelope(0.7, amps, ph, IEC_GRID, SamplingSpec(1200, 0.5))
    t = np.arange(600) / 1200
    direct = 0.7 * (1 + sum(0.5 * a * np.cos(2 * np.pi * f * t + p) for f, a, p in zip(IEC_GRID.frequencies, amps, ph)))
    np.testing.assert_allclose(s.samples, direct, atol=1e-13)


def test_reconstruct_rejects_non_positive_amplitude():
    with pytest.raises(InvalidSpecError):
        reconstruct_envelope(0.0, np.zeros(36), np.zeros(36), IEC_GRID, SamplingSpec(1200, 0.1))


def test_error_stats_identical():
    st_ = error_stats([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (st_.mean, st_.variance, st_.mse, st_.max_abs) == (0.0, 0.0, 0.0, 0.0)


def test_error_stats_hand_values():
    st_ = error_stats([1.0, -1.0], [0.0, 0.0])
    assert (st_.mean, st_.variance, st_.mse, st_.max_abs) == (0.0, 1.0, 1.0, 1.0)
    assert st_.to_dict()["variance_kind"] == "population"


def test_error_stats_shape_mismatch():
    with pytest.raises(ShapeError):
        error_stats([1.0], [1.0, 2.0])
    with pytest.raises(ShapeError):
        error_stats([], [])


@pytest.mark.xfail(
    strict=True,
    reason="an H-infinity envelope that follows 25 Hz flicker under sigma=0.02 noise has "
    "sample scatter near 0.018 pu and a startup transient, so its signed mean sits "
    "around -3e-4 to -7e-4, two orders above 5.352e-6",
)
def test_envelope_mean_error_on_distorted_signal():
    spec = distorted_spec(seed=2024)
    cfg = PipelineConfig(frequency_mode=FrequencyMode.tracked()).for_orders(spec.orders)
    mean = run_hefs(synthesize(spec), cfg, truth=spec).errors["envelope_1"].mean
    assert 5.352e-7 <= abs(mean) <= 5.352e-5


def test_convergence_time():
    trace = np.concatenate([np.linspace(0, 1, 100), np.ones(300)])
    # the window of 120 samples first lies entirely on the plateau at sample 99 + 120
    assert convergence_time(trace, 1200.0) == pytest.approx((99 + 120 + 1) / 1200)
    assert math.isinf(convergence_time(np.arange(1.0, 500.0), 1200.0))


@settings(max_examples=50, deadline=None)
@given(arrays(float, 36, elements=st.floats(0, 0.05)), st.floats(0.0, 100.0))
def test_sensation_homogeneous(est, c):
    assert sensation(c * est).total == pytest.approx(c * sensation(est).total, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_mse_is_variance_plus_mean_squared(e):
    s = error_stats(e, np.zeros(len(e)))
    assert s.variance >= 0
    assert s.mse == pytest.approx(s.variance + s.mean**2, rel=1e-12, abs=1e-12)
