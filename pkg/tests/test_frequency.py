import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hefs.errors import InsufficientDataError
from hefs.frequency import rising_crossings, track_frequency
from hefs.signal_model import (
    HarmonicComponent,
    SampleSeries,
    SamplingSpec,
    WaveformSpec,
    distorted_spec,
    synthesize,
)


def _cosine(f0, amp=1.0, phase=0.3, duration=1.0):
    spec = WaveformSpec((HarmonicComponent(1, amp, phase),), sampling=SamplingSpec(1200, duration, f0))
    return synthesize(spec)


def test_pure_50hz():
    est = track_frequency(_cosine(50.0))
    assert est.frequency == pytest.approx(50.0, abs=1e-3)
    assert est.confidence_window >= 0
    assert est.window_samples == 1200


@pytest.mark.parametrize("f0", [49.5, 50.0, 50.5])
def test_distorted_noisy_signal(f0):
    est = track_frequency(synthesize(distorted_spec(sigma=0.02, duration=1.0, power_frequency=f0, seed=5)))
    assert est.frequency == pytest.approx(f0, abs=0.05)


def test_offset_is_added():
    s = _cosine(50.0)
    assert track_frequency(s, offset=0.5).frequency == pytest.approx(track_frequency(s).frequency + 0.5)


def test_heavier_noise_widens_confidence():
    quiet = synthesize(distorted_spec(sigma=0.01, duration=1.0, seed=1))
    loud = synthesize(distorted_spec(sigma=0.2, duration=1.0, seed=1))
    assert track_frequency(loud).confidence_window > track_frequency(quiet).confidence_window


def test_short_series_rejected():
    with pytest.raises(InsufficientDataError):
        track_frequency(SampleSeries(np.ones(95), 1200.0))


def test_rising_crossings_interpolates():
    x = np.array([-1.0, 1.0, 1.0, -1.0, -1.0, 0.5])
    np.testing.assert_allclose(rising_crossings(x, 0.1), [0.5, 4 + 1 / 1.5])


@settings(max_examples=30, deadline=None)
@given(st.floats(45.0, 55.0), st.floats(0.0, 2 * math.pi))
def test_noiseless_cosine_accuracy(f0, phase):
    assert abs(track_frequency(_cosine(f0, phase=phase)).frequency - f0) < 1e-3


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 50.0))
def test_amplitude_scaling_invariance(c):
    s = synthesize(distorted_spec(sigma=0.02, duration=0.5, seed=2))
    scaled = SampleSeries(c * s.samples, s.rate)
    assert track_frequency(scaled).frequency == pytest.approx(track_frequency(s).frequency, rel=1e-9)
