import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hefs.errors import InvalidSpecError, UnknownFrequencyError
from hefs.iec import GRID_FREQUENCIES, UNITY_SENSATION_AMPLITUDES, iec_reference_amplitude
from hefs.signal_model import (
    FlickerComponent,
    HarmonicComponent,
    NoiseSpec,
    SamplingSpec,
    WaveformSpec,
    base_voltage,
    distorted_spec,
    single_flicker_spec,
    synthesize,
    true_envelopes,
    true_relative_amplitudes,
)


def _harmonics(amps):
    return tuple(HarmonicComponent(i + 1, a, 0.0) for i, a in enumerate(amps))


def test_base_voltage_distorted_amplitudes():
    # sqrt(1.5^2 + 0.5^2 + 0.2^2 + 0.15^2 + 0.1^2) evaluated independently
    expected = math.sqrt(2.25 + 0.25 + 0.04 + 0.0225 + 0.01)
    assert base_voltage(distorted_spec()) == pytest.approx(expected, rel=1e-15)
    assert base_voltage(distorted_spec()) == pytest.approx(1.60390, abs=5e-6)


def test_base_voltage_trivial_cases():
    assert base_voltage(WaveformSpec(_harmonics([1.5]))) == 1.5
    assert base_voltage(WaveformSpec(_harmonics([1.0, 0.0]))) == 1.0


def test_base_voltage_rejects_empty():
    with pytest.raises(InvalidSpecError):
        base_voltage(WaveformSpec(()))


def test_synthesize_unit_cosine_at_zero():
    spec = WaveformSpec(_harmonics([1.5]), sampling=SamplingSpec(1200, 0.01))
    assert synthesize(spec).samples[0] == 1.5


def test_synthesize_single_flicker_first_sample():
    spec = single_flicker_spec(5.0, 0.02, 0.0, sigma=0.0)
    assert synthesize(spec).samples[0] == pytest.approx(1.5 * math.cos(math.radians(80)) * 1.01, abs=1e-12)
    # 0.263081 is a rounded hand value; the exact product is 0.2630770
    assert synthesize(spec).samples[0] == pytest.approx(0.263081, abs=1e-5)


def test_synthesize_matches_direct_formula():
    spec = distorted_spec(sigma=0.0, duration=0.05)
    t = np.arange(60) / 1200.0
    m = 1 + sum(0.5 * a * np.cos(2 * np.pi * f * t) for f, a in zip(GRID_FREQUENCIES, UNITY_SENSATION_AMPLITUDES))
    carrier = sum(v * np.cos(2 * np.pi * n * 50 * t + math.radians(p)) for n, v, p in
                  [(1, 1.5, 80), (3, 0.5, 60), (5, 0.2, 45), (7, 0.15, 36), (11, 0.1, 30)])
    np.testing.assert_allclose(synthesize(spec).samples, carrier * m, atol=1e-12)


def test_noiseless_synthesis_is_deterministic():
    spec = distorted_spec(sigma=0.0, duration=0.2)
    np.testing.assert_array_equal(synthesize(spec).samples, synthesize(spec).samples)


def test_seeded_noise_is_reproducible_and_seed_dependent():
    a = synthesize(distorted_spec(duration=0.2, seed=7)).samples
    b = synthesize(distorted_spec(duration=0.2, seed=7)).samples
    c = synthesize(distorted_spec(duration=0.2, seed=8)).samples
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_noise_has_requested_sigma():
    clean = synthesize(distorted_spec(sigma=0.0, duration=20)).samples
    noisy = synthesize(distorted_spec(sigma=0.02, duration=20, seed=3)).samples
    assert np.std(noisy - clean) == pytest.approx(0.02, rel=0.02)


def test_nyquist_violation_rejected():
    spec = WaveformSpec((HarmonicComponent(13, 1.0, 0.0),), sampling=SamplingSpec(1200, 0.1))
    with pytest.raises(InvalidSpecError):
        synthesize(spec)


@pytest.mark.parametrize(
    "kwargs",
    [dict(order=0, amplitude=1.0, phase=0.0), dict(order=1, amplitude=-1.0, phase=0.0)],
)
def test_harmonic_invariants(kwargs):
    with pytest.raises(InvalidSpecError):
        HarmonicComponent(**kwargs)


def test_duplicate_orders_rejected():
    with pytest.raises(InvalidSpecError):
        WaveformSpec((HarmonicComponent(1, 1.0, 0.0), HarmonicComponent(1, 0.5, 0.0)))


def test_negative_sigma_rejected():
    with pytest.raises(InvalidSpecError):
        NoiseSpec(-0.1)


def test_spec_json_round_trip():
    spec = distorted_spec(sigma=0.01, duration=1.5, seed=11)
    again = WaveformSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()
    np.testing.assert_array_equal(synthesize(again).samples, synthesize(spec).samples)


def test_spec_from_dict_reports_missing_keys():
    with pytest.raises(InvalidSpecError):
        WaveformSpec.from_dict({"harmonics": []})


def test_phases_are_given_in_degrees_at_the_boundary():
    spec = WaveformSpec.from_dict(
        {"duration_s": 0.01, "harmonics": [{"order": 1, "amplitude_pu": 1.0, "phase_deg": 90.0}]}
    )
    assert spec.harmonics[0].phase == pytest.approx(math.pi / 2)


def test_true_envelopes_scale_with_harmonic():
    spec = distorted_spec(sigma=0.0, duration=0.5)
    env = true_envelopes(spec)
    np.testing.assert_allclose(env[:, 1] / env[:, 0], 0.5 / 1.5)


def test_true_relative_amplitudes_on_grid():
    np.testing.assert_allclose(true_relative_amplitudes(distorted_spec()), UNITY_SENSATION_AMPLITUDES)


@pytest.mark.parametrize("freq, value", [(0.5, 0.0234), (8.8, 0.0025), (25.0, 0.01042), (1.0, 0.01432)])
def test_iec_reference_amplitude_table(freq, value):
    assert iec_reference_amplitude(freq) == value


def test_iec_reference_off_grid():
    with pytest.raises(UnknownFrequencyError):
        iec_reference_amplitude(8.7)


def test_grid_is_36_increasing():
    assert len(GRID_FREQUENCIES) == 36
    assert all(b > a for a, b in zip(GRID_FREQUENCIES, GRID_FREQUENCIES[1:]))


amps = st.lists(st.floats(0.0, 2.0), min_size=1, max_size=5).filter(lambda a: max(a) > 1e-6)


@settings(max_examples=40, deadline=None)
@given(amps, st.lists(st.floats(0.0, 2 * math.pi), min_size=5, max_size=5))
def test_unmodulated_samples_bounded(a, phases):
    harmonics = tuple(HarmonicComponent(2 * i + 1, v, p) for i, (v, p) in enumerate(zip(a, phases)))
    z = synthesize(WaveformSpec(harmonics, sampling=SamplingSpec(1200, 0.05))).samples
    assert np.all(np.abs(z) <= sum(a) + 1e-12)


@settings(max_examples=40, deadline=None)
@given(amps, st.floats(0.01, 10.0))
def test_harmonic_scaling_scales_samples(a, c):
    flick = (FlickerComponent(5.0, 0.02, 0.3), FlickerComponent(12.0, 0.01, 1.0))
    base = WaveformSpec(_harmonics(a), flick, SamplingSpec(1200, 0.05))
    scaled = WaveformSpec(_harmonics([c * v for v in a]), flick, SamplingSpec(1200, 0.05))
    np.testing.assert_allclose(synthesize(scaled).samples, c * synthesize(base).samples, rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.permutations([1.5, 0.5, 0.2, 0.15, 0.1]))
def test_base_voltage_order_invariant(perm):
    ref = base_voltage(distorted_spec())
    assert base_voltage(WaveformSpec(_harmonics(perm))) == pytest.approx(ref, rel=1e-15)
