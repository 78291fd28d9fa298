"""Waveform specifications and synthesis of modulated, harmonic-rich voltage.

A sample at index ``k`` is

    sum_n V_n cos(2 pi n f k ts + phi_n) * (1 + sum_i (dV_i / 2V_t) cos(2 pi F_i k ts + theta_i))
    + sigma * g_k

with ``V_t = sqrt(sum_n V_n**2)`` and ``g_k`` standard-normal draws.  Flicker
amplitudes are stored as ``dV_i / V_t``; the factor one half is applied here.
Phases are radians internally and degrees in JSON.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSpecError
from .iec import GRID_FREQUENCIES, UNITY_SENSATION_AMPLITUDES, iec_reference_amplitude
from .rng import SplitMix64

__all__ = [
    "HarmonicComponent",
    "FlickerComponent",
    "SamplingSpec",
    "NoiseSpec",
    "WaveformSpec",
    "SampleSeries",
    "base_voltage",
    "synthesize",
    "iec_reference_amplitude",
    "true_envelopes",
    "single_flicker_spec",
    "distorted_spec",
]


@dataclass(frozen=True)
class HarmonicComponent:
    order: int
    amplitude: float
    phase: float = 0.0  # radians

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidSpecError(f"harmonic order must be a positive integer, got {self.order}")
        if not self.amplitude >= 0:
            raise InvalidSpecError(f"harmonic amplitude must be >= 0, got {self.amplitude}")


@dataclass(frozen=True)
class FlickerComponent:
    frequency: float
    relative_amplitude: float  # dV / V_t
    phase: float = 0.0  # radians

    def __post_init__(self):
        if not self.frequency > 0:
            raise InvalidSpecError(f"flicker frequency must be > 0, got {self.frequency}")
        if not self.relative_amplitude >= 0:
            raise InvalidSpecError(
                f"flicker relative amplitude must be >= 0, got {self.relative_amplitude}"
            )


@dataclass(frozen=True)
class SamplingSpec:
    rate: float = 1200.0
    duration: float = 1.0
    power_frequency: float = 50.0

    def __post_init__(self):
        if not self.rate > 0 or not self.duration > 0 or not self.power_frequency > 0:
            raise InvalidSpecError("sampling rate, duration and power frequency must be > 0")

    @property
    def tau(self) -> float:
        return 1.0 / self.rate

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.rate))


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InvalidSpecError(f"noise sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class WaveformSpec:
    harmonics: tuple[HarmonicComponent, ...]
    flickers: tuple[FlickerComponent, ...] = ()
    sampling: SamplingSpec = field(default_factory=SamplingSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        object.__setattr__(self, "harmonics", tuple(self.harmonics))
        object.__setattr__(self, "flickers", tuple(self.flickers))
        orders = [h.order for h in self.harmonics]
        if len(set(orders)) != len(orders):
            raise InvalidSpecError(f"duplicate harmonic orders in {orders}")

    @property
    def orders(self) -> list[int]:
        return [h.order for h in self.harmonics]

    def validate(self):
        """Check the invariants that synthesis depends on."""
        base_voltage(self)
        highest = max(self.orders) * self.sampling.power_frequency
        if not self.sampling.rate > 2.0 * highest:
            raise InvalidSpecError(
                f"sample rate {self.sampling.rate} Hz does not exceed twice the "
                f"highest harmonic ({highest} Hz)"
            )

    def to_dict(self) -> dict:
        return {
            "power_frequency_hz": self.sampling.power_frequency,
            "sample_rate_hz": self.sampling.rate,
            "duration_s": self.sampling.duration,
            "noise_sigma": self.noise.sigma,
            "seed": self.noise.seed,
            "harmonics": [
                {"order": h.order, "amplitude_pu": h.amplitude, "phase_deg": math.degrees(h.phase)}
                for h in self.harmonics
            ],
            "flickers": [
                {
                    "frequency_hz": fl.frequency,
                    "relative_amplitude": fl.relative_amplitude,
                    "phase_deg": math.degrees(fl.phase),
                }
                for fl in self.flickers
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WaveformSpec":
        try:
            harmonics = [
                HarmonicComponent(
                    int(h["order"]), float(h["amplitude_pu"]), math.radians(float(h.get("phase_deg", 0.0)))
                )
                for h in doc["harmonics"]
            ]
            flickers = [
                FlickerComponent(
                    float(fl["frequency_hz"]),
                    float(fl["relative_amplitude"]),
                    math.radians(float(fl.get("phase_deg", 0.0))),
                )
                for fl in doc.get("flickers", [])
            ]
            sampling = SamplingSpec(
                rate=float(doc.get("sample_rate_hz", 1200.0)),
                duration=float(doc["duration_s"]),
                power_frequency=float(doc.get("power_frequency_hz", 50.0)),
            )
            noise = NoiseSpec(float(doc.get("noise_sigma", 0.0)), int(doc.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidSpecError):
                raise
            raise InvalidSpecError(f"malformed waveform spec: {exc!r}") from exc
        return cls(tuple(harmonics), tuple(flickers), sampling, noise)


@dataclass
class SampleSeries:
    samples: np.ndarray
    rate: float
    start_index: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise InvalidSpecError("a sample series must be a non-empty 1-D sequence")
        if not self.rate > 0:
            raise InvalidSpecError(f"sample rate must be > 0, got {self.rate}")

    def __len__(self):
        return self.samples.size

    @property
    def tau(self) -> float:
        return 1.0 / self.rate

    @property
    def indices(self) -> np.ndarray:
        return self.start_index + np.arange(self.samples.size)

    @property
    def times(self) -> np.ndarray:
        return self.indices / self.rate

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate


def base_voltage(spec: WaveformSpec) -> float:
    """Normalising voltage V_t, the root-sum-square of the harmonic amplitudes."""
    if not spec.harmonics:
        raise InvalidSpecError("waveform needs at least one harmonic")
    vt = math.sqrt(math.fsum(h.amplitude**2 for h in spec.harmonics))
    if not vt > 0:
        raise InvalidSpecError("all harmonic amplitudes are zero")
    return vt


def modulation(flickers: Sequence[FlickerComponent], t: np.ndarray) -> np.ndarray:
    """Shared envelope factor ``1 + sum_i (a_i / 2) cos(2 pi F_i t + theta_i)``."""
    m = np.ones_like(t, dtype=float)
    for fl in flickers:
        m += 0.5 * fl.relative_amplitude * np.cos(2.0 * np.pi * fl.frequency * t + fl.phase)
    return m


def _times(spec: WaveformSpec) -> np.ndarray:
    return np.arange(spec.sampling.n_samples) * spec.sampling.tau


def synthesize(spec: WaveformSpec) -> SampleSeries:
    spec.validate()
    t = _times(spec)
    omega = 2.0 * np.pi * spec.sampling.power_frequency
    carrier = np.zeros_like(t)
    for h in spec.harmonics:
        carrier += h.amplitude * np.cos(h.order * omega * t + h.phase)
    z = carrier * modulation(spec.flickers, t)
    if spec.noise.sigma > 0:
        z = z + spec.noise.sigma * SplitMix64(spec.noise.seed).standard_normal(t.size)
    return SampleSeries(z, spec.sampling.rate)


def true_envelopes(spec: WaveformSpec) -> np.ndarray:
    """Ground-truth envelope of every harmonic, shape ``(n_samples, N)``."""
    t = _times(spec)
    m = modulation(spec.flickers, t)
    return np.outer(m, [h.amplitude for h in spec.harmonics])


def true_relative_amplitudes(spec: WaveformSpec) -> np.ndarray:
    """Flicker amplitudes of ``spec`` laid out on the 36-entry IEC grid."""
    from .iec import grid_index

    out = np.zeros(len(GRID_FREQUENCIES))
    for fl in spec.flickers:
        out[grid_index(fl.frequency)] += fl.relative_amplitude
    return out


def single_flicker_spec(
    frequency: float,
    relative_amplitude: float,
    flicker_phase_deg: float = 0.0,
    sigma: float = 0.02,
    duration: float = 1.0,
    seed: int = 0,
    power_frequency: float = 50.0,
) -> WaveformSpec:
    """One 1.5 pu carrier at 80 degrees with a single flicker tone."""
    return WaveformSpec(
        (HarmonicComponent(1, 1.5, math.radians(80.0)),),
        (FlickerComponent(frequency, relative_amplitude, math.radians(flicker_phase_deg)),),
        SamplingSpec(1200.0, duration, power_frequency),
        NoiseSpec(sigma, seed),
    )


DISTORTED_HARMONICS = ((1, 1.5, 80.0), (3, 0.5, 60.0), (5, 0.2, 45.0), (7, 0.15, 36.0), (11, 0.1, 30.0))


def distorted_spec(
    sigma: float = 0.02,
    duration: float = 6.0,
    seed: int = 0,
    power_frequency: float = 50.0,
    flicker_scale: float = 1.0,
) -> WaveformSpec:
    """Five-harmonic carrier modulated by all 36 unity-sensation flicker tones.

    Flicker phases are zero.
    """
    harmonics = tuple(HarmonicComponent(n, v, math.radians(p)) for n, v, p in DISTORTED_HARMONICS)
    flickers = tuple(
        FlickerComponent(f, flicker_scale * a, 0.0)
        for f, a in zip(GRID_FREQUENCIES, UNITY_SENSATION_AMPLITUDES)
    )
    return WaveformSpec(harmonics, flickers, SamplingSpec(1200.0, duration, power_frequency), NoiseSpec(sigma, seed))
