"""Power-frequency estimation from raw samples by zero-crossing timing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .signal_model import SampleSeries

MIN_CYCLES = 4
PREFILTER_SECTIONS = 4


@dataclass(frozen=True)
class FrequencyEstimate:
    frequency: float
    confidence_window: float
    window_samples: int


def one_pole_lowpass(x: np.ndarray, cutoff: float, rate: float) -> np.ndarray:
    """y[k] = y[k-1] + a (x[k] - y[k-1]) with a = 1 - exp(-2 pi fc / fs), y[-1] = x[0]."""
    a = 1.0 - math.exp(-2.0 * math.pi * cutoff / rate)
    y = np.empty_like(x)
    acc = x[0]
    for k, v in enumerate(x):
        acc += a * (v - acc)
        y[k] = acc
    return y


def rising_crossings(x: np.ndarray, hysteresis: float) -> np.ndarray:
    """Fractional sample indices of upward zero crossings.

    A crossing only counts once the signal has dipped below ``-hysteresis``
    since the previous one, which suppresses noise-induced chatter.
    """
    out = []
    armed = x[0] < -hysteresis
    for k in range(1, x.size):
        prev, cur = x[k - 1], x[k]
        if cur < -hysteresis:
            armed = True
        if armed and prev < 0.0 <= cur:
            out.append(k - 1 + prev / (prev - cur))
            armed = False
    return np.asarray(out)


def track_frequency(series: SampleSeries, nominal: float = 50.0, offset: float = 0.0) -> FrequencyEstimate:
    """Estimate the fundamental frequency of ``series``.

    The record is low-passed (four cascaded one-pole sections at twice
    ``nominal``, so harmonics of order 3 and up are at least 20 dB down and
    cannot add spurious crossings), its rising zero
    crossings are located by linear interpolation, and the period is the
    least-squares slope of crossing time against crossing count.  ``offset``
    is added to the result; it exists to emulate a biased PLL in tests.
    """
    x = np.asarray(series.samples, dtype=float)
    per_cycle = series.rate / nominal
    if x.size < MIN_CYCLES * per_cycle:
        raise InsufficientDataError(
            f"{x.size} samples is less than {MIN_CYCLES} nominal cycles ({MIN_CYCLES * per_cycle:.0f})"
        )
    y = x - x.mean()
    for _ in range(PREFILTER_SECTIONS):
        y = one_pole_lowpass(y, 2.0 * nominal, series.rate)
    # the filters start from x[0]; drop their first cycle
    skip = int(math.ceil(per_cycle))
    y = y[skip:]
    rms = float(np.sqrt(np.mean(y * y)))
    crossings = rising_crossings(y, 0.1 * rms)
    if crossings.size < 3:
        raise InsufficientDataError("fewer than three zero crossings found")

    # reject crossings that would split a cycle (chatter that beat the hysteresis)
    gaps = np.diff(crossings)
    typical = np.median(gaps)
    keep = np.concatenate([[True], gaps > 0.5 * typical])
    crossings = crossings[keep]
    cycle = np.round((crossings - crossings[0]) / typical)

    slope, intercept = np.polyfit(cycle, crossings, 1)
    period = slope / series.rate
    frequency = 1.0 / period
    residual = crossings - (slope * cycle + intercept)
    dof = max(cycle.size - 2, 1)
    s2 = float(residual @ residual) / dof
    sxx = float(((cycle - cycle.mean()) ** 2).sum())
    slope_se = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    # two standard errors, mapped from period to frequency
    half_width = 2.0 * frequency * slope_se / slope
    return FrequencyEstimate(float(frequency + offset), float(half_width), int(x.size))
