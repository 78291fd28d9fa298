"""Spectral baseline: square-law demodulation plus per-bin Goertzel evaluation.

The record, less its mean, is squared, low-passed by four cascaded one-pole sections
(35 Hz by default), and the DC level of the result is removed.  For a carrier
``sum V_n cos(...)`` modulated by ``1 + sum (a_i / 2) cos(2 pi F_i t + p_i)``
the low-passed square is ``(V_t**2 / 2) (1 + sum a_i cos(2 pi F_i t + p_i))``
to first order, so the Goertzel amplitude at ``F_i`` divided by the DC level
is ``a_i`` directly.  The known magnitude and phase response of the low-pass
cascade is divided out of every bin.

One-pole section: ``y[k] = y[k-1] + c (x[k] - y[k-1])`` with
``c = 1 - exp(-2 pi fc / fs)``, i.e. ``H(z) = c / (1 - (1 - c) z^-1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .adaline import IEC_GRID, FlickerGrid
from .errors import InsufficientDataError, InvalidSpecError
from .signal_model import SampleSeries

SECTIONS = 4


@dataclass(frozen=True)
class BaselineConfig:
    window_seconds: float = 2.0
    demodulation_cutoff: float = 35.0

    def __post_init__(self):
        if not self.window_seconds > 0:
            raise InvalidSpecError("window_seconds must be > 0")
        if not self.demodulation_cutoff > max(IEC_GRID.frequencies):
            raise InvalidSpecError("demodulation_cutoff must exceed the highest grid frequency")


class BaselineEstimate(NamedTuple):
    v1: float
    relative_amplitudes: np.ndarray
    phases: np.ndarray
    window_start: int  # absolute sample index of the first analysed sample
    window_samples: int


def goertzel(x: np.ndarray, frequency: float, rate: float) -> complex:
    """DFT coefficient ``sum_k x[k] exp(-j w k)`` at an arbitrary frequency."""
    w = 2.0 * math.pi * frequency / rate
    coeff = 2.0 * math.cos(w)
    s1 = s2 = 0.0
    for v in x:
        s0 = v + coeff * s1 - s2
        s2 = s1
        s1 = s0
    # y[N-1] = s1 - e^{-jw} s2 ; X = e^{-jw (N-1)} y[N-1]
    y = complex(s1 - math.cos(w) * s2, math.sin(w) * s2)
    return y * complex(math.cos(w * (len(x) - 1)), -math.sin(w * (len(x) - 1)))


def naive_dft(x: np.ndarray, frequency: float, rate: float) -> complex:
    k = np.arange(len(x))
    return complex(np.sum(np.asarray(x) * np.exp(-2j * np.pi * frequency * k / rate)))


def _section_coeff(cutoff: float, rate: float) -> float:
    return 1.0 - math.exp(-2.0 * math.pi * cutoff / rate)


def lowpass_cascade(x: np.ndarray, cutoff: float, rate: float, sections: int = SECTIONS) -> np.ndarray:
    c = _section_coeff(cutoff, rate)
    y = np.asarray(x, dtype=float)
    for _ in range(sections):
        out = np.empty_like(y)
        acc = y[0]
        for k, v in enumerate(y):
            acc += c * (v - acc)
            out[k] = acc
        y = out
    return y


def cascade_response(frequency: float, cutoff: float, rate: float, sections: int = SECTIONS) -> complex:
    c = _section_coeff(cutoff, rate)
    z1 = complex(math.cos(2 * math.pi * frequency / rate), -math.sin(2 * math.pi * frequency / rate))
    return (c / (1.0 - (1.0 - c) * z1)) ** sections


def fft_estimate(
    series: SampleSeries,
    f: float,
    grid: FlickerGrid = IEC_GRID,
    config: BaselineConfig = BaselineConfig(),
) -> BaselineEstimate:
    """Estimate V_1 and dV/V_t on every grid bin from the last analysis window."""
    n_win = int(round(config.window_seconds * series.rate))
    if n_win > len(series):
        raise InsufficientDataError(
            f"analysis window needs {n_win} samples, series has {len(series)}"
        )
    # a DC offset would otherwise leak into the squared level
    x = series.samples - series.samples.mean()
    demod = lowpass_cascade(x * x, config.demodulation_cutoff, series.rate)
    start = len(series) - n_win
    seg = demod[start:]
    level = float(seg.mean())
    seg = seg - level

    raw = x[start:]
    v1 = 2.0 * abs(goertzel(raw - raw.mean(), f, series.rate)) / n_win

    start_index = series.start_index + start
    rel = np.empty(len(grid))
    phases = np.empty(len(grid))
    for i, F in enumerate(grid.frequencies):
        X = goertzel(seg, F, series.rate) / cascade_response(F, config.demodulation_cutoff, series.rate)
        rel[i] = 2.0 * abs(X) / n_win / level if level > 0 else 0.0
        # phase referenced to absolute sample index 0
        phases[i] = math.remainder(
            math.atan2(X.imag, X.real) - 2.0 * math.pi * F * start_index / series.rate, 2.0 * math.pi
        )
    return BaselineEstimate(v1, rel, phases, start_index, n_win)
