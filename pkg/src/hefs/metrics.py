"""Sensation index, envelope reconstruction and error statistics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .adaline import IEC_GRID, FlickerGrid, basis_matrix
from .errors import InvalidSpecError, ShapeError
from .iec import REFERENCE_TABLE_ID, iec_reference_amplitude
from .signal_model import SampleSeries, SamplingSpec

SENSATION_LABEL = "S (sum of amplitude ratios to unity-sensation levels; not a flickermeter output)"


@dataclass(frozen=True)
class SensationReport:
    contributions: np.ndarray
    total: float
    reference_table: str = REFERENCE_TABLE_ID
    label: str = SENSATION_LABEL

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "reference_table": self.reference_table,
            "total": self.total,
            "contributions": [float(v) for v in self.contributions],
        }


@dataclass(frozen=True)
class ErrorStats:
    """Statistics of ``estimated - truth``; variance is the population variance."""

    mean: float
    variance: float
    mse: float
    max_abs: float
    count: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variance_kind"] = "population"
        return d


def sensation(estimated: Sequence[float], grid: FlickerGrid = IEC_GRID) -> SensationReport:
    est = np.asarray(estimated, dtype=float)
    if est.shape != (len(grid),):
        raise ShapeError(f"expected {len(grid)} amplitudes, got shape {est.shape}")
    if not np.all(np.isfinite(est)) or np.any(est < 0):
        raise InvalidSpecError("relative amplitudes must be finite and non-negative")
    ref = np.array([iec_reference_amplitude(f) for f in grid.frequencies])
    contributions = est / ref
    return SensationReport(contributions, float(contributions.sum()))


def envelope_values(
    v_n: float,
    amplitudes: Sequence[float],
    phases: Sequence[float],
    indices: Sequence[int],
    tau_s: float,
    grid: FlickerGrid = IEC_GRID,
) -> np.ndarray:
    """``V_n (1 + sum_i (a_i / 2) cos(2 pi F_i k ts + p_i))`` at the given sample indices."""
    amps = 0.5 * v_n * np.asarray(amplitudes, dtype=float)
    ph = np.asarray(phases, dtype=float)
    w = np.zeros(grid.n_weights)
    w[0] = v_n
    w[2::2] = amps * np.cos(ph)
    w[3::2] = amps * np.sin(ph)
    return basis_matrix(indices, tau_s, grid) @ w


def reconstruct_envelope(
    v_n: float,
    amplitudes: Sequence[float],
    phases: Sequence[float],
    grid: FlickerGrid,
    sampling: SamplingSpec,
) -> SampleSeries:
    if not v_n > 0:
        raise InvalidSpecError("harmonic amplitude must be > 0 to reconstruct an envelope")
    idx = np.arange(sampling.n_samples)
    return SampleSeries(envelope_values(v_n, amplitudes, phases, idx, sampling.tau, grid), sampling.rate)


def error_stats(estimated: Sequence[float], truth: Sequence[float]) -> ErrorStats:
    est = np.asarray(estimated, dtype=float)
    tru = np.asarray(truth, dtype=float)
    if est.shape != tru.shape:
        raise ShapeError(f"length mismatch: {est.shape} vs {tru.shape}")
    if est.size == 0:
        raise ShapeError("error statistics need at least one sample")
    e = est - tru
    mean = float(e.mean())
    return ErrorStats(
        mean=mean,
        variance=float(np.mean((e - mean) ** 2)),
        mse=float(np.mean(e * e)),
        max_abs=float(np.abs(e).max()),
        count=int(e.size),
    )


def convergence_time(trace: Sequence[float], rate: float, window: float = 0.1, tol: float = 1e-3) -> float:
    """First time (s) at which the trailing ``window`` varies by less than ``tol`` relative.

    ``trace[j]`` is the estimate after sample ``j``; returns ``inf`` when the
    condition is never met.  A window ending at a zero estimate never passes.
    """
    v = np.asarray(trace, dtype=float)
    w = max(int(round(window * rate)), 1)
    for end in range(w, v.size):
        ref = v[end]
        seg = v[end - w : end + 1]
        if ref != 0 and np.max(np.abs(seg - ref)) <= tol * abs(ref):
            return (end + 1) / rate
    return float("inf")
