"""End-to-end estimation: frequency, H-infinity envelopes, ADALINE flicker bank.

Per sample the structure row is built, the H-infinity filter is stepped, the
envelopes are extracted and each envelope is fed to its own ADALINE unit.
The ADALINE bank starts after ``warmup_samples`` so that its DC weight can be
seeded with an envelope value instead of an arbitrary constant.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .adaline import IEC_GRID, AdalineBank, AdalineConfig, FlickerGrid, basis_matrix
from .baseline import BaselineConfig, BaselineEstimate, fft_estimate
from .errors import DegenerateEnvelopeError, FeasibilityError, HefsError, InsufficientDataError, InvalidSpecError
from .frequency import FrequencyEstimate, track_frequency
from .hinf import HinfConfig, HinfState, step, structure_row
from .metrics import ErrorStats, SensationReport, envelope_values, error_stats, sensation
from .rng import SplitMix64, derive_seed
from .signal_model import (
    FlickerComponent,
    HarmonicComponent,
    NoiseSpec,
    SampleSeries,
    WaveformSpec,
    synthesize,
    true_envelopes,
    true_relative_amplitudes,
)

FINAL_WINDOW_S = 2.0
S_ABSOLUTE_BELOW = 0.01
FREQUENCY_MODES = ("fixed", "tracked", "tracked_with_offset")


@dataclass(frozen=True)
class FrequencyMode:
    """``fixed`` uses ``value`` as f; ``tracked_with_offset`` adds ``value`` to the tracked f."""

    kind: str = "fixed"
    value: float = 50.0

    def __post_init__(self):
        if self.kind not in FREQUENCY_MODES:
            raise InvalidSpecError(f"frequency mode must be one of {FREQUENCY_MODES}, got {self.kind!r}")
        if not math.isfinite(self.value):
            raise InvalidSpecError("frequency mode value must be finite")
        if self.kind == "fixed" and not self.value > 0:
            raise InvalidSpecError(f"fixed frequency must be > 0, got {self.value}")

    @classmethod
    def fixed(cls, f: float) -> "FrequencyMode":
        return cls("fixed", f)

    @classmethod
    def tracked(cls) -> "FrequencyMode":
        return cls("tracked", 0.0)

    @classmethod
    def tracked_with_offset(cls, df: float) -> "FrequencyMode":
        return cls("tracked_with_offset", df)


@dataclass(frozen=True)
class PipelineConfig:
    hinf: HinfConfig = field(default_factory=HinfConfig)
    adaline: AdalineConfig = field(default_factory=AdalineConfig)
    grid: FlickerGrid = IEC_GRID
    frequency_mode: FrequencyMode = field(default_factory=FrequencyMode)
    report_stride: int = 1
    warmup_samples: int = 24
    nominal_frequency: float = 50.0

    def __post_init__(self):
        if int(self.report_stride) != self.report_stride or self.report_stride < 1:
            raise InvalidSpecError(f"report_stride must be an integer >= 1, got {self.report_stride}")
        if self.warmup_samples < 0:
            raise InvalidSpecError("warmup_samples must be >= 0")
        if not self.nominal_frequency > 0:
            raise InvalidSpecError("nominal_frequency must be > 0")

    def for_orders(self, orders: Sequence[int]) -> "PipelineConfig":
        return replace(self, hinf=replace(self.hinf, harmonic_orders=tuple(orders), initial_state=None))


@dataclass
class Traces:
    """Frames every ``report_stride`` samples; ``amplitudes`` is NaN before the bank starts."""

    steps: np.ndarray  # (M,) absolute sample index
    envelopes: np.ndarray  # (M, N)
    phases: np.ndarray  # (M, N)
    amplitudes: np.ndarray  # (M, N, 36) relative flicker amplitudes


@dataclass
class FlickerReport:
    harmonic_orders: tuple[int, ...]
    frequency: float
    frequency_estimate: FrequencyEstimate | None
    harmonic_amplitudes: np.ndarray  # ADALINE DC weights
    harmonic_phases: np.ndarray  # H-infinity, radians
    final_envelopes: np.ndarray
    relative_amplitudes: np.ndarray  # (N, 36)
    flicker_phases: np.ndarray  # (N, 36)
    sensation: SensationReport
    errors: dict[str, ErrorStats]
    timing: dict[str, float]
    rate: float
    start_index: int
    n_samples: int
    grid: FlickerGrid = IEC_GRID
    traces: Traces | None = None

    def to_dict(self, include_timing: bool = True) -> dict:
        doc = {
            "frequency_hz": self.frequency,
            "frequency_estimate": None
            if self.frequency_estimate is None
            else {
                "frequency_hz": self.frequency_estimate.frequency,
                "confidence_window_hz": self.frequency_estimate.confidence_window,
                "window_samples": self.frequency_estimate.window_samples,
            },
            "sample_rate_hz": self.rate,
            "start_index": self.start_index,
            "n_samples": self.n_samples,
            "grid_hz": list(self.grid.frequencies),
            "harmonics": [
                {
                    "order": int(n),
                    "amplitude_pu": float(self.harmonic_amplitudes[j]),
                    "phase_deg": math.degrees(float(self.harmonic_phases[j])),
                    "final_envelope_pu": float(self.final_envelopes[j]),
                    "relative_amplitudes": [float(v) for v in self.relative_amplitudes[j]],
                    "flicker_phases_deg": [math.degrees(float(v)) for v in self.flicker_phases[j]],
                }
                for j, n in enumerate(self.harmonic_orders)
            ],
            "sensation": self.sensation.to_dict(),
            "errors": {k: v.to_dict() for k, v in self.errors.items()},
        }
        if include_timing:
            doc["timing"] = dict(self.timing)
        return doc


def resolve_frequency(series: SampleSeries, config: PipelineConfig) -> tuple[float, FrequencyEstimate | None]:
    mode = config.frequency_mode
    if mode.kind == "fixed":
        return mode.value, None
    offset = mode.value if mode.kind == "tracked_with_offset" else 0.0
    est = track_frequency(series, config.nominal_frequency, offset)
    return est.frequency, est


def _truth_envelope(truth: WaveformSpec, order: int, n_samples: int, start: int) -> np.ndarray | None:
    if order not in truth.orders:
        return None
    env = true_envelopes(truth)[:, truth.orders.index(order)]
    if start + n_samples > env.size:
        raise InvalidSpecError("truth spec is shorter than the series")
    return env[start : start + n_samples]


def run_hefs(series: SampleSeries, config: PipelineConfig, truth: WaveformSpec | None = None) -> FlickerReport:
    """Estimate harmonic envelopes and flicker amplitudes of ``series``.

    With ``truth`` the report also carries error statistics of the first
    envelope: ``envelope_1`` compares the H-infinity trace after warm-up,
    ``reconstruction_1`` compares the final-weight reconstruction over the
    last two seconds.
    """
    n = len(series)
    if n <= config.warmup_samples:
        raise InsufficientDataError(f"series has {n} samples, warm-up needs more than {config.warmup_samples}")
    t_total = time.perf_counter()
    f, f_est = resolve_frequency(series, config)
    hcfg = config.hinf
    orders = hcfg.harmonic_orders
    grid = config.grid
    tau = series.tau
    idx = series.indices
    basis = basis_matrix(idx, tau, grid)
    final_start = max(n - int(round(FINAL_WINDOW_S * series.rate)), 0)

    state = HinfState.initial(hcfg, int(series.start_index))
    bank: AdalineBank | None = None
    env_all = np.empty((n, len(orders)))
    stride = config.report_stride
    frame_ids = np.arange(0, n, stride)
    tr_env = np.empty((frame_ids.size, len(orders)))
    tr_ph = np.empty_like(tr_env)
    tr_amp = np.full((frame_ids.size, len(orders), len(grid)), np.nan)
    z = series.samples
    window_time = 0.0
    t_mark = None
    for i in range(n):
        if i == final_start:
            t_mark = time.perf_counter()
        state = step(state, hcfg, z[i], structure_row(int(idx[i]), f, tau, orders))
        x = state.x_hat
        env = np.hypot(x[0::2], x[1::2])
        env_all[i] = env
        if i >= config.warmup_samples:
            if bank is None:
                bank = AdalineBank(config.adaline, len(orders), grid, dc=env)
            bank.update(env, basis[i])
        if i % stride == 0:
            j = i // stride
            tr_env[j] = env
            tr_ph[j] = np.arctan2(x[1::2], x[0::2])
            if bank is not None:
                w = bank.weights
                dc = np.abs(w[:, 0])
                with np.errstate(divide="ignore", invalid="ignore"):
                    tr_amp[j] = 2.0 * np.hypot(w[:, 2::2], w[:, 3::2]) / dc[:, None]
    if t_mark is not None:
        window_time = time.perf_counter() - t_mark

    dc, rel, fphases = bank.amplitudes()
    x = state.x_hat
    h_phases = np.arctan2(x[1::2], x[0::2])
    h_phases = np.where(h_phases <= -np.pi, np.pi, h_phases)
    report_s = sensation(rel[0], grid) if grid.is_iec else SensationReport(np.zeros(len(grid)), 0.0)

    errors: dict[str, ErrorStats] = {}
    if truth is not None:
        true1 = _truth_envelope(truth, orders[0], n, int(series.start_index))
        if true1 is not None:
            w0 = config.warmup_samples
            errors["envelope_1"] = error_stats(env_all[w0:, 0], true1[w0:])
            rec = envelope_values(dc[0], rel[0], fphases[0], idx[final_start:], tau, grid)
            errors["reconstruction_1"] = error_stats(rec, true1[final_start:])

    timing = {
        "final_window_s": window_time,
        "final_window_samples": float(n - final_start),
        "total_s": time.perf_counter() - t_total,
    }
    return FlickerReport(
        harmonic_orders=tuple(orders),
        frequency=float(f),
        frequency_estimate=f_est,
        harmonic_amplitudes=dc,
        harmonic_phases=h_phases,
        final_envelopes=env_all[-1].copy(),
        relative_amplitudes=rel,
        flicker_phases=fphases,
        sensation=report_s,
        errors=errors,
        timing=timing,
        rate=series.rate,
        start_index=int(series.start_index),
        n_samples=n,
        grid=grid,
        traces=Traces(idx[frame_ids], tr_env, tr_ph, tr_amp),
    )


# ---------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class MonteCarloSpec:
    runs: int
    seed: int
    base_spec: WaveformSpec
    harmonic_range: tuple[float, float] = (0.8, 1.2)
    flicker_range: tuple[float, float] = (0.0, 0.02)
    phase_range_deg: tuple[float, float] = (0.0, 90.0)

    def __post_init__(self):
        if int(self.runs) != self.runs or self.runs < 1:
            raise InvalidSpecError(f"runs must be an integer >= 1, got {self.runs}")
        for name in ("harmonic_range", "flicker_range", "phase_range_deg"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise InvalidSpecError(f"{name} must be ordered, got ({lo}, {hi})")
        if self.harmonic_range[0] < 0 or self.flicker_range[0] < 0:
            raise InvalidSpecError("amplitude ranges must be non-negative")
        if not self.base_spec.flickers:
            raise InvalidSpecError("base spec needs flicker components to randomise")


@dataclass(frozen=True)
class MonteCarloRun:
    run_id: int
    s_error_pct: float
    envelope_error_pct: float
    s_true: float = math.nan
    s_estimated: float = math.nan
    s_error_absolute: bool = False  # S_true below 0.01: s_error_pct holds 100 |dS|
    failure: str | None = None


def draw_run_spec(spec: MonteCarloSpec, run_id: int) -> WaveformSpec:
    """Waveform of run ``run_id``; depends only on the campaign seed and the index."""
    seed = derive_seed(spec.seed, run_id)
    rng = SplitMix64(seed)
    base = spec.base_spec
    nh, nf = len(base.harmonics), len(base.flickers)
    h_amp = rng.uniform(*spec.harmonic_range, size=nh)
    h_ph = np.radians(rng.uniform(*spec.phase_range_deg, size=nh))
    f_amp = rng.uniform(*spec.flicker_range, size=nf)
    f_ph = np.radians(rng.uniform(*spec.phase_range_deg, size=nf))
    harmonics = tuple(
        HarmonicComponent(h.order, float(a), float(p)) for h, a, p in zip(base.harmonics, h_amp, h_ph)
    )
    flickers = tuple(
        FlickerComponent(fl.frequency, float(a), float(p)) for fl, a, p in zip(base.flickers, f_amp, f_ph)
    )
    noise = NoiseSpec(base.noise.sigma, derive_seed(seed, 0))
    return WaveformSpec(harmonics, flickers, base.sampling, noise)


def _s_error(s_est: float, s_true: float) -> tuple[float, bool]:
    if s_true < S_ABSOLUTE_BELOW:
        return 100.0 * abs(s_est - s_true), True
    return 100.0 * abs(s_est - s_true) / s_true, False


def _one_run(args) -> MonteCarloRun:
    spec, config, run_id = args
    try:
        wave = draw_run_spec(spec, run_id)
        series = synthesize(wave)
        report = run_hefs(series, config.for_orders(wave.orders), truth=wave)
        s_true = sensation(true_relative_amplitudes(wave)).total
        s_est = report.sensation.total
        s_err, absolute = _s_error(s_est, s_true)
        rec = report.errors["reconstruction_1"]
        true1 = true_envelopes(wave)[-rec.count :, 0]
        env_err = 100.0 * math.sqrt(rec.mse) / math.sqrt(float(np.mean(true1 * true1)))
        return MonteCarloRun(run_id, s_err, env_err, s_true, s_est, absolute)
    except HefsError as exc:
        return MonteCarloRun(run_id, math.nan, math.nan, failure=f"{type(exc).__name__}: {exc}")


def monte_carlo(spec: MonteCarloSpec, config: PipelineConfig, workers: int | None = 1) -> list[MonteCarloRun]:
    """Run the campaign; results are ordered by run id and independent of ``workers``.

    ``workers=None`` uses every available CPU.  A failing run is recorded
    with NaN errors and its exception text.
    """
    jobs = [(spec, config, i) for i in range(spec.runs)]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or spec.runs == 1:
        return [_one_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_run, jobs))


# ---------------------------------------------------------------- comparison


@dataclass
class Comparison:
    hefs: FlickerReport
    baseline: BaselineEstimate
    baseline_config: BaselineConfig
    hefs_reconstruction: ErrorStats | None
    baseline_reconstruction: ErrorStats | None
    true_relative_amplitudes: np.ndarray | None
    baseline_time_s: float

    def to_dict(self, include_timing: bool = True) -> dict:
        grid = self.hefs.grid
        rows = []
        for i, F in enumerate(grid.frequencies):
            row = {
                "frequency_hz": F,
                "hefs": float(self.hefs.relative_amplitudes[0, i]),
                "fft": float(self.baseline.relative_amplitudes[i]),
            }
            if self.true_relative_amplitudes is not None:
                row["truth"] = float(self.true_relative_amplitudes[i])
            rows.append(row)
        doc = {
            "per_frequency": rows,
            "v1": {"hefs": float(self.hefs.harmonic_amplitudes[0]), "fft": self.baseline.v1},
            "baseline": {
                "window_seconds": self.baseline_config.window_seconds,
                "demodulation_cutoff_hz": self.baseline_config.demodulation_cutoff,
                "window_start_index": self.baseline.window_start,
            },
            "hefs_report": self.hefs.to_dict(include_timing),
        }
        if self.hefs_reconstruction is not None:
            doc["envelope_reconstruction"] = {
                "hefs": self.hefs_reconstruction.to_dict(),
                "fft": self.baseline_reconstruction.to_dict(),
            }
        if include_timing:
            doc["timing"] = {"hefs_final_window_s": self.hefs.timing["final_window_s"], "fft_s": self.baseline_time_s}
        return doc


def compare(
    series: SampleSeries,
    config: PipelineConfig,
    baseline: BaselineConfig = BaselineConfig(),
    truth: WaveformSpec | None = None,
) -> Comparison:
    """Run both estimators on ``series``; reconstruction errors need ``truth``."""
    report = run_hefs(series, config, truth)
    t0 = time.perf_counter()
    fft = fft_estimate(series, report.frequency, config.grid, baseline)
    fft_time = time.perf_counter() - t0
    hefs_rec = fft_rec = true_rel = None
    if truth is not None:
        true_rel = true_relative_amplitudes(truth)
        true1 = _truth_envelope(truth, report.harmonic_orders[0], len(series), int(series.start_index))
        if true1 is not None:
            start = fft.window_start - int(series.start_index)
            idx = series.indices[start:]
            h = envelope_values(
                report.harmonic_amplitudes[0], report.relative_amplitudes[0], report.flicker_phases[0],
                idx, series.tau, config.grid,
            )
            b = envelope_values(fft.v1, fft.relative_amplitudes, fft.phases, idx, series.tau, config.grid)
            hefs_rec = error_stats(h, true1[start:])
            fft_rec = error_stats(b, true1[start:])
    return Comparison(report, fft, baseline, hefs_rec, fft_rec, true_rel, fft_time)
