"""CSV and JSON plumbing: series files, configs and reports."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable

import numpy as np

from .adaline import AdalineConfig, FlickerGrid
from .baseline import BaselineConfig
from .errors import InvalidSpecError, ParseError
from .hinf import HinfConfig
from .pipeline import Comparison, FlickerReport, FrequencyMode, MonteCarloRun, PipelineConfig
from .signal_model import SampleSeries, WaveformSpec

SERIES_HEADER = ("time_s", "voltage_pu")
SPACING_TOLERANCE = 1e-6
MC_COLUMNS = ("run_id", "s_error_pct", "envelope_error_pct")


def _num(v: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(v))


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to a sibling temp file and rename it over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Iterable[str], rows: Iterable[Iterable[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- series


def ingest_csv(path) -> SampleSeries:
    """Read a ``time_s,voltage_pu`` file; the rate is inferred from the timestamps."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}") from exc
    times: list[float] = []
    values: list[float] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SERIES_HEADER:
            raise ParseError(f"header must be {','.join(SERIES_HEADER)!r}, got {header!r}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 columns, got {len(row)}", line)
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError as exc:
                raise ParseError(f"not a number: {row!r}", line) from exc
            if not (math.isfinite(t) and math.isfinite(v)):
                raise ParseError("non-finite value", line)
            times.append(t)
            values.append(v)
            if len(times) >= 2:
                dt = times[-1] - times[-2]
                if not dt > 0:
                    raise ParseError("timestamps must be strictly increasing", line)
                dt0 = times[1] - times[0]
                if abs(dt - dt0) > SPACING_TOLERANCE * dt0:
                    raise ParseError(f"non-uniform spacing ({dt!r} s vs {dt0!r} s)", line)
    if len(times) < 2:
        raise ParseError("need at least two samples to infer the sample rate")
    rate = (len(times) - 1) / (times[-1] - times[0])
    # decimal timestamps cost a few ulps; snap to an integral rate when that close
    if abs(rate - round(rate)) <= 1e-9 * rate:
        rate = float(round(rate))
    return SampleSeries(np.array(values), rate, int(round(times[0] * rate)))


def series_csv_text(series: SampleSeries) -> str:
    rows = ((_num(t), _num(v)) for t, v in zip(series.times, series.samples))
    return _csv_text(SERIES_HEADER, rows)


def write_series_csv(series: SampleSeries, path) -> None:
    atomic_write_text(path, series_csv_text(series))


# ---------------------------------------------------------------- JSON configs


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InvalidSpecError(f"cannot open {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InvalidSpecError(f"{path}: top level must be a JSON object")
    return doc


def _take(doc: dict, allowed: dict, where: str) -> dict:
    unknown = set(doc) - set(allowed)
    if unknown:
        raise InvalidSpecError(f"unknown keys in {where}: {sorted(unknown)}")
    return {allowed[k]: v for k, v in doc.items()}


_HINF_KEYS = {
    "harmonic_orders": "harmonic_orders",
    "alpha": "alpha",
    "measurement_noise": "measurement_noise",
    "initial_covariance_scale": "initial_covariance_scale",
    "initial_state": "initial_state",
    "process_noise": "process_noise",
    "modulation_noise": "modulation_noise",
    "frequency_noise": "frequency_noise",
    "feasibility_margin": "feasibility_margin",
}
_ADALINE_KEYS = {
    "initial_rate": "initial_rate",
    "decay": "decay",
    "regularizer": "regularizer",
    "initial_weights": "initial_weights",
    "init": "init",
    "random_scale": "random_scale",
    "seed": "seed",
}
_PIPELINE_KEYS = {"hinf", "adaline", "grid_hz", "frequency_mode", "report_stride", "warmup_samples", "nominal_frequency_hz"}


def pipeline_config_from_dict(doc: dict) -> PipelineConfig:
    unknown = set(doc) - _PIPELINE_KEYS
    if unknown:
        raise InvalidSpecError(f"unknown keys in pipeline config: {sorted(unknown)}")
    try:
        hinf = HinfConfig(**_take(doc.get("hinf", {}), _HINF_KEYS, "hinf"))
        adaline = AdalineConfig(**_take(doc.get("adaline", {}), _ADALINE_KEYS, "adaline"))
        grid = FlickerGrid(tuple(doc["grid_hz"])) if "grid_hz" in doc else FlickerGrid()
        mode = doc.get("frequency_mode", {"kind": "fixed", "value": 50.0})
        if isinstance(mode, str):
            mode = {"kind": mode, "value": 0.0}
        mode = FrequencyMode(str(mode.get("kind", "fixed")), float(mode.get("value", 50.0)))
        return PipelineConfig(
            hinf=hinf,
            adaline=adaline,
            grid=grid,
            frequency_mode=mode,
            report_stride=int(doc.get("report_stride", 1)),
            warmup_samples=int(doc.get("warmup_samples", 24)),
            nominal_frequency=float(doc.get("nominal_frequency_hz", 50.0)),
        )
    except InvalidSpecError:
        raise
    except (TypeError, ValueError, AttributeError) as exc:
        raise InvalidSpecError(f"malformed pipeline config: {exc}") from exc


def baseline_config_from_dict(doc: dict) -> BaselineConfig:
    allowed = {"window_seconds": "window_seconds", "demodulation_cutoff_hz": "demodulation_cutoff"}
    try:
        return BaselineConfig(**{k: float(v) for k, v in _take(doc, allowed, "baseline").items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSpecError):
            raise
        raise InvalidSpecError(f"malformed baseline config: {exc}") from exc


def load_pipeline_config(path) -> PipelineConfig:
    return pipeline_config_from_dict(load_json(path))


def load_waveform_spec(path) -> WaveformSpec:
    return WaveformSpec.from_dict(load_json(path))


# ---------------------------------------------------------------- reports


def report_json_text(report: FlickerReport | Comparison, include_timing: bool = True) -> str:
    return json.dumps(report.to_dict(include_timing), indent=2) + "\n"


def report_csv_text(report: FlickerReport | Comparison) -> str:
    if isinstance(report, Comparison):
        has_truth = report.true_relative_amplitudes is not None
        header = ["frequency_hz", "hefs", "fft"] + (["truth"] if has_truth else [])
        rows = []
        for i, F in enumerate(report.hefs.grid.frequencies):
            row = [_num(F), _num(report.hefs.relative_amplitudes[0, i]), _num(report.baseline.relative_amplitudes[i])]
            if has_truth:
                row.append(_num(report.true_relative_amplitudes[i]))
            rows.append(row)
        return _csv_text(header, rows)
    header = ["frequency_hz"] + [f"envelope_{j + 1}" for j in range(len(report.harmonic_orders))]
    rows = (
        [_num(F)] + [_num(v) for v in report.relative_amplitudes[:, i]]
        for i, F in enumerate(report.grid.frequencies)
    )
    return _csv_text(header, rows)


def emit_report(report: FlickerReport | Comparison, path, format: str = "json") -> None:
    if format == "json":
        atomic_write_text(path, report_json_text(report))
    elif format == "csv":
        atomic_write_text(path, report_csv_text(report))
    else:
        raise InvalidSpecError(f"unknown report format {format!r}")


def trace_csv_text(report: FlickerReport) -> str:
    if report.traces is None:
        raise InvalidSpecError("report carries no traces")
    tr = report.traces
    header = ["time_s"] + [f"envelope_{j + 1}" for j in range(tr.envelopes.shape[1])]
    rows = (
        [_num(k / report.rate)] + [_num(v) for v in env]
        for k, env in zip(tr.steps, tr.envelopes)
    )
    return _csv_text(header, rows)


def write_trace_csv(report: FlickerReport, path) -> None:
    atomic_write_text(path, trace_csv_text(report))


def mc_csv_text(runs: Iterable[MonteCarloRun]) -> str:
    rows = ((str(r.run_id), _num(r.s_error_pct), _num(r.envelope_error_pct)) for r in runs)
    return _csv_text(MC_COLUMNS, rows)


def write_mc_csv(runs: Iterable[MonteCarloRun], path) -> None:
    atomic_write_text(path, mc_csv_text(runs))
