"""Hybrid H-infinity + ADALINE flicker estimation."""

from .adaline import IEC_GRID, AdalineBank, AdalineConfig, AdalineState, FlickerGrid
from .baseline import BaselineConfig, fft_estimate
from .errors import (
    DegenerateEnvelopeError,
    FeasibilityError,
    HefsError,
    InsufficientDataError,
    InvalidSpecError,
    NumericInputError,
    ParseError,
    ShapeError,
    UnknownFrequencyError,
)
from .frequency import FrequencyEstimate, track_frequency
from .hinf import HinfConfig, HinfState, track_envelopes
from .iec import iec_reference_amplitude
from .metrics import ErrorStats, SensationReport, error_stats, reconstruct_envelope, sensation
from .pipeline import (
    FlickerReport,
    FrequencyMode,
    MonteCarloSpec,
    PipelineConfig,
    compare,
    monte_carlo,
    run_hefs,
)
from .signal_model import (
    FlickerComponent,
    HarmonicComponent,
    NoiseSpec,
    SampleSeries,
    SamplingSpec,
    WaveformSpec,
    base_voltage,
    synthesize,
)

__version__ = "0.1.0"
