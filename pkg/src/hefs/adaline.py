"""Online ADALINE decomposition of an envelope onto the IEC flicker grid.

Each envelope gets its own adaptive linear unit with inputs

    [1, 0, cos(2 pi F_1 t), -sin(2 pi F_1 t), ..., cos(2 pi F_M t), -sin(2 pi F_M t)]

trained by the normalised Widrow-Hoff rule with a decaying rate
``theta_k = theta_0 / (1 + k / beta)``.  The DC weight converges to the
harmonic amplitude ``V_n`` and each flicker pair to ``V_n * dV_i / (2 V_t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateEnvelopeError, InvalidSpecError, NumericInputError
from .iec import GRID_FREQUENCIES
from .rng import SplitMix64

DEGENERATE_LEVEL = 1e-9


@dataclass(frozen=True)
class FlickerGrid:
    frequencies: tuple[float, ...] = GRID_FREQUENCIES

    def __post_init__(self):
        f = tuple(float(v) for v in self.frequencies)
        object.__setattr__(self, "frequencies", f)
        if not f or f[0] <= 0 or any(b <= a for a, b in zip(f, f[1:])):
            raise InvalidSpecError("grid frequencies must be positive and strictly increasing")

    def __len__(self):
        return len(self.frequencies)

    @property
    def n_weights(self) -> int:
        return 2 + 2 * len(self.frequencies)

    def as_array(self) -> np.ndarray:
        return np.array(self.frequencies)

    @property
    def is_iec(self) -> bool:
        return self.frequencies == GRID_FREQUENCIES


IEC_GRID = FlickerGrid()


@dataclass(frozen=True)
class AdalineConfig:
    """Learning schedule and initial weights.

    ``init="seeded"`` (default) starts the DC weight at the first envelope
    value handed to the unit and every flicker weight at zero.  ``"ones"``
    starts all weights at 1 except the second, which multiplies an input that
    is always zero and would otherwise bias the DC amplitude forever; it
    starts at 0.  With ``init="random"`` the flicker weights are drawn
    uniformly from ``[-random_scale, random_scale]`` using ``seed``.
    An explicit ``initial_weights`` overrides all modes.

    The default schedule (``theta_0 = 0.2``, ``beta = 750``) keeps the
    normalised step well below the stability limit of 2.
    """

    initial_rate: float = 0.2
    decay: float = 750.0
    regularizer: float = 1e-4
    initial_weights: tuple[float, ...] | None = None
    init: str = "seeded"
    random_scale: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not self.initial_rate > 0:
            raise InvalidSpecError(f"initial_rate must be > 0, got {self.initial_rate}")
        if not self.decay > 0:
            raise InvalidSpecError(f"decay must be > 0, got {self.decay}")
        if not self.regularizer > 0:
            raise InvalidSpecError(f"regularizer must be > 0, got {self.regularizer}")
        if self.init not in ("seeded", "ones", "random"):
            raise InvalidSpecError(f"unknown init mode {self.init!r}")
        if self.initial_weights is not None:
            object.__setattr__(self, "initial_weights", tuple(float(v) for v in self.initial_weights))

    def weights0(self, grid: FlickerGrid = IEC_GRID, dc: float | None = None) -> np.ndarray:
        n = grid.n_weights
        if self.initial_weights is not None:
            if len(self.initial_weights) != n:
                raise InvalidSpecError(f"initial_weights has {len(self.initial_weights)} entries, expected {n}")
            return np.array(self.initial_weights)
        if self.init == "seeded":
            w = np.zeros(n)
            w[0] = 1.0 if dc is None else float(dc)
            return w
        w = np.ones(n)
        if self.init == "random":
            w[2:] = SplitMix64(self.seed).uniform(-self.random_scale, self.random_scale, size=n - 2)
        w[1] = 0.0
        return w


@dataclass(frozen=True)
class AdalineState:
    weights: np.ndarray
    step: int = 0
    last_error: float = 0.0

    @classmethod
    def initial(cls, config: AdalineConfig, grid: FlickerGrid = IEC_GRID, dc: float | None = None) -> "AdalineState":
        return cls(config.weights0(grid, dc), 0, 0.0)


def basis_vector(k: int, tau_s: float, grid: FlickerGrid = IEC_GRID) -> np.ndarray:
    angles = 2.0 * np.pi * grid.as_array() * (k * tau_s)
    b = np.empty(grid.n_weights)
    b[0] = 1.0
    b[1] = 0.0
    b[2::2] = np.cos(angles)
    b[3::2] = -np.sin(angles)
    return b


def basis_matrix(indices: Sequence[int], tau_s: float, grid: FlickerGrid = IEC_GRID) -> np.ndarray:
    """Stacked basis vectors, one row per sample index."""
    t = np.asarray(indices, dtype=float) * tau_s
    angles = 2.0 * np.pi * np.outer(t, grid.as_array())
    B = np.empty((t.size, grid.n_weights))
    B[:, 0] = 1.0
    B[:, 1] = 0.0
    B[:, 2::2] = np.cos(angles)
    B[:, 3::2] = -np.sin(angles)
    return B


def learning_rate(k: int, config: AdalineConfig) -> float:
    return config.initial_rate / (1.0 + k / config.decay)


def update(state: AdalineState, target: float, basis: np.ndarray, config: AdalineConfig) -> AdalineState:
    """One normalised Widrow-Hoff step towards ``target``."""
    b = np.asarray(basis, dtype=float)
    w = state.weights
    if b.shape != w.shape:
        raise InvalidSpecError(f"basis has shape {b.shape}, weights have {w.shape}")
    if not np.isfinite(target) or not np.all(np.isfinite(b)):
        raise NumericInputError(f"non-finite ADALINE input at step {state.step}")
    error = float(target - w @ b)
    denom = config.regularizer + b @ b
    w_new = w + (learning_rate(state.step, config) * error / denom) * b
    return AdalineState(w_new, state.step + 1, error)


def _amplitudes(weights: np.ndarray, step=None):
    dc = np.abs(weights[..., 0])
    if np.any(dc < DEGENERATE_LEVEL):
        raise DegenerateEnvelopeError("harmonic amplitude is vanishingly small", step)
    c = weights[..., 2::2]
    s = weights[..., 3::2]
    rel = 2.0 * np.hypot(c, s) / dc[..., None]
    phases = np.arctan2(s, c)
    return dc, rel, phases


def extract_amplitudes(state: AdalineState, grid: FlickerGrid = IEC_GRID):
    """Return ``(V_n, dV_i / V_t for every grid bin, flicker phases)``.

    ``V_n`` is ``|w_1|``; the second weight never receives a gradient and is
    not included.  Amplitudes are reported as dV/V_t, twice the per-bin
    weight magnitude divided by ``V_n``.
    """
    w = np.asarray(state.weights, dtype=float)
    if w.size != grid.n_weights:
        raise InvalidSpecError(f"state has {w.size} weights, grid needs {grid.n_weights}")
    if not np.all(np.isfinite(w)):
        raise NumericInputError("ADALINE weights are not finite")
    dc, rel, phases = _amplitudes(w, state.step)
    return float(dc), rel, phases


@dataclass
class AdalineBank:
    """One ADALINE per envelope channel, stepped together on a shared basis.

    Matches calling :func:`update` on each channel up to rounding.
    """

    config: AdalineConfig
    n_channels: int
    grid: FlickerGrid = IEC_GRID
    dc: Sequence[float] | None = None  # per-channel seed for init="seeded"
    weights: np.ndarray = field(init=False)
    step: int = field(init=False, default=0)
    last_error: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.dc is not None and len(self.dc) != self.n_channels:
            raise InvalidSpecError(f"dc has {len(self.dc)} entries, expected {self.n_channels}")
        self.weights = np.stack(
            [self.config.weights0(self.grid, None if self.dc is None else self.dc[n]) for n in range(self.n_channels)]
        )
        self.last_error = np.zeros(self.n_channels)

    def update(self, targets: np.ndarray, basis: np.ndarray) -> None:
        targets = np.asarray(targets, dtype=float)
        # a sum is non-finite iff some term is (or terms overflow together)
        if not math.isfinite(targets.sum() + basis.sum()):
            raise NumericInputError(f"non-finite ADALINE input at step {self.step}")
        errors = targets - self.weights @ basis
        denom = self.config.regularizer + basis @ basis
        coef = learning_rate(self.step, self.config) * errors / denom
        self.weights += coef[:, None] * basis[None, :]
        self.last_error = errors
        self.step += 1

    def channel(self, n: int) -> AdalineState:
        return AdalineState(self.weights[n].copy(), self.step, float(self.last_error[n]))

    def amplitudes(self):
        """``(V, rel, phases)`` arrays of shape (N,), (N, M), (N, M)."""
        if not np.all(np.isfinite(self.weights)):
            raise NumericInputError(f"ADALINE weights diverged by step {self.step}")
        return _amplitudes(self.weights, self.step)
