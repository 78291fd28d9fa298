"""Robust H-infinity tracking of per-harmonic envelopes and phases.

The measurement model is ``z_k = H_k x + noise`` with the quadrature state

    x = [E_1 cos(phi_1), E_1 sin(phi_1), ..., E_N cos(phi_N), E_N sin(phi_N)]

and the structure row ``H_k = [cos(w_1 k), -sin(w_1 k), ..., cos(w_N k), -sin(w_N k)]``
where ``w_n = 2 pi n f ts``.  The state transition is the identity.  One step
(order pinned for reproducibility):

1. ``M = I - a P + H^T R^-1 H P`` with the covariance ``P`` held at entry,
2. ``K = P M^-1 H^T R^-1``,
3. ``x <- x + K (z - H x)``,
4. ``P <- sym(P M^-1) + Q`` with
   ``Q = q I + q_mod u u^T + q_f v v^T`` (``u``, ``v`` unit vectors, below).

Two additions keep the recursion usable with the reference tuning
(``alpha = 8``, ``P0 = 1000 I``):

* ``a`` is the robustness factor ``alpha`` clamped to
  ``margin * lambda_min(P^-1 + H^T R^-1 H)``.  Without the clamp the very
  first update is infeasible (``P`` turns indefinite) because a single scalar
  measurement cannot offset ``alpha`` in the 2N - 1 unobserved directions.
  Once enough information has accumulated the clamp is inactive.
* ``Q`` is a random-walk process noise.  Without it the information grows
  without bound, the gain decays like 1/k and the envelopes freeze at their
  average instead of following the flicker modulation.  Because every
  harmonic carries the same modulation, the state moves as ``m(t) x0``; the
  rank-one term along the current estimate ``u`` lets the filter follow that
  one scalar quickly while the small isotropic term keeps phases adaptable.
  A power-frequency error turns pair ``n`` at ``n`` times a common rate, so a
  second rank-one term along that rotation ``v`` keeps the filter locked when
  the supplied frequency is off.

Setting ``feasibility_margin=None`` and all noise terms to 0 gives the bare
recursion, which raises :class:`FeasibilityError` on the reference tuning.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import FeasibilityError, InvalidSpecError

COND_LIMIT = 1e12


@dataclass(frozen=True)
class HinfConfig:
    harmonic_orders: tuple[int, ...] = (1,)
    alpha: float = 8.0
    measurement_noise: float = 0.007
    initial_covariance_scale: float = 1e3
    initial_state: tuple[float, ...] | None = None  # None -> all ones
    process_noise: float = 1e-6
    modulation_noise: float = 1e-2
    frequency_noise: float = 1e-4
    feasibility_margin: float | None = 0.5

    def __post_init__(self):
        object.__setattr__(self, "harmonic_orders", tuple(int(n) for n in self.harmonic_orders))
        if not self.harmonic_orders or min(self.harmonic_orders) < 1:
            raise InvalidSpecError("harmonic_orders must be a non-empty list of positive integers")
        if not self.alpha > 0:
            raise InvalidSpecError(f"alpha must be > 0, got {self.alpha}")
        if not self.measurement_noise > 0:
            raise InvalidSpecError(f"measurement_noise must be > 0, got {self.measurement_noise}")
        if not self.initial_covariance_scale > 0:
            raise InvalidSpecError("initial_covariance_scale must be > 0")
        if not self.process_noise >= 0:
            raise InvalidSpecError(f"process_noise must be >= 0, got {self.process_noise}")
        if not self.modulation_noise >= 0:
            raise InvalidSpecError(f"modulation_noise must be >= 0, got {self.modulation_noise}")
        if not self.frequency_noise >= 0:
            raise InvalidSpecError(f"frequency_noise must be >= 0, got {self.frequency_noise}")
        if self.feasibility_margin is not None and not 0 < self.feasibility_margin < 1:
            raise InvalidSpecError("feasibility_margin must lie in (0, 1) or be None")
        if self.initial_state is not None:
            object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
            if len(self.initial_state) != self.dim:
                raise InvalidSpecError(
                    f"initial_state has {len(self.initial_state)} entries, expected {self.dim}"
                )

    @property
    def dim(self) -> int:
        return 2 * len(self.harmonic_orders)


@dataclass(frozen=True)
class HinfState:
    x_hat: np.ndarray
    covariance: np.ndarray
    step: int = 0

    @classmethod
    def initial(cls, config: HinfConfig, step: int = 0) -> "HinfState":
        n = config.dim
        x0 = np.ones(n) if config.initial_state is None else np.array(config.initial_state)
        return cls(x0, config.initial_covariance_scale * np.eye(n), step)


@dataclass(frozen=True)
class EnvelopeFrame:
    step: int
    envelopes: np.ndarray
    phases: np.ndarray


def structure_row(k: int, f: float, tau_s: float, orders: Sequence[int]) -> np.ndarray:
    angles = 2.0 * np.pi * f * k * tau_s * np.asarray(orders, dtype=float)
    row = np.empty(2 * len(orders))
    row[0::2] = np.cos(angles)
    row[1::2] = -np.sin(angles)
    return row


@lru_cache(maxsize=None)
def _identity(n: int) -> np.ndarray:
    eye = np.eye(n)
    eye.setflags(write=False)
    return eye


def _effective_alpha(P: np.ndarray, h: np.ndarray, config: HinfConfig) -> float:
    margin = config.feasibility_margin
    if margin is None:
        return config.alpha
    # lambda_max(P) <= ||P||_inf, so this test proves the clamp is inactive
    if np.abs(P).sum(axis=1).max() * config.alpha <= margin:
        return config.alpha
    info = np.linalg.inv(P) + np.outer(h, h) / config.measurement_noise
    lam = float(np.linalg.eigvalsh(0.5 * (info + info.T))[0])
    return min(config.alpha, margin * lam)


def step(state: HinfState, config: HinfConfig, z_k: float, h_row: np.ndarray) -> HinfState:
    """Advance the filter by one measurement."""
    P = state.covariance
    h = np.asarray(h_row, dtype=float)
    n = P.shape[0]
    if h.shape != (n,):
        raise InvalidSpecError(f"structure row has shape {h.shape}, expected ({n},)")
    r_inv = 1.0 / config.measurement_noise

    a = _effective_alpha(P, h, config)
    inner = _identity(n) - a * P + r_inv * np.outer(h, h @ P)
    try:
        inner_inv = np.linalg.inv(inner)
    except np.linalg.LinAlgError as exc:
        raise FeasibilityError("inner Riccati matrix is singular", state.step) from exc
    cond = np.abs(inner).sum(axis=0).max() * np.abs(inner_inv).sum(axis=0).max()
    if not cond <= COND_LIMIT:
        raise FeasibilityError(f"inner Riccati matrix is ill-conditioned (cond ~ {cond:.3g})", state.step)

    P_inner = P @ inner_inv
    gain = r_inv * (P_inner @ h)
    innovation = z_k - h @ state.x_hat
    x_new = state.x_hat + gain * innovation

    P_new = 0.5 * (P_inner + P_inner.T)
    if config.process_noise:
        P_new[np.diag_indices(n)] += config.process_noise
    if config.modulation_noise:
        norm2 = float(x_new @ x_new)
        if norm2 > 0:
            P_new += (config.modulation_noise / norm2) * np.outer(x_new, x_new)
    if config.frequency_noise:
        v = rotation_direction(x_new, config.harmonic_orders)
        norm2 = float(v @ v)
        if norm2 > 0:
            P_new += (config.frequency_noise / norm2) * np.outer(v, v)
    try:
        np.linalg.cholesky(P_new)
    except np.linalg.LinAlgError as exc:
        raise FeasibilityError("error covariance lost positive definiteness", state.step) from exc
    return HinfState(x_new, P_new, state.step + 1)


def rotation_direction(x: np.ndarray, orders: Sequence[int]) -> np.ndarray:
    """Direction in which a small power-frequency error moves the state.

    A frequency error ``d`` turns pair ``n`` at ``n d``; the derivative of
    ``(E cos p, E sin p)`` with respect to ``p`` is ``(-E sin p, E cos p)``.
    """
    n = np.asarray(orders, dtype=float)
    v = np.empty_like(x)
    v[0::2] = -n * x[1::2]
    v[1::2] = n * x[0::2]
    return v


def extract_envelopes(state: HinfState) -> EnvelopeFrame:
    x = np.asarray(state.x_hat, dtype=float)
    if x.size % 2:
        raise InvalidSpecError("state dimension must be even")
    return EnvelopeFrame(state.step, np.hypot(x[0::2], x[1::2]), _phase(x[1::2], x[0::2]))


def _phase(s: np.ndarray, c: np.ndarray) -> np.ndarray:
    # atan2 can return -pi; fold it onto +pi so phases lie in (-pi, pi]
    phi = np.arctan2(s, c)
    return np.where(phi <= -np.pi, np.pi, phi)


@dataclass
class EnvelopeTrace:
    """Per-sample output of :func:`track_envelopes`."""

    envelopes: np.ndarray  # (K, N)
    phases: np.ndarray  # (K, N)
    final: HinfState


def track_envelopes(
    samples: Sequence[float],
    config: HinfConfig,
    frequency: float,
    tau_s: float,
    start_index: int = 0,
    state: HinfState | None = None,
) -> EnvelopeTrace:
    """Run :func:`step` over a record and collect envelopes and phases."""
    z = np.asarray(samples, dtype=float)
    if state is None:
        state = HinfState.initial(config, start_index)
    n_harm = len(config.harmonic_orders)
    env = np.empty((z.size, n_harm))
    phase = np.empty((z.size, n_harm))
    orders = config.harmonic_orders
    for i, zk in enumerate(z):
        h = structure_row(start_index + i, frequency, tau_s, orders)
        state = step(state, config, zk, h)
        x = state.x_hat
        env[i] = np.hypot(x[0::2], x[1::2])
        phase[i] = _phase(x[1::2], x[0::2])
    return EnvelopeTrace(env, phase, state)


def degrees_error(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Wrapped absolute phase error in degrees."""
    d = np.angle(np.exp(1j * (np.asarray(estimate) - np.asarray(truth))))
    return np.abs(np.degrees(d))


__all__ = [
    "HinfConfig",
    "HinfState",
    "EnvelopeFrame",
    "EnvelopeTrace",
    "structure_row",
    "step",
    "extract_envelopes",
    "rotation_direction",
    "track_envelopes",
    "degrees_error",
    "COND_LIMIT",
]
