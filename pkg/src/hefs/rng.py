"""Seeded random streams that do not depend on the numpy version.

SplitMix64 (Steele, Lea & Flood 2014) supplies 64-bit words; uniforms use the
top 53 bits and Gaussians come from the Box-Muller transform.  Everything is
vectorised with wrapping uint64 arithmetic, so a given seed yields
bit-identical draws on any IEEE-754 platform with the same libm.
"""

from __future__ import annotations

import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def mix64(z):
    """SplitMix64 finaliser applied elementwise to uint64 values."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, index: int) -> int:
    """Seed of substream ``index`` of a campaign seeded with ``seed``.

    Equal to output number ``index`` of the SplitMix64 sequence started at
    ``seed``, so substreams are reproducible and independent of worker order.
    """
    state = (int(seed) + (int(index) + 1) * int(GOLDEN_GAMMA)) & _MASK64
    return int(mix64(np.uint64(state)))


class SplitMix64:
    """Stateful stream; every draw advances the counter by the words used."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def words(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + steps * GOLDEN_GAMMA
        self.state = (self.state + n * int(GOLDEN_GAMMA)) & _MASK64
        return mix64(states)

    def uniform(self, low=0.0, high=1.0, size=None):
        n = 1 if size is None else int(np.prod(size))
        u = (self.words(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        u = low + (high - low) * u
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def standard_normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        w = self.words(2 * pairs) >> np.uint64(11)
        # u1 in (0, 1] keeps the log finite
        u1 = (w[0::2].astype(np.float64) + 1.0) * 2.0**-53
        u2 = w[1::2].astype(np.float64) * 2.0**-53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:n]
