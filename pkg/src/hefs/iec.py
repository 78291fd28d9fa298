"""IEC 61000-4-15 flicker frequency grid and unity-sensation amplitudes."""

import numpy as np

from .errors import UnknownFrequencyError

GRID_FREQUENCIES = (
    0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0,
    6.5, 7.0, 7.5, 8.0, 8.8, 9.5, 10.0, 10.5, 11.0, 11.5, 12.0, 13.0,
    14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 23.0, 24.0, 25.0,
)

# relative amplitude dV/V_t giving S = 1 in a 230 V / 50 Hz system
UNITY_SENSATION_AMPLITUDES = (
    0.0234, 0.01432, 0.0108, 0.00882, 0.00754, 0.00654, 0.00568, 0.005,
    0.00446, 0.00398, 0.0036, 0.00328, 0.003, 0.0028, 0.00266, 0.00256,
    0.0025, 0.00254, 0.0026, 0.0027, 0.00282, 0.00296, 0.00312, 0.00348,
    0.00388, 0.00432, 0.0048, 0.0053, 0.00584, 0.0064, 0.007, 0.0076,
    0.00824, 0.0089, 0.00962, 0.01042,
)

REFERENCE_TABLE_ID = "IEC61000-4-15/230V-50Hz unity-S"

_LOOKUP = {f: a for f, a in zip(GRID_FREQUENCIES, UNITY_SENSATION_AMPLITUDES)}


def grid_index(frequency: float) -> int:
    for i, f in enumerate(GRID_FREQUENCIES):
        if abs(f - frequency) <= 1e-9:
            return i
    raise UnknownFrequencyError(frequency)


def iec_reference_amplitude(frequency: float) -> float:
    """Relative amplitude dV/V_t that yields unit sensation at ``frequency``."""
    return UNITY_SENSATION_AMPLITUDES[grid_index(frequency)]


def reference_amplitudes() -> np.ndarray:
    return np.array(UNITY_SENSATION_AMPLITUDES)
