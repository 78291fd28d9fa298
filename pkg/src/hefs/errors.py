"""Exception hierarchy shared by every stage of the pipeline."""


class HefsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpecError(HefsError, ValueError):
    """A waveform, filter or pipeline configuration violates its invariants."""


class UnknownFrequencyError(HefsError, KeyError):
    def __init__(self, frequency):
        self.frequency = frequency
        super().__init__(f"{frequency!r} Hz is not on the IEC flicker grid")

    def __str__(self):
        return self.args[0]


class InsufficientDataError(HefsError, ValueError):
    """The input record is too short for the requested analysis."""


class NumericInputError(HefsError, ValueError):
    """Non-finite values were fed to an estimator."""


class FeasibilityError(HefsError, ArithmeticError):
    """The H-infinity Riccati recursion left its feasible region.

    ``step`` is the sample index at which the violation was detected.
    """

    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class DegenerateEnvelopeError(HefsError, ArithmeticError):
    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)


class ShapeError(HefsError, ValueError):
    """Two sequences that must align have different lengths."""


class ParseError(HefsError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
