"""Exception types shared across the toolkit."""


class InvalidInput(ValueError):
    """A score or probability vector violates its invariants."""


class InvalidTemperature(ValueError):
    """Softmax temperature is not a positive finite real."""


class InvalidOrder(ValueError):
    """Entropy order outside the allowed range."""


class DegenerateVocabulary(ValueError):
    """Operation needs at least two vocabulary entries."""


class EmptySet(ValueError):
    """A truncation threshold admitted no tokens."""


class InsufficientData(ValueError):
    """A metric received fewer data points than it needs."""


class UnsupportedFormat(ValueError):
    """Unknown magic bytes or version in a trace file."""


class CorruptTrace(ValueError):
    """Trace file is truncated or internally inconsistent."""


class UsageError(ValueError):
    """Malformed command-line arguments."""
