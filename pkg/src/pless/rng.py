"""Deterministic random streams for token sampling.

SplitMix64 is used instead of a platform RNG because sampled token ids must
be reproducible bit-for-bit across language ports of this toolkit (the
logits-processor bindings replay the same streams).  The generator state is
a single 64-bit counter, so streams can be split per sequence without any
shared state.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche over 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """64-bit counter-based stream with deterministic per-index splitting."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._state = self.seed

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN_GAMMA) & MASK64
        return mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def split(self, index: int) -> "SplitMix64":
        """Child stream derived from the original seed; independent of how
        much of this stream has been consumed."""
        child = mix64(self.seed ^ mix64(((index + 1) * GOLDEN_GAMMA) & MASK64))
        return SplitMix64(child)
