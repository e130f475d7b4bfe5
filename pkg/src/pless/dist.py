"""Distribution primitives: tempered softmax, entropies, collision likelihood.

All reductions accumulate in double precision regardless of how the input
was stored; trace files may hold single-precision rows, but a sum of squares
over a 10^5-token vocabulary loses meaningful bits in float32.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVocabulary, InvalidInput, InvalidOrder, InvalidTemperature

PROB_SUM_TOL = 1e-9


def _as_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput("expected a non-empty 1-d vector")
    return arr


@dataclass(frozen=True)
class LogitRow:
    """One decoding step's raw score vector, one entry per vocabulary token.

    Scores must be finite; rows are treated as immutable after construction
    and are safe to share between threads.
    """

    scores: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.scores)
        if not np.isfinite(arr).all():
            raise InvalidInput("scores must be finite")
        object.__setattr__(self, "scores", arr)

    @property
    def vocab_size(self) -> int:
        return self.scores.size


@dataclass(frozen=True)
class ProbDist:
    """A normalized token distribution: entries >= 0 summing to 1 (within 1e-9)."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _as_vector(self.probs)
        if not np.isfinite(arr).all() or bool((arr < 0.0).any()):
            raise InvalidInput("probabilities must be finite and non-negative")
        total = float(arr.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidInput(f"probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "probs", arr)

    @property
    def vocab_size(self) -> int:
        return self.probs.size

    @property
    def max_prob(self) -> float:
        return float(self.probs.max())


def softmax_with_temperature(row: LogitRow, tau: float) -> ProbDist:
    """Tempered softmax, max-shifted for numerical stability.

    tau <= 0 is rejected rather than coerced: greedy decoding is an explicit
    sampler mode, never an implicit reading of temperature zero.
    """
    if not isinstance(tau, (int, float)) or not math.isfinite(tau) or tau <= 0:
        raise InvalidTemperature(f"temperature must be a positive finite real, got {tau!r}")
    scaled = row.scores / float(tau)
    if not np.isfinite(scaled).all():
        raise InvalidInput("scores/temperature overflowed to non-finite values")
    weights = np.exp(scaled - scaled.max())
    return ProbDist(weights / weights.sum())


def shannon_entropy(d: ProbDist) -> float:
    """-sum(p ln p) in nats, with the convention 0 ln 0 = 0.

    Always in [0, ln c]: every term of the sum is non-positive.
    """
    p = d.probs
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log(p)
    return float(-np.nansum(terms))


def renyi_entropy(d: ProbDist, order: float) -> float:
    """Order-a entropy in nats; orders 0, 1, and inf use their limit forms.

    General orders are evaluated in log space (log-sum-exp over a*ln p) so
    that p**a cannot overflow or underflow for extreme orders.
    """
    a = float(order)
    if math.isnan(a) or a < 0.0:
        raise InvalidOrder(f"entropy order must be >= 0, got {order!r}")
    p = d.probs
    if a == 0.0:
        return float(np.log(np.count_nonzero(p > 0.0)))
    if a == 1.0:
        return shannon_entropy(d)
    if math.isinf(a):
        return -math.log(float(p.max()))
    logs = a * np.log(p[p > 0.0])
    m = float(logs.max())
    lse = m + math.log(float(np.exp(logs - m).sum()))
    return lse / (1.0 - a)


def collision_likelihood(d: ProbDist) -> float:
    """Probability that two independent draws from d coincide: sum(p^2).

    Single accumulation pass, no sorting.  Equals exp(-renyi_entropy(d, 2))
    and is bounded by 1/c from below and max(p) from above.
    """
    p = d.probs
    return float(np.dot(p, p))


def second_central_moment_unbiased(d: ProbDist) -> float:
    """Unbiased second central moment of the mass function: sum((p - 1/c)^2)/(c-1)."""
    c = d.vocab_size
    if c < 2:
        raise DegenerateVocabulary("second central moment needs at least two outcomes")
    dev = d.probs - 1.0 / c
    return float(np.dot(dev, dev)) / (c - 1)
