"""Truncation samplers behind one uniform interface.

Three threshold variants derived from the whole distribution (collision
likelihood, its normalized relaxation, and the k-order generalization) plus
the six standard baselines: top-p, top-k, min-p, epsilon, eta, and mirostat.

Only top-p and top-k sort.  Everything else is a threshold plus a linear
scan, which is what makes the per-token latency comparison meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .dist import (
    LogitRow,
    ProbDist,
    collision_likelihood,
    renyi_entropy,
    shannon_entropy,
    softmax_with_temperature,
)
from .errors import DegenerateVocabulary, EmptySet, InvalidInput, InvalidOrder
from .rng import SplitMix64

# Derived thresholds may exceed max(p) by float error; pull them back within
# this tolerance so the admitted set cannot come out empty.
THRESHOLD_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class PLess:
    """Hyperparameter-free: threshold = collision likelihood of the distribution."""


@dataclass(frozen=True)
class PLessNorm:
    """PLess relaxed by the normalized chance of an incorrect random guess."""


@dataclass(frozen=True)
class KOrder:
    """Threshold exp(-H_k); interpolates uniform-cutoff (k->0) to greedy (k->inf)."""

    k: float

    def __post_init__(self):
        if not (isinstance(self.k, (int, float)) and self.k > 0):
            raise InvalidOrder(f"k must be > 0, got {self.k!r}")


@dataclass(frozen=True)
class TopP:
    """Smallest probability-sorted prefix whose cumulative mass reaches p."""

    p: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise InvalidInput(f"top-p mass must be in (0, 1], got {self.p!r}")


@dataclass(frozen=True)
class TopK:
    """The k most probable tokens."""

    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise InvalidInput(f"top-k size must be a positive integer, got {self.k!r}")


@dataclass(frozen=True)
class MinP:
    """Threshold = p_base times the modal probability."""

    p_base: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.p_base <= 1.0):
            raise InvalidInput(f"min-p scale must be in (0, 1], got {self.p_base!r}")


@dataclass(frozen=True)
class Epsilon:
    """Fixed absolute probability cutoff."""

    eps: float = 0.0002

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise InvalidInput(f"epsilon must be in (0, 1), got {self.eps!r}")


@dataclass(frozen=True)
class Eta:
    """Entropy-scaled cutoff: min(eps, sqrt(eps) * exp(-H))."""

    eps: float = 0.0002

    def __post_init__(self):
        if not (0.0 < self.eps < 1.0):
            raise InvalidInput(f"eta epsilon must be in (0, 1), got {self.eps!r}")


@dataclass(frozen=True)
class Mirostat:
    """Surprisal-budget truncation with a feedback update toward a target."""

    target_surprisal: float = 4.0
    learning_rate: float = 0.1

    def __post_init__(self):
        if not (self.target_surprisal > 0):
            raise InvalidInput(f"target surprisal must be > 0, got {self.target_surprisal!r}")
        if not (self.learning_rate > 0):
            raise InvalidInput(f"learning rate must be > 0, got {self.learning_rate!r}")


@dataclass(frozen=True)
class Greedy:
    """Deterministic argmax; the explicit stand-in for temperature -> 0."""


Method = Union[PLess, PLessNorm, KOrder, TopP, TopK, MinP, Epsilon, Eta, Mirostat, Greedy]


@dataclass(frozen=True)
class SamplerConfig:
    """A truncation method plus the softmax temperature it runs at."""

    method: Method
    temperature: float = 1.0

    def __post_init__(self):
        t = self.temperature
        if not (isinstance(t, (int, float)) and math.isfinite(t) and t > 0):
            raise InvalidInput(f"temperature must be a positive finite real, got {t!r}")


@dataclass(frozen=True)
class MirostatState:
    """Per-sequence surprisal budget; owned by exactly one sequence."""

    mu: float

    @classmethod
    def fresh(cls, cfg: Mirostat) -> "MirostatState":
        return cls(mu=2.0 * cfg.target_surprisal)


@dataclass(frozen=True)
class TruncationResult:
    """One step's truncation outcome.

    admitted holds token ids in ascending order; renorm_probs aligns with it
    and sums to 1.  threshold is the realized probability cutoff.  The
    pre-truncation distribution is retained so statistics (its entropy) can
    be read on demand without taxing the sampling hot path.
    """

    threshold: float
    admitted: np.ndarray
    renorm_probs: np.ndarray
    source: ProbDist = field(repr=False)

    @property
    def source_entropy(self) -> float:
        return shannon_entropy(self.source)

    @property
    def admitted_count(self) -> int:
        return self.admitted.size


def _finish(d: ProbDist, threshold: float, admitted: np.ndarray) -> TruncationResult:
    kept = d.probs[admitted]
    return TruncationResult(
        threshold=float(threshold),
        admitted=admitted,
        renorm_probs=kept / kept.sum(),
        source=d,
    )


def pless_threshold(d: ProbDist) -> float:
    """Admission cutoff equal to the collision likelihood; one pass, no sort."""
    return collision_likelihood(d)


def pless_norm_threshold(d: ProbDist) -> float:
    """Relaxed cutoff (c*L - 1)/(c - 1); always in [max(0, L - 1/c), L]."""
    c = d.vocab_size
    if c < 2:
        raise DegenerateVocabulary("normalized threshold needs at least two tokens")
    like = collision_likelihood(d)
    relaxed = (c / (c - 1.0)) * like - 1.0 / (c - 1.0)
    # float error may push the value marginally outside its proven bounds
    if -THRESHOLD_CLAMP_TOL < relaxed < 0.0:
        return 0.0
    if like < relaxed <= like + THRESHOLD_CLAMP_TOL:
        return like
    return relaxed


def korder_threshold(d: ProbDist, k: float) -> float:
    """Generalized cutoff exp(-H_k); nondecreasing in k, equals sum(p^2) at k=2."""
    if not (isinstance(k, (int, float)) and k > 0):
        raise InvalidOrder(f"order must be > 0, got {k!r}")
    return math.exp(-renyi_entropy(d, k))


def _clamp_to_max(threshold: float, d: ProbDist) -> float:
    top = d.max_prob
    if top < threshold <= top + THRESHOLD_CLAMP_TOL:
        return top
    return threshold


def truncate_at(d: ProbDist, threshold: float) -> TruncationResult:
    """Admit every token with probability >= threshold (ties included).

    Zero-probability tokens are never admitted, keeping every renormalized
    entry strictly positive.  Membership is one comparison pass and the
    renormalization a second pass; nothing is sorted.
    """
    p = d.probs
    if threshold > 0.0:
        mask = p >= threshold
    else:
        mask = p > 0.0
    admitted = np.flatnonzero(mask)
    if admitted.size == 0:
        raise EmptySet(f"no token has probability >= {threshold!r}")
    return _finish(d, threshold, admitted)


def fallback_to_argmax(d: ProbDist) -> TruncationResult:
    """All modal tokens (ties included), renormalized uniformly."""
    p = d.probs
    top = p.max()
    admitted = np.flatnonzero(p == top)
    return TruncationResult(
        threshold=float(top),
        admitted=admitted,
        renorm_probs=np.full(admitted.size, 1.0 / admitted.size),
        source=d,
    )


def _take_ranked_prefix(probs: np.ndarray, boundary: float, prefix_size: int) -> np.ndarray:
    """Token ids of the first prefix_size ranks, ascending-id among boundary ties.

    Reconstructing by value keeps rank-tie semantics deterministic without
    paying for a stable sort: everything above the boundary probability is
    in, then the lowest-index tokens sitting exactly on it fill the count.
    """
    above = np.flatnonzero(probs > boundary)
    ties = np.flatnonzero(probs == boundary)[: prefix_size - above.size]
    return np.sort(np.concatenate([above, ties]))


def top_p_truncate(d: ProbDist, p: float) -> TruncationResult:
    """Minimal descending-probability prefix with cumulative mass >= p.

    Equal probabilities at the cut boundary are resolved by ascending token
    id, so results are deterministic.
    """
    if not (0.0 < p <= 1.0):
        raise InvalidInput(f"top-p mass must be in (0, 1], got {p!r}")
    probs = d.probs
    ranked = -np.sort(-probs)
    cum = np.cumsum(ranked)
    cut = int(np.searchsorted(cum, p, side="left"))
    if cut >= ranked.size:
        cut = ranked.size - 1
    while ranked[cut] <= 0.0:  # mass never reached p: drop the zero tail
        cut -= 1
    boundary = float(ranked[cut])
    admitted = _take_ranked_prefix(probs, boundary, cut + 1)
    return _finish(d, boundary, admitted)


def top_k_truncate(d: ProbDist, k: int) -> TruncationResult:
    """The k most probable tokens; rank ties resolved by ascending token id."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise InvalidInput(f"top-k size must be a positive integer, got {k!r}")
    probs = d.probs
    take = min(int(k), probs.size)
    ranked = -np.sort(-probs)
    while ranked[take - 1] <= 0.0:  # zero-mass tokens are never admitted
        take -= 1
    boundary = float(ranked[take - 1])
    admitted = _take_ranked_prefix(probs, boundary, take)
    return _finish(d, boundary, admitted)


def min_p_truncate(d: ProbDist, p_base: float) -> TruncationResult:
    """Cutoff at p_base times the modal probability; the mode always survives."""
    if not (0.0 < p_base <= 1.0):
        raise InvalidInput(f"min-p scale must be in (0, 1], got {p_base!r}")
    return truncate_at(d, p_base * d.max_prob)


def epsilon_truncate(d: ProbDist, eps: float) -> TruncationResult:
    """Fixed cutoff; falls back to the modal tokens when nothing passes."""
    if not (0.0 < eps < 1.0):
        raise InvalidInput(f"epsilon must be in (0, 1), got {eps!r}")
    try:
        return truncate_at(d, eps)
    except EmptySet:
        return fallback_to_argmax(d)


def eta_truncate(d: ProbDist, eps: float) -> TruncationResult:
    """Entropy-scaled cutoff min(eps, sqrt(eps) * exp(-H)), with modal fallback."""
    if not (0.0 < eps < 1.0):
        raise InvalidInput(f"eta epsilon must be in (0, 1), got {eps!r}")
    threshold = min(eps, math.sqrt(eps) * math.exp(-shannon_entropy(d)))
    try:
        return truncate_at(d, threshold)
    except EmptySet:
        return fallback_to_argmax(d)


def _mirostat_truncate(d: ProbDist, mu: float) -> TruncationResult:
    # The defining predicate is -ln p <= mu, evaluated per token (log(0) ->
    # -inf is excluded automatically).  Sort-free: one vector log plus a scan.
    p = d.probs
    with np.errstate(divide="ignore"):
        surprisal = -np.log(p)
    admitted = np.flatnonzero(surprisal <= mu)
    if admitted.size == 0:
        return fallback_to_argmax(d)
    return _finish(d, math.exp(-mu), admitted)


def mirostat_step(
    d: ProbDist, state: MirostatState, cfg: Mirostat, rng: SplitMix64
) -> tuple[int, MirostatState]:
    """Sample under the current surprisal budget and update it.

    The observed surprisal is taken from the pre-truncation probability of
    the sampled token; the budget moves against the gap to the target.
    """
    token, _, new_state = _mirostat_sample(d, state, cfg, rng)
    return token, new_state


def _mirostat_sample(d, state, cfg, rng):
    result = _mirostat_truncate(d, state.mu)
    token = sample_token(result, rng)
    observed = -math.log(float(d.probs[token]))
    mu = state.mu - cfg.learning_rate * (observed - cfg.target_surprisal)
    return token, result, MirostatState(mu=mu)


def sample_token(t: TruncationResult, rng: SplitMix64) -> int:
    """Inverse-CDF draw over the admitted set in ascending token-id order.

    A single-token set returns immediately without consuming the stream.
    """
    if t.admitted.size == 1:
        return int(t.admitted[0])
    u = rng.next_float()
    cum = np.cumsum(t.renorm_probs)
    idx = int(np.searchsorted(cum, u, side="left"))
    if idx >= t.admitted.size:
        idx = t.admitted.size - 1
    return int(t.admitted[idx])


def truncate(method: Method, d: ProbDist, state: Optional[MirostatState] = None) -> TruncationResult:
    """Apply a stateless method's truncation rule (mirostat uses its state's budget)."""
    if isinstance(method, PLess):
        return truncate_at(d, _clamp_to_max(pless_threshold(d), d))
    if isinstance(method, PLessNorm):
        return truncate_at(d, _clamp_to_max(pless_norm_threshold(d), d))
    if isinstance(method, KOrder):
        return truncate_at(d, _clamp_to_max(korder_threshold(d, method.k), d))
    if isinstance(method, TopP):
        return top_p_truncate(d, method.p)
    if isinstance(method, TopK):
        return top_k_truncate(d, method.k)
    if isinstance(method, MinP):
        return min_p_truncate(d, method.p_base)
    if isinstance(method, Epsilon):
        return epsilon_truncate(d, method.eps)
    if isinstance(method, Eta):
        return eta_truncate(d, method.eps)
    if isinstance(method, Mirostat):
        mu = state.mu if state is not None else MirostatState.fresh(method).mu
        return _mirostat_truncate(d, mu)
    if isinstance(method, Greedy):
        return fallback_to_argmax(d)
    raise InvalidInput(f"unknown method {method!r}")


def run_sampler(
    cfg: SamplerConfig,
    row: LogitRow,
    state: Optional[MirostatState],
    rng: SplitMix64,
) -> tuple[int, TruncationResult, Optional[MirostatState]]:
    """Temper, truncate, and sample one step; threads mirostat state through."""
    d = softmax_with_temperature(row, cfg.temperature)
    method = cfg.method
    if isinstance(method, Mirostat):
        if state is None:
            state = MirostatState.fresh(method)
        token, result, state = _mirostat_sample(d, state, method, rng)
        return token, result, state
    if isinstance(method, Greedy):
        result = fallback_to_argmax(d)
        return int(result.admitted[0]), result, state
    result = truncate(method, d)
    return sample_token(result, rng), result, state
