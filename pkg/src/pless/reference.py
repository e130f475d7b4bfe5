"""Sort-based reference implementations of every truncation method.

These rebuild each admitted set by sorting the distribution and walking it
with scalar Python arithmetic, independently of the threshold-scan
implementations in `samplers`.  They exist for two reasons: equivalence
checks (same inputs must yield identical admitted sets and renormalized
probabilities) and latency benchmarks of the sorted realization that
mainstream inference stacks ship for threshold methods.

Renormalization reuses the same ascending-token-id arithmetic as the main
implementations so that comparisons can be bit-exact; the independence lives
in the threshold computation and set construction.
"""

from __future__ import annotations

import math

import numpy as np

from .dist import ProbDist
from .errors import DegenerateVocabulary
from .samplers import THRESHOLD_CLAMP_TOL, TruncationResult, _finish


def _descending_order(probs: np.ndarray, stable: bool = False) -> np.ndarray:
    # value-threshold walks admit whole tie blocks, so they only need a
    # deterministic order; rank cuts (top-p/top-k) need the stable order
    # that keeps equal probabilities ascending by token id
    return np.argsort(-probs, kind="stable" if stable else None)


def _argmax_set(d: ProbDist, order: np.ndarray) -> TruncationResult:
    probs = d.probs
    top = float(probs[order[0]])
    ties = [int(i) for i in order if probs[i] == top]
    admitted = np.sort(np.asarray(ties, dtype=np.int64))
    return TruncationResult(
        threshold=top,
        admitted=admitted,
        renorm_probs=np.full(admitted.size, 1.0 / admitted.size),
        source=d,
    )


def _walk_at_least(d: ProbDist, threshold: float, order: np.ndarray = None) -> TruncationResult:
    """Walk the descending order, keeping tokens while p >= threshold."""
    probs = d.probs
    if order is None:
        order = _descending_order(probs)
    kept = []
    for i in order:
        p = float(probs[i])
        if p < threshold or p <= 0.0:
            break
        kept.append(int(i))
    if not kept:
        return _argmax_set(d, order)
    admitted = np.sort(np.asarray(kept, dtype=np.int64))
    return _finish(d, threshold, admitted)


def _clamped(threshold: float, d: ProbDist) -> float:
    top = d.max_prob
    if top < threshold <= top + THRESHOLD_CLAMP_TOL:
        return top
    return threshold


def pless(d: ProbDist) -> TruncationResult:
    like = math.fsum(float(x) * float(x) for x in d.probs)
    return _walk_at_least(d, _clamped(like, d))


def pless_norm(d: ProbDist) -> TruncationResult:
    c = d.vocab_size
    if c < 2:
        raise DegenerateVocabulary("normalized threshold needs at least two tokens")
    like = math.fsum(float(x) * float(x) for x in d.probs)
    relaxed = (c / (c - 1.0)) * like - 1.0 / (c - 1.0)
    if -THRESHOLD_CLAMP_TOL < relaxed < 0.0:
        relaxed = 0.0
    elif like < relaxed <= like + THRESHOLD_CLAMP_TOL:
        relaxed = like
    return _walk_at_least(d, _clamped(relaxed, d))


def korder(d: ProbDist, k: float) -> TruncationResult:
    """Direct power sums; adequate for well-scaled rows (no log-space rescue)."""
    if k == 1.0:
        log_threshold = math.fsum(float(x) * math.log(float(x)) for x in d.probs if x > 0.0)
    else:
        total = math.fsum(float(x) ** k for x in d.probs if x > 0.0)
        log_threshold = math.log(total) / (k - 1.0)
    return _walk_at_least(d, _clamped(math.exp(log_threshold), d))


def top_p(d: ProbDist, p: float) -> TruncationResult:
    probs = d.probs
    order = _descending_order(probs, stable=True)
    kept = []
    cum = 0.0
    for i in order:
        q = float(probs[i])
        if q <= 0.0:
            break
        kept.append(int(i))
        cum += q
        if cum >= p:
            break
    if not kept:
        return _argmax_set(d, order)
    admitted = np.sort(np.asarray(kept, dtype=np.int64))
    return _finish(d, min(float(probs[i]) for i in kept), admitted)


def top_k(d: ProbDist, k: int) -> TruncationResult:
    probs = d.probs
    order = _descending_order(probs, stable=True)
    kept = [int(i) for i in order[: min(int(k), probs.size)] if probs[i] > 0.0]
    admitted = np.sort(np.asarray(kept, dtype=np.int64))
    return _finish(d, min(float(probs[i]) for i in kept), admitted)


def min_p(d: ProbDist, p_base: float) -> TruncationResult:
    probs = d.probs
    order = _descending_order(probs)
    threshold = p_base * float(probs[order[0]])
    return _walk_at_least(d, threshold, order)


def epsilon(d: ProbDist, eps: float) -> TruncationResult:
    return _walk_at_least(d, eps)


def eta(d: ProbDist, eps: float) -> TruncationResult:
    entropy = -math.fsum(float(x) * math.log(float(x)) for x in d.probs if x > 0.0)
    return _walk_at_least(d, min(eps, math.sqrt(eps) * math.exp(-entropy)))


def mirostat(d: ProbDist, mu: float) -> TruncationResult:
    # shares the elementwise log with the scan implementation so the
    # surprisal comparison is bitwise consistent between the two routes
    probs = d.probs
    with np.errstate(divide="ignore"):
        surprisal = -np.log(probs)
    order = _descending_order(probs)
    kept = []
    for i in order:
        if probs[i] <= 0.0 or surprisal[i] > mu:
            break
        kept.append(int(i))
    if not kept:
        return _argmax_set(d, order)
    admitted = np.sort(np.asarray(kept, dtype=np.int64))
    return _finish(d, math.exp(-mu), admitted)
