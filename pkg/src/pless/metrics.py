"""Evaluation metrics: accuracy-temperature AUC, n-gram repetition diversity,
and per-step summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InsufficientData, InvalidInput

ENTROPY_BIN_WIDTH = 0.25  # nats


@dataclass(frozen=True)
class AccuracyCurve:
    """Accuracy measured at strictly increasing temperatures (at least two)."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(t), float(a)) for t, a in self.points)
        if len(pts) < 2:
            raise InsufficientData("an accuracy curve needs at least two points")
        for temp, acc in pts:
            if not (temp > 0 and math.isfinite(temp)):
                raise InvalidInput(f"temperatures must be positive, got {temp!r}")
            if not (0.0 <= acc <= 1.0):
                raise InvalidInput(f"accuracy must be in [0, 1], got {acc!r}")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise InvalidInput("temperatures must be strictly increasing")
        object.__setattr__(self, "points", pts)


def auc(curve: AccuracyCurve) -> float:
    """Trapezoidal area under the curve, normalized by the temperature span."""
    temps = np.array([t for t, _ in curve.points])
    accs = np.array([a for _, a in curve.points])
    area = float(np.trapezoid(accs, temps))
    return area / float(temps[-1] - temps[0])


@dataclass(frozen=True)
class DiversityReport:
    """Per-n repetition rates and their product-form diversity score.

    diversity = prod(1 - rep_n); 1.0 for fully novel text, near 0 for loops.
    """

    rep_n: Mapping[int, float]
    diversity: float

    def as_percent(self) -> "DiversityReport":
        return DiversityReport(
            rep_n={n: 100.0 * r for n, r in self.rep_n.items()},
            diversity=100.0 * self.diversity,
        )


def ngram_diversity(tokens: Sequence[int], n_range: Sequence[int] = (2, 3, 4)) -> DiversityReport:
    """Repetition rate per n (1 - distinct/total n-grams) and their product."""
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise InvalidInput(f"n-gram sizes must be positive, got {n_range!r}")
    if len(tokens) < max(ns):
        raise InsufficientData(
            f"sequence of length {len(tokens)} is shorter than the largest n-gram size {max(ns)}"
        )
    seq = tuple(tokens)
    rep = {}
    for n in ns:
        total = len(seq) - n + 1
        distinct = len(set(seq[i : i + n] for i in range(total)))
        rep[n] = 1.0 - distinct / total
    diversity = 1.0
    for n in ns:
        diversity *= 1.0 - rep[n]
    return DiversityReport(rep_n=rep, diversity=diversity)


@dataclass(frozen=True)
class StepStats:
    """Per-step record emitted by the replay engine."""

    step: int
    shannon_entropy: float
    collision_entropy: float
    threshold: float
    admitted_count: int
    latency: Optional[float] = None


@dataclass(frozen=True)
class StatsSummary:
    """Aggregates over a run: means, latency spread, and per-stratum histograms.

    entropy_histograms maps each observed admitted-token count to a
    fixed-width (0.25 nat) histogram of the entropies seen at that count.
    """

    step_count: int
    mean_entropy: float
    mean_collision_entropy: float
    mean_admitted: float
    latency_mean: Optional[float]
    latency_std: Optional[float]
    entropy_histograms: Mapping[int, tuple[np.ndarray, np.ndarray]] = field(repr=False)


def aggregate_step_stats(stats: Sequence[StepStats]) -> StatsSummary:
    """Arithmetic means, sample standard deviations, and binned entropies."""
    if len(stats) == 0:
        raise InsufficientData("no step statistics to aggregate")
    entropies = np.array([s.shannon_entropy for s in stats])
    collisions = np.array([s.collision_entropy for s in stats])
    counts = np.array([s.admitted_count for s in stats])
    latencies = [s.latency for s in stats if s.latency is not None]

    latency_mean = latency_std = None
    if latencies:
        latency_mean = float(np.mean(latencies))
        latency_std = float(np.std(latencies, ddof=1)) if len(latencies) > 1 else 0.0

    histograms = {}
    top = float(entropies.max())
    edges = np.arange(0.0, max(top, ENTROPY_BIN_WIDTH) + ENTROPY_BIN_WIDTH, ENTROPY_BIN_WIDTH)
    for count in np.unique(counts):
        values = entropies[counts == count]
        hist, _ = np.histogram(values, bins=edges)
        histograms[int(count)] = (edges, hist)

    return StatsSummary(
        step_count=len(stats),
        mean_entropy=float(entropies.mean()),
        mean_collision_entropy=float(collisions.mean()),
        mean_admitted=float(counts.mean()),
        latency_mean=latency_mean,
        latency_std=latency_std,
        entropy_histograms=histograms,
    )
