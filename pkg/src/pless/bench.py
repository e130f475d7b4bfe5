"""Per-token latency measurement for the sampling stage.

Timers wrap threshold + truncation + draw only; building the step's
distribution is shared by every method and excluded.  All methods in one
run see the identical row stream, generated once per step, so comparisons
are fair.  Rows follow a rank-permuted power-law profile, the shape under
which the sorted and sort-free realizations differ most visibly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import reference
from .dist import ProbDist
from .errors import UsageError
from .rng import SplitMix64
from .samplers import Method, sample_token, truncate

ZIPF_EXPONENT = 1.2

BenchMethod = Union[Method, str]  # str names select a sorted reference realization


@dataclass(frozen=True)
class BenchResult:
    method: str
    vocab_size: int
    steps: int
    mean_seconds: float
    stddev_seconds: float


def _row_stream(vocab_size: int, steps: int, seed: int):
    rng = np.random.default_rng(seed)
    base = np.arange(1, vocab_size + 1, dtype=np.float64) ** (-ZIPF_EXPONENT)
    base /= base.sum()
    for _ in range(steps):
        row = np.empty(vocab_size)
        row[rng.permutation(vocab_size)] = base
        yield ProbDist(row)


def _reference_step(name: str) -> Callable[[ProbDist], object]:
    table = {
        "naive-pless": reference.pless,
        "naive-min-p": lambda d: reference.min_p(d, 0.1),
        "naive-top-p": lambda d: reference.top_p(d, 0.9),
        "naive-epsilon": lambda d: reference.epsilon(d, 0.0002),
        "naive-eta": lambda d: reference.eta(d, 0.0002),
    }
    if name not in table:
        raise UsageError(f"unknown reference method {name!r}")
    return table[name]


def _resolve(method: BenchMethod) -> Callable[[ProbDist], object]:
    if isinstance(method, str):
        return _reference_step(method)
    return lambda d, m=method: truncate(m, d)


def run_bench(
    methods: Sequence[tuple[BenchMethod, str]],
    vocab_sizes: Sequence[int],
    steps: int,
    warmup: int,
    seed: int,
) -> list[BenchResult]:
    """Mean and sample standard deviation of per-step wall time per method.

    Warm-up steps run and are discarded before any measurement counts.
    """
    results = []
    for vocab_size in vocab_sizes:
        fns = [(label, _resolve(method)) for method, label in methods]
        streams = {label: SplitMix64(seed).split(i + 1) for i, (_, label) in enumerate(methods)}
        times: dict[str, list[float]] = {label: [] for _, label in methods}
        for index, dist in enumerate(_row_stream(vocab_size, steps + warmup, seed)):
            for label, fn in fns:
                started = time.perf_counter()
                result = fn(dist)
                sample_token(result, streams[label])
                elapsed = time.perf_counter() - started
                if index >= warmup:
                    times[label].append(elapsed)
        for _, label in methods:
            arr = np.array(times[label])
            results.append(
                BenchResult(
                    method=label,
                    vocab_size=vocab_size,
                    steps=steps,
                    mean_seconds=float(arr.mean()),
                    stddev_seconds=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                )
            )
    return results
