"""Trace persistence, synthetic distribution generators, and the replay engine.

A trace is an ordered sequence of per-step token distributions standing in
for a live model.  Two encodings are supported (see FORMATS.md for the
byte-level contract):

* dense-logits: binary, fixed-width little-endian header followed by
  contiguous IEEE-754 logit rows.  Logits rather than probabilities are
  stored so one file serves every temperature sweep.
* sparse-topM: line-delimited JSON, one header record then one record per
  step holding the top-M (token id, log-probability) entries plus the count
  and total log-mass of the unstored tail.
"""

from __future__ import annotations

import json
import math
import os
import struct
import time
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from .dist import LogitRow, ProbDist, renyi_entropy, softmax_with_temperature
from .errors import CorruptTrace, InvalidInput, UnsupportedFormat
from .metrics import StepStats
from .rng import SplitMix64
from .samplers import (
    Greedy,
    Mirostat,
    MirostatState,
    SamplerConfig,
    TruncationResult,
    _mirostat_sample,
    fallback_to_argmax,
    sample_token,
    truncate,
)

MAGIC = b"PLTR"
VERSION = 1
DENSE = "dense-logits"
SPARSE = "sparse-topM"
_PRECISION_DTYPES = {"single": np.dtype("<f4"), "double": np.dtype("<f8")}
_HEADER_STRUCT = struct.Struct("<4sIIQBB")
# Logit used for zero-probability tokens when a sparse step is replayed as a
# logit row: exp(-1e4) is exactly 0.0 in double precision.
ZERO_MASS_LOGIT = -1.0e4


@dataclass(frozen=True)
class TraceHeader:
    vocab_size: int
    step_count: int
    encoding: str = DENSE
    score_precision: str = "single"
    magic: bytes = MAGIC
    version: int = VERSION

    def __post_init__(self):
        if self.magic != MAGIC or self.version != VERSION:
            raise UnsupportedFormat(f"unsupported magic/version {self.magic!r}/{self.version}")
        if self.vocab_size < 1 or self.step_count < 0:
            raise InvalidInput("vocab_size must be >= 1 and step_count >= 0")
        if self.encoding not in (DENSE, SPARSE):
            raise InvalidInput(f"unknown encoding {self.encoding!r}")
        if self.score_precision not in _PRECISION_DTYPES:
            raise InvalidInput(f"unknown precision {self.score_precision!r}")


@dataclass(frozen=True)
class SparseStep:
    """Top entries of one step: (token id, log-probability) descending by
    probability, plus the size and total log-mass of the unstored tail.

    tail_log_mass is -inf when the tail carries no probability."""

    entries: tuple[tuple[int, float], ...]
    tail_count: int
    tail_log_mass: float


Step = Union[np.ndarray, SparseStep]


@dataclass(frozen=True)
class Trace:
    header: TraceHeader
    steps: tuple[Step, ...]

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)


def write_trace(steps: Iterable[Step], header: TraceHeader, destination) -> None:
    """Serialize steps under the given header; see FORMATS.md.

    Dense rows round-trip bit-exactly at the header's precision.
    """
    if header.encoding == DENSE:
        _write_dense(steps, header, destination)
    else:
        _write_sparse(steps, header, destination)


def _write_dense(steps, header, destination):
    dtype = _PRECISION_DTYPES[header.score_precision]
    written = 0
    with open(destination, "wb") as fh:
        fh.write(
            _HEADER_STRUCT.pack(
                header.magic,
                header.version,
                header.vocab_size,
                header.step_count,
                0,
                0 if header.score_precision == "single" else 1,
            )
        )
        for step in steps:
            row = np.asarray(step, dtype=dtype)
            if row.shape != (header.vocab_size,):
                raise InvalidInput(f"step {written} has shape {row.shape}, expected ({header.vocab_size},)")
            fh.write(row.tobytes())
            written += 1
    if written != header.step_count:
        raise InvalidInput(f"header declares {header.step_count} steps but {written} were written")


def _write_sparse(steps, header, destination):
    written = 0
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            json.dumps(
                {
                    "magic": header.magic.decode("ascii"),
                    "version": header.version,
                    "vocab_size": header.vocab_size,
                    "step_count": header.step_count,
                    "encoding": header.encoding,
                    "score_precision": header.score_precision,
                }
            )
            + "\n"
        )
        for step in steps:
            if not isinstance(step, SparseStep):
                raise InvalidInput("sparse traces require SparseStep records")
            record = {
                "entries": [[int(t), float(lp)] for t, lp in step.entries],
                "tail_count": step.tail_count,
                "tail_log_mass": None if math.isinf(step.tail_log_mass) else step.tail_log_mass,
            }
            fh.write(json.dumps(record) + "\n")
            written += 1
    if written != header.step_count:
        raise InvalidInput(f"header declares {header.step_count} steps but {written} were written")


def read_trace(source) -> tuple[TraceHeader, Iterator[Step]]:
    """Open a trace and return its header plus a lazy step iterator.

    Each call owns an independent file handle, so separate iterators may be
    consumed concurrently.
    """
    with open(source, "rb") as fh:
        lead = fh.read(4)
    if lead == MAGIC:
        return _read_dense(source)
    if lead[:1] == b"{":
        return _read_sparse(source)
    raise UnsupportedFormat(f"unrecognized trace file {source!r}")


def _read_dense(source):
    size = os.stat(source).st_size
    fh = open(source, "rb")
    raw = fh.read(_HEADER_STRUCT.size)
    if len(raw) < _HEADER_STRUCT.size:
        fh.close()
        raise CorruptTrace("dense trace shorter than its header")
    magic, version, vocab, steps, encoding, precision = _HEADER_STRUCT.unpack(raw)
    if magic != MAGIC or version != VERSION:
        fh.close()
        raise UnsupportedFormat(f"unsupported magic/version {magic!r}/{version}")
    if encoding != 0:
        fh.close()
        raise UnsupportedFormat(f"binary traces must be dense (encoding tag {encoding})")
    header = TraceHeader(
        vocab_size=vocab,
        step_count=steps,
        encoding=DENSE,
        score_precision="single" if precision == 0 else "double",
    )
    dtype = _PRECISION_DTYPES[header.score_precision]
    row_bytes = vocab * dtype.itemsize
    if size - _HEADER_STRUCT.size != steps * row_bytes:
        fh.close()
        raise CorruptTrace(
            f"dense trace payload is {size - _HEADER_STRUCT.size} bytes, expected {steps * row_bytes}"
        )

    def rows():
        with fh:
            for _ in range(steps):
                buf = fh.read(row_bytes)
                if len(buf) != row_bytes:
                    raise CorruptTrace("dense trace ended mid-row")
                yield np.frombuffer(buf, dtype=dtype)

    return header, rows()


def _read_sparse(source):
    fh = open(source, "r", encoding="utf-8")
    try:
        head = json.loads(fh.readline())
    except json.JSONDecodeError as exc:
        fh.close()
        raise CorruptTrace(f"unreadable sparse header: {exc}") from exc
    if head.get("magic") != MAGIC.decode("ascii") or head.get("version") != VERSION:
        fh.close()
        raise UnsupportedFormat(f"unsupported magic/version in sparse header: {head!r}")
    try:
        header = TraceHeader(
            vocab_size=int(head["vocab_size"]),
            step_count=int(head["step_count"]),
            encoding=head.get("encoding", SPARSE),
            score_precision=head.get("score_precision", "double"),
        )
    except (KeyError, TypeError) as exc:
        fh.close()
        raise CorruptTrace(f"sparse header missing fields: {exc}") from exc

    def records():
        with fh:
            seen = 0
            for line in fh:
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    entries = tuple((int(t), float(lp)) for t, lp in rec["entries"])
                    tail_mass = rec["tail_log_mass"]
                    step = SparseStep(
                        entries=entries,
                        tail_count=int(rec["tail_count"]),
                        tail_log_mass=float("-inf") if tail_mass is None else float(tail_mass),
                    )
                except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                    raise CorruptTrace(f"bad sparse record at step {seen}: {exc}") from exc
                seen += 1
                yield step
            if seen != header.step_count:
                raise CorruptTrace(f"sparse trace has {seen} steps, header declares {header.step_count}")

    return header, records()


def expand_sparse(step: SparseStep, vocab_size: int) -> ProbDist:
    """Reconstruct a full distribution from a sparse step.

    Stored entries keep their probabilities; the tail tokens split the tail
    mass uniformly.  The result must land within 1e-6 of a normalized
    distribution and is then renormalized exactly.
    """
    ids = np.array([t for t, _ in step.entries], dtype=np.int64)
    if len(step.entries) + step.tail_count != vocab_size:
        raise CorruptTrace(
            f"{len(step.entries)} entries + tail of {step.tail_count} != vocab {vocab_size}"
        )
    if ids.size and (np.unique(ids).size != ids.size or ids.min() < 0 or ids.max() >= vocab_size):
        raise CorruptTrace("sparse entry ids must be unique and < vocab_size")
    probs = np.zeros(vocab_size)
    if ids.size:
        probs[ids] = np.exp([lp for _, lp in step.entries])
    tail_mass = math.exp(step.tail_log_mass) if not math.isinf(step.tail_log_mass) else 0.0
    if step.tail_count:
        tail = np.ones(vocab_size, dtype=bool)
        tail[ids] = False
        probs[tail] = tail_mass / step.tail_count
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise CorruptTrace(f"sparse step mass {total!r} is not within 1e-6 of 1")
    return ProbDist(probs / total)


def sparsify(d: ProbDist, top_m: int) -> SparseStep:
    """Encode the top-m probabilities of a distribution as a sparse step."""
    if top_m < 1:
        raise InvalidInput("top_m must be >= 1")
    order = np.argsort(-d.probs, kind="stable")
    keep = [int(i) for i in order[: min(top_m, d.vocab_size)] if d.probs[i] > 0.0]
    tail = np.ones(d.vocab_size, dtype=bool)
    tail[keep] = False
    tail_mass = float(d.probs[tail].sum())
    return SparseStep(
        entries=tuple((i, math.log(float(d.probs[i]))) for i in keep),
        tail_count=int(d.vocab_size - len(keep)),
        tail_log_mass=math.log(tail_mass) if tail_mass > 0.0 else float("-inf"),
    )


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic synthetic trace description.

    Families: zipf(s) assigns rank-r mass proportional to r**-s and permutes
    the rank-to-token mapping each step; uniform and onehot are the two
    extremes; dirichlet(alpha) draws an i.i.d. distribution per step.
    """

    family: str
    vocab_size: int
    step_count: int
    seed: int
    s: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.family not in ("zipf", "uniform", "onehot", "dirichlet"):
            raise InvalidInput(f"unknown synthetic family {self.family!r}")
        if self.vocab_size < 1 or self.step_count < 0:
            raise InvalidInput("vocab_size must be >= 1 and step_count >= 0")
        if self.family == "zipf" and not (self.s is not None and self.s > 0):
            raise InvalidInput("zipf needs exponent s > 0")
        if self.family == "dirichlet" and not (self.alpha is not None and self.alpha > 0):
            raise InvalidInput("dirichlet needs alpha > 0")


def generate_synthetic(spec: SynthSpec) -> Trace:
    """Produce a dense double-precision trace; identical bytes for equal specs."""
    rng = np.random.default_rng(spec.seed)
    c = spec.vocab_size
    steps = []
    if spec.family == "zipf":
        base = np.arange(1, c + 1, dtype=np.float64) ** (-float(spec.s))
        base_logits = np.log(base / base.sum())
        for _ in range(spec.step_count):
            row = np.empty(c)
            row[rng.permutation(c)] = base_logits
            steps.append(row)
    elif spec.family == "uniform":
        steps = [np.zeros(c) for _ in range(spec.step_count)]
    elif spec.family == "onehot":
        for _ in range(spec.step_count):
            row = np.full(c, ZERO_MASS_LOGIT)
            row[int(rng.integers(c))] = 0.0
            steps.append(row)
    else:  # dirichlet
        alpha = np.full(c, float(spec.alpha))
        for _ in range(spec.step_count):
            probs = rng.dirichlet(alpha)
            steps.append(np.log(np.maximum(probs, 1e-300)))
    header = TraceHeader(
        vocab_size=c, step_count=spec.step_count, encoding=DENSE, score_precision="double"
    )
    return Trace(header=header, steps=tuple(steps))


def step_to_logits(step: Step, vocab_size: int) -> LogitRow:
    """View any trace step as a finite logit row (double precision).

    Sparse steps use their stored log-probabilities directly; zero-mass tail
    tokens get a floor logit that tempers to exactly zero probability.
    """
    if isinstance(step, SparseStep):
        expanded = expand_sparse(step, vocab_size)
        with np.errstate(divide="ignore"):
            logits = np.log(expanded.probs)
        logits[~np.isfinite(logits)] = ZERO_MASS_LOGIT
        return LogitRow(logits)
    return LogitRow(np.asarray(step, dtype=np.float64))


def replay(
    steps: Iterable[Step],
    vocab_size: int,
    cfg: SamplerConfig,
    rng: SplitMix64,
    measure_latency: bool = False,
) -> Iterator[tuple[int, TruncationResult, StepStats]]:
    """Run a sampler over a trace, yielding per-step tokens and statistics.

    Latency, when measured, covers threshold + truncation + draw only; the
    softmax shared by every method is excluded.
    """
    state: Optional[MirostatState] = None
    for index, step in enumerate(steps):
        row = step_to_logits(step, vocab_size)
        d = softmax_with_temperature(row, cfg.temperature)
        started = time.perf_counter() if measure_latency else 0.0
        method = cfg.method
        if isinstance(method, Mirostat):
            if state is None:
                state = MirostatState.fresh(method)
            token, result, state = _mirostat_sample(d, state, method, rng)
        elif isinstance(method, Greedy):
            result = fallback_to_argmax(d)
            token = int(result.admitted[0])
        else:
            result = truncate(method, d)
            token = sample_token(result, rng)
        elapsed = (time.perf_counter() - started) if measure_latency else None
        stats = StepStats(
            step=index,
            shannon_entropy=result.source_entropy,
            collision_entropy=renyi_entropy(d, 2.0),
            threshold=result.threshold,
            admitted_count=result.admitted_count,
            latency=elapsed,
        )
        yield token, result, stats
