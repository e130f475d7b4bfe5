"""Command-line front end.

Subcommands: threshold (per-step truncation reports), sample (token
sequences), bench (per-token latency), auc (accuracy-temperature area),
diversity (n-gram repetition).  Every command is deterministic given its
arguments and seed, except bench timings.  Seeds are mandatory so reported
numbers are replayable.

Exit codes: 0 success, 2 usage, 3 I/O, 4 file format.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import bench as bench_mod
from .errors import (
    CorruptTrace,
    InsufficientData,
    InvalidInput,
    UnsupportedFormat,
    UsageError,
)
from .metrics import AccuracyCurve, auc, ngram_diversity
from .rng import SplitMix64
from .samplers import (
    Epsilon,
    Eta,
    Greedy,
    KOrder,
    Method,
    MinP,
    Mirostat,
    PLess,
    PLessNorm,
    SamplerConfig,
    TopK,
    TopP,
)
from .traces import SynthSpec, generate_synthetic, read_trace, replay

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4

# 12 significant digits: stable across independent float paths that agree to
# ~1 ulp, and plenty for any downstream plotting.
FLOAT_FORMAT = "%.12g"


@dataclass(frozen=True)
class RunManifest:
    """Everything a replay command needs to be reproducible."""

    trace: Optional[str]
    synth: Optional[SynthSpec]
    methods: tuple[tuple[str, Method], ...]
    temperatures: tuple[float, ...]
    seed: int
    out: Optional[str]
    out_format: str = "csv"

    def __post_init__(self):
        if (self.trace is None) == (self.synth is None):
            raise UsageError("exactly one of --trace and --synth is required")
        if not self.methods:
            raise UsageError("at least one --method is required")
        if not self.temperatures or any(t <= 0 for t in self.temperatures):
            raise UsageError("temperatures must be positive")
        if self.out_format not in ("csv", "text"):
            raise UsageError(f"unknown output format {self.out_format!r}")


def parse_method(text: str) -> tuple[str, Method]:
    """Parse NAME[:PARAM=VALUE,...] into a labeled method config."""
    name, _, param_text = text.partition(":")
    params = {}
    if param_text:
        for item in param_text.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key:
                raise UsageError(f"bad method parameter {item!r} in {text!r}")
            params[key] = value
    try:
        method = _build_method(name, params)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad method spec {text!r}: {exc}") from exc
    return text, method


def _build_method(name: str, params: dict) -> Method:
    def fval(key, default=None):
        if key in params:
            return float(params.pop(key))
        if default is None:
            raise UsageError(f"method {name!r} requires parameter {key!r}")
        return default

    def ival(key):
        if key not in params:
            raise UsageError(f"method {name!r} requires parameter {key!r}")
        return int(params.pop(key))

    if name == "pless":
        method: Method = PLess()
    elif name == "pless-norm":
        method = PLessNorm()
    elif name == "korder":
        method = KOrder(k=fval("k"))
    elif name == "top-p":
        method = TopP(p=fval("p", 0.9))
    elif name == "top-k":
        method = TopK(k=ival("k"))
    elif name == "min-p":
        method = MinP(p_base=fval("p", 0.1))
    elif name == "epsilon":
        method = Epsilon(eps=fval("eps", 0.0002))
    elif name == "eta":
        method = Eta(eps=fval("eps", 0.0002))
    elif name == "mirostat":
        method = Mirostat(target_surprisal=fval("target", 4.0), learning_rate=fval("lr", 0.1))
    elif name == "greedy":
        method = Greedy()
    else:
        raise UsageError(f"unknown method {name!r}")
    if params:
        raise UsageError(f"unused parameters {sorted(params)} for method {name!r}")
    return method


def parse_synth(text: str) -> dict:
    """Parse FAMILY[:KEY=VALUE,...] into SynthSpec fields (seed comes later)."""
    family, _, param_text = text.partition(":")
    fields: dict = {"family": family}
    if param_text:
        for item in param_text.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"bad synth parameter {item!r} in {text!r}")
            if key in ("vocab", "vocab_size"):
                fields["vocab_size"] = int(value)
            elif key in ("steps", "step_count"):
                fields["step_count"] = int(value)
            elif key == "s":
                fields["s"] = float(value)
            elif key == "alpha":
                fields["alpha"] = float(value)
            else:
                raise UsageError(f"unknown synth parameter {key!r}")
    fields.setdefault("vocab_size", 1000)
    fields.setdefault("step_count", 100)
    return fields


def parse_temps(text: str) -> tuple[float, ...]:
    try:
        temps = tuple(float(t) for t in text.split(",") if t)
    except ValueError as exc:
        raise UsageError(f"bad temperature list {text!r}") from exc
    if not temps:
        raise UsageError("empty temperature list")
    return temps


def _manifest_from_args(args) -> RunManifest:
    synth = None
    if args.synth:
        fields = parse_synth(args.synth)
        try:
            synth = SynthSpec(seed=args.seed, **fields)
        except InvalidInput as exc:
            raise UsageError(str(exc)) from exc
    return RunManifest(
        trace=args.trace,
        synth=synth,
        methods=tuple(parse_method(m) for m in args.method),
        temperatures=parse_temps(args.temps),
        seed=args.seed,
        out=args.out,
        out_format=args.format,
    )


def _load_steps(manifest: RunManifest):
    """Materialize the trace once; every (method, temperature) cell replays it."""
    if manifest.synth is not None:
        trace = generate_synthetic(manifest.synth)
        return trace.header.vocab_size, list(trace.steps)
    header, steps = read_trace(manifest.trace)
    return header.vocab_size, list(steps)


def _open_out(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_rows(out_path: Optional[str], out_format: str, header: list[str], rows: list[list]) -> None:
    rendered = [
        [FLOAT_FORMAT % v if isinstance(v, float) else str(v) for v in row] for row in rows
    ]
    out, owned = _open_out(out_path)
    try:
        if out_format == "csv":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rendered)
        else:
            widths = [
                max(len(h), *(len(r[i]) for r in rendered)) if rendered else len(h)
                for i, h in enumerate(header)
            ]
            out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
            for row in rendered:
                out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")
    finally:
        if owned:
            out.close()


THRESHOLD_COLUMNS = [
    "step",
    "method",
    "temperature",
    "threshold",
    "admitted_count",
    "shannon_entropy",
    "collision_entropy",
]


def cmd_threshold(args) -> int:
    manifest = _manifest_from_args(args)
    vocab_size, steps = _load_steps(manifest)
    root = SplitMix64(manifest.seed)
    rows = []
    for m_index, (label, method) in enumerate(manifest.methods):
        for t_index, temp in enumerate(manifest.temperatures):
            cfg = SamplerConfig(method=method, temperature=temp)
            rng = root.split(m_index * len(manifest.temperatures) + t_index)
            for _, _, stats in replay(steps, vocab_size, cfg, rng):
                rows.append(
                    [
                        stats.step,
                        label,
                        float(temp),
                        stats.threshold,
                        stats.admitted_count,
                        stats.shannon_entropy,
                        stats.collision_entropy,
                    ]
                )
    _write_rows(manifest.out, manifest.out_format, THRESHOLD_COLUMNS, rows)
    return EXIT_OK


def _token_file_name(label: str, temp: float) -> str:
    safe = label.replace(":", "_").replace(",", "_").replace("=", "-").replace("/", "-")
    return f"{safe}_tau{FLOAT_FORMAT % temp}.tokens"


def cmd_sample(args) -> int:
    manifest = _manifest_from_args(args)
    if manifest.out is None:
        raise UsageError("sample requires --out DIRECTORY")
    vocab_size, steps = _load_steps(manifest)
    out_dir = Path(manifest.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = SplitMix64(manifest.seed)
    for m_index, (label, method) in enumerate(manifest.methods):
        for t_index, temp in enumerate(manifest.temperatures):
            cfg = SamplerConfig(method=method, temperature=temp)
            rng = root.split(m_index * len(manifest.temperatures) + t_index)
            tokens = [token for token, _, _ in replay(steps, vocab_size, cfg, rng)]
            path = out_dir / _token_file_name(label, temp)
            path.write_text("".join(f"{t}\n" for t in tokens), encoding="utf-8")
    return EXIT_OK


BENCH_COLUMNS = ["method", "vocab_size", "steps", "mean_seconds_per_token", "stddev_seconds"]


def cmd_bench(args) -> int:
    methods = []
    for text in args.method:
        if text.startswith("naive-"):
            bench_mod._reference_step(text)  # validate the name early
            methods.append((text, text))
        else:
            label, method = parse_method(text)
            methods.append((method, label))
    try:
        vocab_sizes = [int(v) for v in args.vocab.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad vocab list {args.vocab!r}") from exc
    if not vocab_sizes or any(v < 1 for v in vocab_sizes):
        raise UsageError("vocab sizes must be positive integers")
    results = bench_mod.run_bench(methods, vocab_sizes, args.steps, args.warmup, args.seed)
    rows = [
        [r.method, r.vocab_size, r.steps, r.mean_seconds, r.stddev_seconds] for r in results
    ]
    _write_rows(args.out, args.format, BENCH_COLUMNS, rows)
    return EXIT_OK


def cmd_auc(args) -> int:
    points = []
    with open(args.input, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["temperature", "accuracy"]:
            raise UsageError("accuracy CSV must start with a 'temperature,accuracy' header")
        for line in reader:
            if not line:
                continue
            try:
                points.append((float(line[0]), float(line[1])))
            except (IndexError, ValueError) as exc:
                raise UsageError(f"bad accuracy row {line!r}") from exc
    try:
        curve = AccuracyCurve(points=tuple(points))
    except (InvalidInput, InsufficientData) as exc:
        raise UsageError(str(exc)) from exc
    value = auc(curve)
    out, owned = _open_out(args.out)
    try:
        out.write((FLOAT_FORMAT % value) + "\n")
    finally:
        if owned:
            out.close()
    return EXIT_OK


DIVERSITY_COLUMNS = ["file", "rep_2", "rep_3", "rep_4", "diversity"]


def cmd_diversity(args) -> int:
    rows = []
    for path in args.tokens:
        tokens = [int(line) for line in Path(path).read_text(encoding="utf-8").split()]
        report = ngram_diversity(tokens)
        if args.percent:
            report = report.as_percent()
        rows.append(
            [path, report.rep_n[2], report.rep_n[3], report.rep_n[4], report.diversity]
        )
    _write_rows(args.out, args.format, DIVERSITY_COLUMNS, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pless", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_replay_flags(p):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--trace", help="path to a recorded trace file")
        src.add_argument("--synth", help="synthetic spec FAMILY[:KEY=VALUE,...]")
        p.add_argument(
            "--method",
            action="append",
            required=True,
            help="sampler NAME[:PARAM=VALUE,...]; repeatable",
        )
        p.add_argument("--temps", default="1.0", help="comma-separated temperatures")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", help="output path (defaults to stdout)")
        p.add_argument("--format", choices=("csv", "text"), default="csv")

    p_threshold = sub.add_parser("threshold", help="per-step truncation report")
    add_replay_flags(p_threshold)
    p_threshold.set_defaults(func=cmd_threshold)

    p_sample = sub.add_parser("sample", help="write sampled token-id sequences")
    add_replay_flags(p_sample)
    p_sample.set_defaults(func=cmd_sample)

    p_bench = sub.add_parser("bench", help="per-token sampling latency")
    p_bench.add_argument("--method", action="append", required=True)
    p_bench.add_argument("--vocab", required=True, help="comma-separated vocabulary sizes")
    p_bench.add_argument("--steps", type=int, default=10000)
    p_bench.add_argument("--warmup", type=int, default=100)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--out", help="output path (defaults to stdout)")
    p_bench.add_argument("--format", choices=("csv", "text"), default="csv")
    p_bench.set_defaults(func=cmd_bench)

    p_auc = sub.add_parser("auc", help="area under an accuracy-temperature curve")
    p_auc.add_argument("input", help="CSV with a temperature,accuracy header")
    p_auc.add_argument("--out", help="output path (defaults to stdout)")
    p_auc.set_defaults(func=cmd_auc)

    p_div = sub.add_parser("diversity", help="n-gram repetition diversity of token files")
    p_div.add_argument("tokens", nargs="+", help="token-id files, one id per line")
    p_div.add_argument("--percent", action="store_true", help="render values as percentages")
    p_div.add_argument("--out", help="output path (defaults to stdout)")
    p_div.add_argument("--format", choices=("csv", "text"), default="csv")
    p_div.set_defaults(func=cmd_diversity)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, InvalidInput, InsufficientData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedFormat, CorruptTrace) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
