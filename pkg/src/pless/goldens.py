"""Golden parity fixtures for the logits-processor bindings.

Writes a JSON file of logit rows with the core's truncation and sampling
outputs, which language ports replay and must match exactly.  Exact integer
parity across independent float implementations is only fair when no
decision sits within rounding distance of a boundary, so rows are redrawn
until every method clears a safety margin at its threshold, rank cut,
cumulative cut, and inverse-CDF boundary.

Regeneration is deterministic: same arguments, same bytes.

    python -m pless.goldens --out bindings/fixtures/parity.json
"""

from __future__ import annotations

import argparse
import json
import math
from typing import Optional

import numpy as np

from .dist import LogitRow, ProbDist, shannon_entropy, softmax_with_temperature
from .rng import SplitMix64
from .samplers import (
    Epsilon,
    Eta,
    Greedy,
    KOrder,
    Method,
    MinP,
    Mirostat,
    MirostatState,
    PLess,
    PLessNorm,
    SamplerConfig,
    TopK,
    TopP,
    korder_threshold,
    pless_norm_threshold,
    pless_threshold,
    run_sampler,
)

FORMAT_VERSION = 1
MARGIN = 1e-9
TEMPERATURES = (0.7, 1.0, 1.5, 2.0)

FIXTURE_METHODS: list[tuple[str, Method, dict]] = [
    ("pless", PLess(), {}),
    ("pless-norm", PLessNorm(), {}),
    ("korder-0.5", KOrder(k=0.5), {"k": 0.5}),
    ("korder-4", KOrder(k=4.0), {"k": 4.0}),
    ("top-p", TopP(p=0.9), {"p": 0.9}),
    ("top-k", TopK(k=8), {"k": 8}),
    ("min-p", MinP(p_base=0.1), {"p_base": 0.1}),
    ("epsilon", Epsilon(eps=0.02), {"eps": 0.02}),
    ("epsilon-high", Epsilon(eps=0.5), {"eps": 0.5}),
    ("eta", Eta(eps=0.02), {"eps": 0.02}),
    ("mirostat", Mirostat(), {"target_surprisal": 4.0, "learning_rate": 0.1}),
    ("greedy", Greedy(), {}),
]


def _threshold_margin(p: np.ndarray, threshold: float) -> float:
    return float(np.abs(p - threshold).min())


def _rank_margins(p: np.ndarray) -> np.ndarray:
    return -np.sort(-p)


def _method_margin(d: ProbDist, method: Method) -> float:
    """Distance from the nearest decision boundary; small means fragile."""
    p = d.probs
    ranked = _rank_margins(p)
    mode_gap = float(ranked[0] - ranked[1]) if p.size > 1 else math.inf
    if isinstance(method, PLess):
        return _threshold_margin(p, pless_threshold(d))
    if isinstance(method, PLessNorm):
        return _threshold_margin(p, pless_norm_threshold(d))
    if isinstance(method, KOrder):
        return _threshold_margin(p, korder_threshold(d, method.k))
    if isinstance(method, TopP):
        cum = np.cumsum(ranked)
        return float(np.abs(cum - method.p).min())
    if isinstance(method, TopK):
        if method.k >= p.size:
            return math.inf
        return float(ranked[method.k - 1] - ranked[method.k])
    if isinstance(method, MinP):
        return _threshold_margin(p, method.p_base * float(ranked[0]))
    if isinstance(method, Epsilon):
        # also guards the argmax fallback when nothing clears the cutoff
        return min(_threshold_margin(p, method.eps), mode_gap)
    if isinstance(method, Eta):
        threshold = min(method.eps, math.sqrt(method.eps) * math.exp(-shannon_entropy(d)))
        return min(_threshold_margin(p, threshold), mode_gap)
    if isinstance(method, Mirostat):
        mu = MirostatState.fresh(method).mu
        with np.errstate(divide="ignore"):
            surprisal = -np.log(p[p > 0.0])
        return min(float(np.abs(surprisal - mu).min()), mode_gap)
    if isinstance(method, Greedy):
        return mode_gap
    raise AssertionError(f"unhandled method {method!r}")


def _mirostat_margin(d: ProbDist, mu: float) -> float:
    p = d.probs
    ranked = _rank_margins(p)
    mode_gap = float(ranked[0] - ranked[1]) if p.size > 1 else math.inf
    with np.errstate(divide="ignore"):
        surprisal = -np.log(p[p > 0.0])
    return min(float(np.abs(surprisal - mu).min()), mode_gap)


def _draw_margin(result, seed: int) -> float:
    if result.admitted.size <= 1:
        return math.inf
    u = SplitMix64(seed).next_float()
    cum = np.cumsum(result.renorm_probs)
    return float(np.abs(cum - u).min())


def _row_fixture(logits: np.ndarray, temperature: float, seed: int) -> Optional[dict]:
    """Expected outputs for one row, or None when any margin is too tight."""
    row = LogitRow(logits)
    d = softmax_with_temperature(row, temperature)
    expected = {}
    for name, method, _ in FIXTURE_METHODS:
        if _method_margin(d, method) < MARGIN:
            return None
        cfg = SamplerConfig(method=method, temperature=temperature)
        token, result, state = run_sampler(cfg, row, None, SplitMix64(seed))
        if _draw_margin(result, seed) < MARGIN:
            return None
        entry = {"admitted": result.admitted.tolist(), "token": token}
        if isinstance(method, Mirostat):
            entry["mu_after"] = state.mu
        expected[name] = entry
    return {
        "temperature": temperature,
        # decimal string: 64-bit seeds do not survive a float JSON parse
        "seed": str(seed),
        "logits": [float(x) for x in logits],
        "expected": expected,
    }


def _mirostat_trace_fixture(gen: np.random.Generator, vocab_size: int, root: SplitMix64) -> dict:
    """Three chained calls on one sequence: tokens and budget trajectory."""
    method = Mirostat()
    cfg = SamplerConfig(method=method, temperature=1.0)
    while True:
        rows = gen.normal(0.0, 2.0, size=(3, vocab_size))
        seeds = [root.split(10_000 + i).seed for i in range(3)]
        state = None
        tokens, mus = [], []
        ok = True
        for logits, seed in zip(rows, seeds):
            row = LogitRow(logits)
            d = softmax_with_temperature(row, cfg.temperature)
            mu = state.mu if state is not None else MirostatState.fresh(method).mu
            if _mirostat_margin(d, mu) < MARGIN:
                ok = False
                break
            token, result, state = run_sampler(cfg, row, state, SplitMix64(seed))
            if _draw_margin(result, seed) < MARGIN:
                ok = False
                break
            tokens.append(token)
            mus.append(state.mu)
        if ok:
            return {
                "target_surprisal": method.target_surprisal,
                "learning_rate": method.learning_rate,
                "temperature": cfg.temperature,
                "logits": [[float(x) for x in row] for row in rows],
                "seeds": [str(s) for s in seeds],
                "expected": {"tokens": tokens, "mus": mus},
            }


def generate(rows: int, vocab_size: int, seed: int) -> dict:
    gen = np.random.default_rng(seed)
    root = SplitMix64(seed)
    fixtures = []
    attempts = 0
    while len(fixtures) < rows:
        attempts += 1
        logits = gen.normal(0.0, 2.0, size=vocab_size)
        temperature = TEMPERATURES[len(fixtures) % len(TEMPERATURES)]
        row_seed = root.split(len(fixtures)).seed
        fixture = _row_fixture(logits, temperature, row_seed)
        if fixture is not None:
            fixture["id"] = len(fixtures)
            fixtures.append(fixture)
    return {
        "format_version": FORMAT_VERSION,
        "vocab_size": vocab_size,
        "seed": seed,
        "attempts": attempts,
        "methods": {name: params for name, _, params in FIXTURE_METHODS},
        "rows": fixtures,
        "mirostat_trace": _mirostat_trace_fixture(gen, vocab_size, root),
    }


def render(payload: dict) -> str:
    # repr floats round-trip exactly through JSON in every IEEE-754 runtime
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--rows", type=int, default=1000)
    parser.add_argument("--vocab", type=int, default=48)
    parser.add_argument("--seed", type=int, default=24601)
    args = parser.parse_args(argv)
    payload = generate(args.rows, args.vocab, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(payload))
    print(f"wrote {args.rows} rows ({payload['attempts']} attempts) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
