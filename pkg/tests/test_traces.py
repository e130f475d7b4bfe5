"""Trace formats, synthetic generators, and the replay engine."""

import math

import numpy as np
import pytest

from pless import (
    CorruptTrace,
    InvalidInput,
    MinP,
    PLess,
    ProbDist,
    SamplerConfig,
    SparseStep,
    SplitMix64,
    SynthSpec,
    TopP,
    TraceHeader,
    UnsupportedFormat,
    collision_likelihood,
    expand_sparse,
    generate_synthetic,
    read_trace,
    replay,
    sparsify,
    step_to_logits,
    write_trace,
)
from pless import reference


class TestDenseRoundTrip:
    def test_empty_trace(self, tmp_path):
        path = tmp_path / "empty.pltr"
        header = TraceHeader(vocab_size=5, step_count=0)
        write_trace([], header, path)
        back, steps = read_trace(path)
        assert back == header
        assert list(steps) == []

    @pytest.mark.parametrize("precision", ["single", "double"])
    def test_bit_exact_round_trip(self, tmp_path, rng, precision):
        dtype = np.float32 if precision == "single" else np.float64
        rows = [rng.normal(size=5).astype(dtype) for _ in range(3)]
        path = tmp_path / "trace.pltr"
        header = TraceHeader(vocab_size=5, step_count=3, score_precision=precision)
        write_trace(rows, header, path)
        back, steps = read_trace(path)
        assert back.score_precision == precision
        for original, loaded in zip(rows, steps):
            assert loaded.dtype == dtype
            assert np.array_equal(original, loaded)

    def test_step_count_mismatch_rejected(self, tmp_path):
        header = TraceHeader(vocab_size=2, step_count=3)
        with pytest.raises(InvalidInput):
            write_trace([np.zeros(2)], header, tmp_path / "bad.pltr")

    def test_wrong_shape_rejected(self, tmp_path):
        header = TraceHeader(vocab_size=2, step_count=1)
        with pytest.raises(InvalidInput):
            write_trace([np.zeros(3)], header, tmp_path / "bad.pltr")

    def test_truncated_file_detected(self, tmp_path, rng):
        path = tmp_path / "trace.pltr"
        header = TraceHeader(vocab_size=8, step_count=4)
        write_trace([rng.normal(size=8).astype(np.float32) for _ in range(4)], header, path)
        data = path.read_bytes()
        path.write_bytes(data[:-7])
        with pytest.raises(CorruptTrace):
            read_trace(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.pltr"
        path.write_bytes(b"XXXX" + bytes(32))
        with pytest.raises(UnsupportedFormat):
            read_trace(path)

    def test_concurrent_iterators_are_independent(self, tmp_path, rng):
        path = tmp_path / "trace.pltr"
        rows = [rng.normal(size=4).astype(np.float32) for _ in range(6)]
        write_trace(rows, TraceHeader(vocab_size=4, step_count=6), path)
        _, first = read_trace(path)
        _, second = read_trace(path)
        next(first)
        next(first)
        assert np.array_equal(next(second), rows[0])


class TestSparse:
    def test_no_tail_equals_dense_expansion(self):
        d = ProbDist([0.5, 0.3, 0.2])
        step = sparsify(d, top_m=3)
        assert step.tail_count == 0
        assert math.isinf(step.tail_log_mass)
        expanded = expand_sparse(step, 3)
        np.testing.assert_allclose(expanded.probs, d.probs, rtol=1e-12)

    def test_uniform_tail_split(self):
        step = SparseStep(entries=((0, math.log(0.9)),), tail_count=9, tail_log_mass=math.log(0.1))
        expanded = expand_sparse(step, 10)
        assert expanded.probs[0] == pytest.approx(0.9, rel=1e-9)
        np.testing.assert_allclose(expanded.probs[1:], [0.1 / 9] * 9, rtol=1e-9)

    def test_collision_lower_bound_survives_expansion(self, rng):
        for _ in range(20):
            d = ProbDist(rng.dirichlet(np.ones(50)))
            expanded = expand_sparse(sparsify(d, top_m=8), 50)
            assert collision_likelihood(expanded) >= 1.0 / 50 - 1e-12

    def test_inconsistent_counts_rejected(self):
        step = SparseStep(entries=((0, math.log(0.9)),), tail_count=3, tail_log_mass=math.log(0.1))
        with pytest.raises(CorruptTrace):
            expand_sparse(step, 10)

    def test_duplicate_ids_rejected(self):
        step = SparseStep(
            entries=((0, math.log(0.5)), (0, math.log(0.5))), tail_count=0, tail_log_mass=float("-inf")
        )
        with pytest.raises(CorruptTrace):
            expand_sparse(step, 2)

    def test_round_trip_preserves_probabilities(self, tmp_path, rng):
        vocab = 64
        dists = [ProbDist(rng.dirichlet(np.full(vocab, 0.3))) for _ in range(5)]
        steps = [sparsify(d, top_m=16) for d in dists]
        path = tmp_path / "trace.jsonl"
        header = TraceHeader(vocab_size=vocab, step_count=5, encoding="sparse-topM", score_precision="double")
        write_trace(steps, header, path)
        back, loaded = read_trace(path)
        assert back.encoding == "sparse-topM"
        for original, restored in zip(steps, loaded):
            assert restored.tail_count == original.tail_count
            for (tok_a, lp_a), (tok_b, lp_b) in zip(original.entries, restored.entries):
                assert tok_a == tok_b
                assert lp_b == pytest.approx(lp_a, rel=1e-7)
            # explicit probabilities survive within encoding precision
            d_back = expand_sparse(restored, vocab)
            for tok, lp in original.entries:
                assert float(d_back.probs[tok]) == pytest.approx(math.exp(lp), rel=1e-7)

    def test_sparse_header_errors(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        path.write_text('{"magic": "NOPE", "version": 1}\n')
        with pytest.raises(UnsupportedFormat):
            read_trace(path)
        path.write_text('{"magic": "PLTR", "version": 1, "vocab_size": 4, "step_count": 2, "encoding": "sparse-topM"}\n')
        _, it = read_trace(path)
        with pytest.raises(CorruptTrace):
            list(it)  # fewer records than the header declares

    def test_collision_error_bounded_by_tail_mass_squared(self, rng):
        # entries cover everything down to the largest tail probability, so
        # the uniform-tail substitution can move sum(p^2) by at most
        # (tail mass)^2
        for _ in range(25):
            d = ProbDist(rng.dirichlet(np.full(40, 0.5)))
            top_m = 30
            step = sparsify(d, top_m=top_m)
            expanded = expand_sparse(step, 40)
            tail_mass = math.exp(step.tail_log_mass)
            true_value = collision_likelihood(d)
            approx_value = collision_likelihood(expanded)
            assert abs(approx_value - true_value) <= tail_mass**2 + 1e-15


class TestSynthetic:
    def test_onehot_collision_is_one(self):
        trace = generate_synthetic(SynthSpec(family="onehot", vocab_size=20, step_count=10, seed=3))
        for step in trace:
            d = ProbDist(np.exp(step - step.max()) / np.exp(step - step.max()).sum())
            assert collision_likelihood(d) == 1.0

    def test_uniform_threshold_and_full_admission(self):
        trace = generate_synthetic(SynthSpec(family="uniform", vocab_size=50, step_count=4, seed=1))
        cfg = SamplerConfig(PLess())
        for token, result, stats in replay(trace.steps, 50, cfg, SplitMix64(9)):
            assert stats.threshold == pytest.approx(1 / 50, abs=1e-15)
            assert stats.admitted_count == 50

    def test_determinism_bytes(self, tmp_path):
        spec = SynthSpec(family="zipf", vocab_size=100, step_count=20, seed=77, s=1.1)
        a, b = tmp_path / "a.pltr", tmp_path / "b.pltr"
        for path in (a, b):
            trace = generate_synthetic(spec)
            write_trace(trace.steps, trace.header, path)
        assert a.read_bytes() == b.read_bytes()
        different = generate_synthetic(SynthSpec(family="zipf", vocab_size=100, step_count=20, seed=78, s=1.1))
        c = tmp_path / "c.pltr"
        write_trace(different.steps, different.header, c)
        assert a.read_bytes() != c.read_bytes()

    def test_full_nucleus_saturates_admitted_count(self):
        # mean admitted count equals the vocabulary size once top-p admits
        # everything
        from pless import aggregate_step_stats

        trace = generate_synthetic(SynthSpec(family="uniform", vocab_size=40, step_count=6, seed=2))
        cfg = SamplerConfig(TopP(p=1.0), temperature=2.0)
        stats = [s for _, _, s in replay(trace.steps, 40, cfg, SplitMix64(4))]
        assert aggregate_step_stats(stats).mean_admitted == 40.0

    def test_dirichlet_rows_are_valid_logits(self):
        trace = generate_synthetic(SynthSpec(family="dirichlet", vocab_size=30, step_count=5, seed=5, alpha=0.2))
        for step in trace:
            row = step_to_logits(step, 30)
            assert np.isfinite(row.scores).all()

    def test_family_validation(self):
        with pytest.raises(InvalidInput):
            SynthSpec(family="cauchy", vocab_size=10, step_count=1, seed=0)
        with pytest.raises(InvalidInput):
            SynthSpec(family="zipf", vocab_size=10, step_count=1, seed=0)  # missing s
        with pytest.raises(InvalidInput):
            SynthSpec(family="dirichlet", vocab_size=10, step_count=1, seed=0, alpha=-1.0)


def brute_force_admitted_counts(trace, vocab, methods, temps):
    """Reference pipeline: expand each step and truncate with the sorted
    implementations, bypassing the replay machinery entirely."""
    table = {}
    for label, naive_fn in methods.items():
        for tau in temps:
            counts = []
            for step in trace.steps:
                scaled = np.asarray(step, dtype=np.float64) / tau
                weights = np.exp(scaled - scaled.max())
                d = ProbDist(weights / weights.sum())
                counts.append(naive_fn(d).admitted.size)
            table[label, tau] = counts
    return table


class TestReplayAgainstReferencePipeline:
    def test_zipf_admitted_counts_match_reference(self):
        spec = SynthSpec(family="zipf", vocab_size=1000, step_count=25, seed=11, s=1.2)
        trace = generate_synthetic(spec)
        temps = (0.7, 1.0, 1.5, 2.0)
        methods = {
            "pless": reference.pless,
            "min-p": lambda d: reference.min_p(d, 0.1),
            "top-p": lambda d: reference.top_p(d, 0.9),
        }
        expected = brute_force_admitted_counts(trace, 1000, methods, temps)

        configs = {"pless": PLess(), "min-p": MinP(p_base=0.1), "top-p": TopP(p=0.9)}
        for label, method in configs.items():
            for tau in temps:
                cfg = SamplerConfig(method, temperature=tau)
                counts = [
                    stats.admitted_count
                    for _, _, stats in replay(trace.steps, 1000, cfg, SplitMix64(1))
                ]
                assert counts == expected[label, tau], (label, tau)

    def test_admitted_counts_tighten_with_selectivity_at_high_temperature(self):
        spec = SynthSpec(family="zipf", vocab_size=1000, step_count=25, seed=11, s=1.2)
        trace = generate_synthetic(spec)
        cfg = lambda m: SamplerConfig(m, temperature=2.0)
        mean = lambda m: np.mean(
            [s.admitted_count for _, _, s in replay(trace.steps, 1000, cfg(m), SplitMix64(1))]
        )
        assert mean(PLess()) <= mean(MinP(p_base=0.1)) <= mean(TopP(p=0.9))
