"""Truncation-sampling toolkit.

Core idea: admit every token whose probability is at least the
distribution's collision likelihood (the chance that an independent random
draw lands on the "right" token).  That cutoff needs no hyperparameters,
tracks temperature on its own, and never empties the sampling set.  The
toolkit ships that method, its normalized and k-order variants, the six
standard baselines, replayable trace formats, evaluation metrics, and a
benchmarking CLI.
"""

from .dist import (
    LogitRow,
    ProbDist,
    collision_likelihood,
    renyi_entropy,
    second_central_moment_unbiased,
    shannon_entropy,
    softmax_with_temperature,
)
from .errors import (
    CorruptTrace,
    DegenerateVocabulary,
    EmptySet,
    InsufficientData,
    InvalidInput,
    InvalidOrder,
    InvalidTemperature,
    UnsupportedFormat,
    UsageError,
)
from .metrics import (
    AccuracyCurve,
    DiversityReport,
    StatsSummary,
    StepStats,
    aggregate_step_stats,
    auc,
    ngram_diversity,
)
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
    TruncationResult,
    epsilon_truncate,
    eta_truncate,
    fallback_to_argmax,
    korder_threshold,
    min_p_truncate,
    mirostat_step,
    pless_norm_threshold,
    pless_threshold,
    run_sampler,
    sample_token,
    top_k_truncate,
    top_p_truncate,
    truncate,
    truncate_at,
)
from .traces import (
    SparseStep,
    SynthSpec,
    Trace,
    TraceHeader,
    expand_sparse,
    generate_synthetic,
    read_trace,
    replay,
    sparsify,
    step_to_logits,
    write_trace,
)

__version__ = "0.1.0"
