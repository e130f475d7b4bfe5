"""Sorted-reference vs sort-free implementations must agree exactly.

The exhaustive vocab<=8 sweep lives in the acceptance suite; this module
keeps a fast sweep for small vocabularies plus random-row spot checks.
"""

import math

import numpy as np
import pytest

from pless import (
    Epsilon,
    Eta,
    KOrder,
    MinP,
    Mirostat,
    MirostatState,
    PLess,
    PLessNorm,
    ProbDist,
    TopK,
    TopP,
    truncate,
)
from pless import reference
from conftest import dirichlet_rows
from grid import grid_dists

MU_BUDGET = math.log(4.0)

PAIRS = [
    ("pless", lambda d: truncate(PLess(), d), reference.pless),
    ("pless-norm", lambda d: truncate(PLessNorm(), d), reference.pless_norm),
    ("korder-0.5", lambda d: truncate(KOrder(k=0.5), d), lambda d: reference.korder(d, 0.5)),
    ("korder-4", lambda d: truncate(KOrder(k=4.0), d), lambda d: reference.korder(d, 4.0)),
    ("top-p-0.625", lambda d: truncate(TopP(p=0.625), d), lambda d: reference.top_p(d, 0.625)),
    ("top-k-2", lambda d: truncate(TopK(k=2), d), lambda d: reference.top_k(d, 2)),
    ("min-p-0.5", lambda d: truncate(MinP(p_base=0.5), d), lambda d: reference.min_p(d, 0.5)),
    ("epsilon-0.125", lambda d: truncate(Epsilon(eps=0.125), d), lambda d: reference.epsilon(d, 0.125)),
    ("eta-0.125", lambda d: truncate(Eta(eps=0.125), d), lambda d: reference.eta(d, 0.125)),
    (
        "mirostat",
        lambda d: truncate(Mirostat(), d, state=MirostatState(mu=MU_BUDGET)),
        lambda d: reference.mirostat(d, MU_BUDGET),
    ),
]


def assert_same_truncation(name, d, fast, naive):
    assert fast.admitted.tolist() == naive.admitted.tolist(), (
        f"{name} admitted sets differ on {d.probs.tolist()}"
    )
    assert np.array_equal(fast.renorm_probs, naive.renorm_probs), (
        f"{name} renormalized probabilities differ on {d.probs.tolist()}"
    )


@pytest.mark.parametrize("vocab", [1, 2, 3, 4])
def test_grid_equivalence_small_vocab(vocab):
    for d in grid_dists(vocab):
        for name, fast_fn, naive_fn in PAIRS:
            if name == "pless-norm" and vocab < 2:
                continue
            assert_same_truncation(name, d, fast_fn(d), naive_fn(d))


def test_random_row_equivalence(rng):
    for row in dirichlet_rows(rng, 300, 24, 0.4):
        d = ProbDist(row)
        for name, fast_fn, naive_fn in PAIRS:
            assert_same_truncation(name, d, fast_fn(d), naive_fn(d))
