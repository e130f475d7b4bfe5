import numpy as np
import pytest

from pless import ProbDist


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_dists(rng, count, vocab, alpha=1.0):
    """Seeded Dirichlet rows as ProbDist objects."""
    rows = rng.dirichlet(np.full(vocab, alpha), size=count)
    return [ProbDist(row) for row in rows]


def dirichlet_rows(rng, count, vocab, alpha):
    """Raw Dirichlet rows; resamples the rare all-underflow rows at tiny alpha."""
    rows = rng.dirichlet(np.full(vocab, alpha), size=count)
    bad = ~np.isfinite(rows).all(axis=1) | (rows.sum(axis=1) <= 0)
    while bad.any():
        rows[bad] = rng.dirichlet(np.full(vocab, alpha), size=int(bad.sum()))
        bad = ~np.isfinite(rows).all(axis=1) | (rows.sum(axis=1) <= 0)
    return rows
