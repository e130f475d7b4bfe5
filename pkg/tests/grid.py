"""Shared enumeration of the 1/16-step probability grid.

Sixteenths are exact binary fractions, so every grid distribution, every
partial sum, and every square is represented exactly in float64; threshold
ties on this grid are exact ties, which is what makes bit-identical
equivalence between the sorted and sort-free implementations a fair demand.
"""

import math

import numpy as np

from pless import ProbDist

GRID_STEPS = 16


def compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_dists(vocab_size, steps=GRID_STEPS):
    scale = 1.0 / steps
    for comp in compositions(steps, vocab_size):
        yield ProbDist(np.array(comp, dtype=np.float64) * scale)


def grid_size(vocab_size, steps=GRID_STEPS):
    return math.comb(steps + vocab_size - 1, vocab_size - 1)
