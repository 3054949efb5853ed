"""Shared fixtures-as-functions: the seeded corpus and a few brute-force references."""
import itertools

import numpy as np

from disclab import haar
from disclab.pointset import gen_random

CORPUS_SEED = 20240611


def corpus(count=50, dmax=4, nmax=64, seed=CORPUS_SEED):
    """Seeded random point sets with d <= dmax and 1 <= N <= nmax."""
    rng = np.random.Generator(np.random.Philox(seed))
    sets = []
    for i in range(count):
        d = 1 + i % dmax
        n = int(rng.integers(1, nmax + 1))
        sets.append(gen_random(n, d, seed=seed + i))
    return sets


def brute_level_sum(P, levels):
    """2^|j| sum over every box of level j of the squared coefficient."""
    total = 0.0
    ranges = [range(1 if j < 0 else 1 << j) for j in levels]
    for m in itertools.product(*ranges):
        c = haar.haar_coefficient(P, haar.DyadicIndex(levels, m)).value
        total += c * c
    return total * 2.0 ** sum(max(j, 0) for j in levels)


def brute_union_best(P, L, J):
    """max over nonempty unions U of level-L cells of r(U), by enumeration."""
    d = P.dim
    side = 1 << L
    n_cells = side ** d
    energy, masks = [], []
    for c in haar.iter_coefficients(P, J, star=False):
        lo, hi = haar.dyadic_interval(c.index)
        spans = [range(int(np.floor(a * side)), int(np.ceil(b * side))) for a, b in zip(lo, hi)]
        mask = 0
        for cell in itertools.product(*spans):
            mask |= 1 << int(np.ravel_multi_index(cell, (side,) * d))
        energy.append(c.value ** 2 * 2.0 ** c.index.order)
        masks.append(mask)
    energy = np.array(energy)
    masks = np.array(masks, dtype=np.int64)
    subsets = np.arange(1, 1 << n_cells, dtype=np.int64)
    best = 0.0
    for s in range(0, subsets.size, 4096):
        sub = subsets[s:s + 4096]
        inside = (masks[None, :] & ~sub[:, None]) == 0
        vol = np.array([bin(int(v)).count("1") for v in sub]) / n_cells
        best = max(best, float(np.max(inside @ energy / vol)))
    return best
