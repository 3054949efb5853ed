"""Dyadic Haar analysis of the anchored local discrepancy.

Per coordinate, the counting term 1[x < t] and the volume term t have
closed-form Haar coefficients.  On an interval I = [a, b) with midpoint c and
half-width h = 2^-(j+1):

    <1[x < .], h_{j,m}> = (c - x) - h   if a <= x < c
                        = -(b - x)      if c <= x < b
                        = 0             otherwise
    <t, h_{j,m}>        = -h^2

and on level -1 the coefficients are 1 - x and 1/2.  A tensor coefficient is
the product over coordinates, so

    <Delta_P([0, .)), h_{j,m}> = (1/N) sum_n prod_i g(x_ni) - prod_i f(j_i).

The counting part is nonzero only on the box holding each point, which is
what lets a whole level be summed without enumerating its 2^|j| boxes.

The sign convention is Delta_emptyset([0, t)) = -prod t_i, so the empty set
has coefficient ``-prod f(j_i)``.  Only squared coefficients enter any
discrepancy, so the sign never matters downstream.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .pointset import PointSet

__all__ = [
    "MAX_LEVEL",
    "DyadicIndex",
    "HaarCoefficient",
    "HaarEnergy",
    "dyadic_interval",
    "haar_eval",
    "volume_part_coefficient",
    "counting_part_coefficient",
    "haar_coefficient",
    "level_sum",
    "levels_of_order",
    "level_count",
    "occupied_boxes",
    "haar_energy",
    "tail_bound",
    "iter_coefficients",
]

#: Finest level handled exactly; floor(x * 2**j) is exact for j <= 52.
MAX_LEVEL = 52

# columns of the per-coordinate tables: level -1, 0, ..., MAX_LEVEL
_NCOL = MAX_LEVEL + 2
# (levels in batch) * N * d elements per vectorised chunk
_CHUNK_ELEMS = 1 << 21
# pair-sum work above which tail_bound falls back to the crude bound
_PAIR_WORK = 6_000_000
_REL_MARGIN = 1e-12


@dataclass(frozen=True)
class DyadicIndex:
    """Level vector j and position vector m of a dyadic box / Haar function."""

    levels: tuple[int, ...]
    positions: tuple[int, ...]

    def __post_init__(self):
        levels = tuple(int(j) for j in self.levels)
        positions = tuple(int(m) for m in self.positions)
        if not levels or len(levels) != len(positions):
            raise ValueError("levels and positions must be nonempty and of equal length")
        for j, m in zip(levels, positions):
            if j < -1 or j > MAX_LEVEL:
                raise ValueError(f"level {j} outside [-1, {MAX_LEVEL}]")
            hi = 1 if j == -1 else 1 << j
            if not 0 <= m < hi:
                raise ValueError(f"position {m} outside D_{j}")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "positions", positions)

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def order(self) -> int:
        return sum(max(j, 0) for j in self.levels)

    @property
    def volume(self) -> float:
        return 2.0 ** -self.order

    def __str__(self):
        return f"j={self.levels} m={self.positions}"


@dataclass(frozen=True)
class HaarCoefficient:
    index: DyadicIndex
    counting_part: float
    volume_part: float

    @property
    def value(self) -> float:
        return self.counting_part - self.volume_part


def dyadic_interval(index: DyadicIndex) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper corners of I_{j,m}; level -1 spans [0, 1)."""
    lower, upper = [], []
    for j, m in zip(index.levels, index.positions):
        if j == -1:
            lower.append(0.0)
            upper.append(1.0)
        else:
            w = 2.0 ** -j
            lower.append(m * w)
            upper.append((m + 1) * w)
    return np.array(lower), np.array(upper)


def haar_eval(index: DyadicIndex, x) -> int:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (index.dim,):
        raise ValueError(f"point must have {index.dim} coordinates")
    value = 1
    for xi, j, m in zip(x, index.levels, index.positions):
        if j == -1:
            continue
        s = xi * 2.0 ** (j + 1)
        if math.floor(s) // 2 != m:
            return 0
        value *= 1 if math.floor(s) % 2 == 0 else -1
    return value


def _volume_factor(level: int) -> float:
    return 0.5 if level == -1 else -(4.0 ** -(level + 1))


def volume_part_coefficient(index: DyadicIndex, d: int | None = None) -> float:
    """<prod t_i, h_{j,m}>; independent of the positions."""
    if d is not None and d != index.dim:
        raise ValueError(f"index has dimension {index.dim}, not {d}")
    return math.prod(_volume_factor(j) for j in index.levels)


def _counting_factors(x: np.ndarray, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Box positions and counting-part factors of coordinates ``x`` at one level."""
    if level == -1:
        return np.zeros(x.shape, dtype=np.int64), 1.0 - x
    scale = 2.0 ** level
    pos = np.floor(x * scale)
    half = 0.5 / scale
    a = pos / scale
    c = a + half
    b = c + half
    g = np.where(x < c, (c - x) - half, -(b - x))
    return pos.astype(np.int64), g


def counting_part_coefficient(x, index: DyadicIndex) -> float:
    """<prod_i 1[x_i < t_i], h_{j,m}> for a single point x."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape != (index.dim,):
        raise ValueError(f"point must have {index.dim} coordinates")
    value = 1.0
    for xi, j, m in zip(x, index.levels, index.positions):
        pos, g = _counting_factors(np.array([xi]), j)
        if j >= 0 and pos[0] != m:
            return 0.0
        value *= float(g[0])
    return value


class _Tables:
    """Per-coordinate box positions and counting factors for levels -1..MAX_LEVEL.

    Arrays have shape ``(d, N, MAX_LEVEL + 2)``; column ``j + 1`` holds level j.
    """

    def __init__(self, points: np.ndarray):
        n, d = points.shape
        self.n, self.d = n, d
        self.pos = np.empty((d, n, _NCOL), dtype=np.int64)
        self.g = np.empty((d, n, _NCOL))
        for level in range(-1, MAX_LEVEL + 1):
            pos, g = _counting_factors(points.T, level)
            self.pos[:, :, level + 1] = pos
            self.g[:, :, level + 1] = g
        self.absg = np.abs(self.g)


def haar_coefficient(P: PointSet, index: DyadicIndex) -> HaarCoefficient:
    if index.dim != P.dim:
        raise ValueError(f"index has dimension {index.dim}, point set {P.dim}")
    vol = volume_part_coefficient(index)
    if P.n == 0:
        return HaarCoefficient(index, 0.0, vol)
    prod = np.ones(P.n)
    for i, (j, m) in enumerate(zip(index.levels, index.positions)):
        pos, g = _counting_factors(P.points[:, i], j)
        prod *= np.where(pos == m, g, 0.0) if j >= 0 else g
    return HaarCoefficient(index, math.fsum(prod) / P.n, vol)


def _check_levels(levels, d, allow_minus_one):
    levels = np.asarray(levels, dtype=np.int64)
    if levels.ndim == 1:
        levels = levels[None, :]
    if levels.shape[1] != d:
        raise ValueError(f"level vectors must have {d} entries")
    lo = -1 if allow_minus_one else 0
    if levels.size and (levels.min() < lo or levels.max() > MAX_LEVEL):
        raise ValueError(f"levels must lie in [{lo}, {MAX_LEVEL}]")
    return levels


def _level_volume_parts(levels: np.ndarray) -> np.ndarray:
    f = np.where(levels == -1, 0.5, -(4.0 ** -(levels + 1.0)))
    return np.prod(f, axis=1)


def _group_level_batch(tab: _Tables, levels: np.ndarray):
    """Occupied boxes of every level row in ``levels``.

    Returns ``(row, key, summed, summed_abs)`` per occupied box, where ``key``
    is the mixed-radix box number (coordinate 0 most significant) and
    ``summed`` is sum_n prod_i g over the points in the box.  Boxes appear
    sorted by (row, key).
    """
    n_lev, d = levels.shape
    n = tab.n
    bits = np.maximum(levels, 0)
    if bits.sum(axis=1).max(initial=0) > 62:
        return _group_level_batch_wide(tab, levels)
    shifts = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1] - bits
    cols = levels + 1
    ax = np.arange(d)[None, None, :]
    pt = np.arange(n)[None, :, None]
    col = cols[:, None, :]
    pos = tab.pos[ax, pt, col]
    gsel = tab.g[ax, pt, col]
    prod = np.prod(gsel, axis=2)
    key = np.sum(pos << shifts[:, None, :], axis=2)

    order = np.argsort(key, axis=1, kind="stable")
    key = np.take_along_axis(key, order, axis=1)
    prod = np.take_along_axis(prod, order, axis=1)
    start = np.ones((n_lev, n), dtype=bool)
    start[:, 1:] = key[:, 1:] != key[:, :-1]
    starts = np.flatnonzero(start.ravel())
    summed = np.add.reduceat(prod.ravel(), starts)
    summed_abs = np.add.reduceat(np.abs(prod).ravel(), starts)
    return starts // n, key.ravel()[starts], summed, summed_abs


def _group_level_batch_wide(tab, levels):
    # orders above 62 bits: Python-int keys, one level at a time
    rows, keys, sums, abs_sums = [], [], [], []
    for r, lev in enumerate(levels):
        cols = lev + 1
        bits = [max(int(j), 0) for j in lev]
        pos = np.stack([tab.pos[i, :, c] for i, c in enumerate(cols)], axis=1)
        prod = np.prod(np.stack([tab.g[i, :, c] for i, c in enumerate(cols)], axis=1), axis=1)
        groups: dict[int, list[int]] = {}
        for n, p in enumerate(pos):
            key = 0
            for v, b in zip(p, bits):
                key = (key << b) | int(v)
            groups.setdefault(key, []).append(n)
        for key in sorted(groups):
            members = groups[key]
            rows.append(r)
            keys.append(key)
            sums.append(prod[members].sum())
            abs_sums.append(np.abs(prod[members]).sum())
    return (np.asarray(rows, dtype=np.int64), np.asarray(keys, dtype=object),
            np.asarray(sums), np.asarray(abs_sums))


def _level_batch_sums(tab: _Tables | None, levels: np.ndarray, n_total: int):
    """Level sums 2^|j| sum_m coeff^2 and their absolute-value majorant parts."""
    n_lev = levels.shape[0]
    order = np.maximum(levels, 0).sum(axis=1)
    boxes = np.ldexp(1.0, order)
    vol = _level_volume_parts(levels)
    if tab is None or tab.n == 0:
        sums = boxes * boxes * vol * vol
        return sums, np.zeros(n_lev)
    row, _, summed, summed_abs = _group_level_batch(tab, levels)
    a = summed / n_total
    occ_sq = np.bincount(row, (a - vol[row]) ** 2, minlength=n_lev)
    n_occ = np.bincount(row, minlength=n_lev)
    abs_sq = np.bincount(row, (summed_abs / n_total) ** 2, minlength=n_lev)
    sums = boxes * (occ_sq + (boxes - n_occ) * vol * vol)
    return sums, boxes * abs_sq


def level_count(d: int, k: int, star: bool = False) -> int:
    """Number of level vectors of order k (with -1 entries allowed if ``star``)."""
    if not star:
        return math.comb(k + d - 1, d - 1)
    # choose the coordinates sitting at -1, the rest form a composition of k
    return sum(math.comb(d, s) * (math.comb(k + d - s - 1, d - s - 1) if d - s else int(k == 0))
               for s in range(d + 1))


def _compositions(d: int, k: int) -> Iterator[tuple[int, ...]]:
    """Compositions of k into d nonnegative parts, lexicographic."""
    for bars in itertools.combinations(range(k + d - 1), d - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(k + d - 2 - prev)
        yield tuple(parts)


def _levels_iter(d: int, k: int, star: bool) -> Iterator[tuple[int, ...]]:
    for comp in _compositions(d, k):
        if not star:
            yield comp
            continue
        zeros = [i for i, v in enumerate(comp) if v == 0]
        for r in range(len(zeros) + 1):
            for sub in itertools.combinations(zeros, r):
                lev = list(comp)
                for i in sub:
                    lev[i] = -1
                yield tuple(lev)


def levels_of_order(d: int, k: int, star: bool = False) -> np.ndarray:
    """All level vectors j with |j| = k as rows, in the fixed enumeration order.

    Without ``star`` these are the j in N_0^d, lexicographic.  With ``star``
    every composition is followed by its variants with zero entries lowered
    to -1.
    """
    rows = list(_levels_iter(d, k, star))
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), d)


def _level_chunks(d, k, star, rows_per_chunk):
    it = _levels_iter(d, k, star)
    while True:
        block = list(itertools.islice(it, rows_per_chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def level_sum(P: PointSet, j) -> float:
    """2^|j| sum_m <Delta_P, h_{j,m}>^2 over all 2^|j| boxes of level j.

    Only occupied boxes are visited: the other boxes all carry the same
    coefficient (minus the volume part), counted analytically.
    """
    levels = _check_levels(j, P.dim, allow_minus_one=True)
    tab = _Tables(P.points) if P.n else None
    sums, _ = _level_batch_sums(tab, levels, P.n)
    return float(sums[0])


def occupied_boxes(P: PointSet, j) -> tuple[np.ndarray, np.ndarray]:
    """Positions (n_occ, d) of the occupied level-j boxes and their counting parts."""
    levels = _check_levels(j, P.dim, allow_minus_one=True)
    if P.n == 0:
        return np.zeros((0, P.dim), dtype=np.int64), np.zeros(0)
    tab = _Tables(P.points)
    _, keys, summed, _ = _group_level_batch(tab, levels)
    return _decode_keys(keys, levels[0]), summed / P.n


def _decode_keys(keys, level) -> np.ndarray:
    bits = [max(int(j), 0) for j in level]
    out = np.zeros((len(keys), len(bits)), dtype=np.int64)
    for r, key in enumerate(keys):
        key = int(key)
        for i in range(len(bits) - 1, -1, -1):
            out[r, i] = key & ((1 << bits[i]) - 1)
            key >>= bits[i]
    return out


def iter_coefficients(P: PointSet, J: int, star: bool = False,
                      occupied_only: bool = False) -> Iterator[HaarCoefficient]:
    """Every Haar coefficient with |j| <= J, levels order-major.

    With ``occupied_only`` the boxes holding no point are skipped (their
    coefficient is always minus the volume part).
    """
    tab = _Tables(P.points) if P.n else None
    for k in range(J + 1):
        for level in levels_of_order(P.dim, k, star):
            vol = volume_part_coefficient(DyadicIndex(level, [0] * P.dim))
            counting = {}
            if tab is not None:
                _, keys, summed, _ = _group_level_batch(tab, level[None, :])
                pos = _decode_keys(keys, level)
                counting = {tuple(int(v) for v in p): s / P.n for p, s in zip(pos, summed)}
            if occupied_only:
                boxes = sorted(counting)
            else:
                boxes = itertools.product(*[range(1 if j < 0 else 1 << j) for j in level])
            for m in boxes:
                yield HaarCoefficient(DyadicIndex(level, m), counting.get(m, 0.0), vol)


@dataclass(frozen=True)
class HaarEnergy:
    """Truncated Haar energy sum_{|j| <= J} level_sum with a certified remainder."""

    squared: float
    tail_bound: float
    truncation_order: int
    star: bool
    n_levels: int
    order_sums: tuple[float, ...]


def _poly_mul(a, b, deg):
    out = np.zeros(deg + 1)
    for i, ai in enumerate(a[:deg + 1]):
        if ai:
            out[i:] += ai * b[:deg + 1 - i]
    return out


def _product_tail(per_coord, total_per_coord, d, J):
    """Sum of coefficients of degree > J in per_coord(z)^d, as total - partial."""
    partial = np.zeros(J + 1)
    partial[0] = 1.0
    for _ in range(d):
        partial = _poly_mul(partial, per_coord, J)
    total = total_per_coord ** d
    return max(total - math.fsum(partial), 0.0) + _REL_MARGIN * total, total


def _volume_tail(d, J, star):
    seq = np.ldexp(1.0, -2 * np.arange(J + 1) - 4)
    if star:
        seq[0] += 0.25
    return _product_tail(seq, (1 / 3) if star else (1 / 12), d, J)[0]


def _crude_counting_tail(d, J, star):
    # |prod g| <= 2^-(|j|+d') and sum_m (share of points in box m)^2 <= 1
    seq = np.ldexp(1.0, -np.arange(J + 1) - 2)
    if star:
        seq[0] += 1.0
    return _product_tail(seq, 1.5 if star else 0.5, d, J)[0]


def _pair_counting_total(tab: _Tables, star: bool) -> float:
    """(1/N^2) sum_{n,n'} prod_i sum_j 2^j [same box] |g_n| |g_n'| over all levels.

    Levels above MAX_LEVEL are majorised by |g| <= 2^-(j+1), contributing at
    most 2^-(MAX_LEVEL+2) per coordinate.
    """
    n = tab.n
    weights = np.ldexp(1.0, np.arange(MAX_LEVEL + 1))
    beyond = 2.0 ** -(MAX_LEVEL + 2)
    ia, ib = np.triu_indices(n)
    mult = np.where(ia == ib, 1.0, 2.0)
    chunk = max(1, _CHUNK_ELEMS // _NCOL)
    parts = []
    for s in range(0, ia.size, chunk):
        a, b = ia[s:s + chunk], ib[s:s + chunk]
        prod = np.ones(a.size)
        for i in range(tab.d):
            same = tab.pos[i, a, 1:] == tab.pos[i, b, 1:]
            w = (same * tab.absg[i, a, 1:] * tab.absg[i, b, 1:]) @ weights + beyond
            if star:
                w = w + tab.absg[i, a, 0] * tab.absg[i, b, 0]
            prod *= w
        parts.append(float(prod @ mult[s:s + chunk]))
    return math.fsum(parts) / (n * n)


def _counting_tail(tab: _Tables | None, d, J, star, abs_partial):
    if tab is None or tab.n == 0:
        return 0.0
    crude = _crude_counting_tail(d, J, star)
    pairs = tab.n * (tab.n + 1) // 2
    if pairs * d > _PAIR_WORK:
        return crude
    total = _pair_counting_total(tab, star)
    refined = max(total - abs_partial, 0.0) + _REL_MARGIN * total
    return min(crude, refined)


def _combine_tails(counting, volume):
    return (math.sqrt(counting) + math.sqrt(volume)) ** 2


def haar_energy(P: PointSet, J: int, star: bool = False,
                threads: int | None = None) -> HaarEnergy:
    """Sum of level sums over |j| <= J with a proven bound on the rest.

    Without ``star`` the levels run over N_0^d (the extreme L2 series and the
    full-cube BMO term); with ``star`` they run over N_{-1}^d.

    The remainder is bounded by splitting each coefficient into counting part
    a and volume part b: by Minkowski the discarded energy is at most
    (sqrt(sum 2^|j| a^2) + sqrt(sum 2^|j| b^2))^2.  The b-part is an explicit
    power series.  The a-part is bounded by the same series with |prod g| in
    place of prod g, whose full sum is a pairwise closed form, minus the part
    already enumerated; for large N the coarser bound |prod g| <= 2^-(|j|+d)
    is used instead.
    """
    if int(J) != J or J < 0:
        raise ValueError(f"truncation order must be a nonnegative integer, got {J!r}")
    if J > MAX_LEVEL:
        raise ValueError(f"truncation order above {MAX_LEVEL} is not supported")
    d = P.dim
    tab = _Tables(P.points) if P.n else None
    rows_per_chunk = max(1, _CHUNK_ELEMS // max(1, P.n * d))

    batches = [(k, lev) for k in range(J + 1) for lev in _level_chunks(d, k, star, rows_per_chunk)]

    def work(item):
        return _level_batch_sums(tab, item[1], P.n)

    if threads and threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, batches))
    else:
        results = [work(b) for b in batches]

    by_order: list[list[np.ndarray]] = [[] for _ in range(J + 1)]
    abs_parts = []
    n_levels = 0
    for (k, lev), (sums, abs_sums) in zip(batches, results):
        by_order[k].append(sums)
        abs_parts.append(abs_sums)
        n_levels += lev.shape[0]
    order_sums = tuple(math.fsum(np.concatenate(s)) for s in by_order)
    squared = math.fsum(np.concatenate([np.concatenate(s) for s in by_order]))
    abs_partial = math.fsum(np.concatenate(abs_parts)) if abs_parts else 0.0

    tail = _combine_tails(_counting_tail(tab, d, J, star, abs_partial),
                          _volume_tail(d, J, star))
    return HaarEnergy(squared, tail, int(J), star, n_levels, order_sums)


def tail_bound(P: PointSet, J: int, star: bool = False) -> float:
    """Proven upper bound on sum_{|j| > J} level_sum(P, j).

    Same value as ``haar_energy(P, J, star).tail_bound``; when that bound
    does not use the enumerated partial sum (empty or large N) the levels
    are not visited.
    """
    if P.n == 0 or P.n * (P.n + 1) // 2 * P.dim > _PAIR_WORK:
        if int(J) != J or not 0 <= J <= MAX_LEVEL:
            raise ValueError(f"truncation order must be an integer in [0, {MAX_LEVEL}]")
        counting = 0.0 if P.n == 0 else _crude_counting_tail(P.dim, int(J), star)
        return _combine_tails(counting, _volume_tail(P.dim, int(J), star))
    return haar_energy(P, J, star).tail_bound
