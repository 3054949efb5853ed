"""Certified lower bounds on the dyadic product BMO discrepancy.

For a set U the normalised energy is

    r(U) = (1 / vol U) * sum_{j in N_0^d, |j| <= J} 2^|j| sum_{I_{j,m} in U} <Delta_P, h_{j,m}>^2.

Every r(U) is below the BMO seminorm squared, so the maximum over any family
of candidate sets is a lower bound.  Candidates are the full cube, dyadic
boxes of order <= L, and unions of the level-(L,...,L) cells.

Boxes are bucketed by their ancestor at level min(j, L) ("keys").  A key at
level l is inside a cell union exactly when all cells below it are chosen,
so maximising r over unions is a maximum-ratio closure problem: Dinkelbach
iteration on the ratio with a min-cut for each parametric closure.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import haar
from .pointset import PointSet

__all__ = [
    "BmoSearchTooLarge",
    "CandidateKind",
    "Candidate",
    "UnionSearchResult",
    "BmoEstimate",
    "bmo_initial",
    "bmo_global",
    "bmo_dyadic_box",
    "bmo_union_search",
    "bmo_discrepancy",
    "default_search_level",
]

#: at most this many level-L cells in a union search
MAX_CELLS = 1 << 20
#: at most this many bucket keys (all levels l <= (L,...,L))
MAX_KEYS = 1 << 22
#: graphs with more nodes than this use the greedy search instead of min-cut
MINCUT_NODE_LIMIT = 20_000
_DINKELBACH_MAX_ITER = 60


class BmoSearchTooLarge(ValueError):
    pass


class CandidateKind(str, enum.Enum):
    FULL_CUBE = "FULL_CUBE"
    DYADIC_BOX = "DYADIC_BOX"
    CELL_UNION = "CELL_UNION"


@dataclass(frozen=True)
class Candidate:
    kind: CandidateKind
    index: haar.DyadicIndex | None = None
    cells: tuple[tuple[int, ...], ...] | None = None
    cell_level: int | None = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.index is not None:
            out["levels"] = list(self.index.levels)
            out["positions"] = list(self.index.positions)
        if self.cells is not None:
            out["cell_level"] = self.cell_level
            out["cells"] = [list(c) for c in self.cells]
        return out


@dataclass(frozen=True)
class UnionSearchResult:
    cells: tuple[tuple[int, ...], ...]
    squared: float
    method: str
    iterations: int


@dataclass(frozen=True)
class BmoEstimate:
    value: float
    squared: float
    candidate_u: Candidate
    truncation_order: int
    search_level: int
    global_term_squared: float
    tail_bound: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "squared": self.squared,
            "candidate_u": self.candidate_u.to_dict(),
            "truncation_order": self.truncation_order,
            "search_level": self.search_level,
            "global_term_squared": self.global_term_squared,
            "tail_bound": self.tail_bound,
            "diagnostics": self.diagnostics,
        }


def bmo_initial(d: int) -> float:
    """BMO discrepancy of the empty set, 12^(-d/2)."""
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return 12.0 ** (-d / 2)


def bmo_global(P: PointSet, J: int, threads: int | None = None) -> float:
    """r([0,1)^d); the same computation as the extreme L2 Haar series."""
    return haar.haar_energy(P, J, star=False, threads=threads).squared


def _decode_positions(keys, levels_rows):
    bits = np.maximum(levels_rows, 0)
    shifts = np.cumsum(bits[:, ::-1], axis=1)[:, ::-1] - bits
    masks = (np.int64(1) << bits) - 1
    return (keys[:, None] >> shifts) & masks


def _iter_groups(tab, d, k_lo, k_hi, offset=None):
    """Yield (levels, row, positions, summed) for occupied boxes, orders k_lo..k_hi.

    With ``offset`` the level vectors are offset + compositions of k.
    """
    rows_per_chunk = max(1, haar._CHUNK_ELEMS // max(1, (tab.n if tab else 1) * d))
    for k in range(k_lo, k_hi + 1):
        for lev in haar._level_chunks(d, k, False, rows_per_chunk):
            if offset is not None:
                lev = lev + offset
            if tab is None or tab.n == 0:
                yield lev, None, None, None
                continue
            row, keys, summed, _ = haar._group_level_batch(tab, lev)
            keys = np.asarray(keys, dtype=np.int64)
            yield lev, row, _decode_positions(keys, lev[row]), summed


def bmo_dyadic_box(P: PointSet, u: haar.DyadicIndex, J: int) -> float:
    """r(U) for U = I_{u-levels, u-positions}, all levels of u nonnegative."""
    if u.dim != P.dim:
        raise ValueError(f"box has dimension {u.dim}, point set {P.dim}")
    if min(u.levels) < 0:
        raise ValueError("level -1 does not define a proper box here; use bmo_global "
                         "for the full cube")
    if J < u.order:
        raise ValueError(f"truncation order {J} below box order {u.order}")
    lo, hi = haar.dyadic_interval(u)
    inside = np.all((P.points >= lo) & (P.points < hi), axis=1) if P.n else np.zeros(0, bool)
    tab = haar._Tables(P.points[inside]) if inside.any() else None
    offset = np.asarray(u.levels, dtype=np.int64)
    parts = []
    for lev, row, _, summed in _iter_groups(tab, P.dim, 0, J - u.order, offset):
        order = lev.sum(axis=1)
        boxes_in_u = np.ldexp(1.0, order - u.order)
        vol = haar._level_volume_parts(lev)
        if row is None:
            occ_sq = n_occ = 0.0
        else:
            a = summed / P.n
            occ_sq = np.bincount(row, (a - vol[row]) ** 2, minlength=lev.shape[0])
            n_occ = np.bincount(row, minlength=lev.shape[0])
        parts.append(np.ldexp(occ_sq + (boxes_in_u - n_occ) * vol * vol, order))
    return math.fsum(np.concatenate(parts)) * 2.0 ** u.order


def _check_search_size(d, L):
    if int(L) != L or L < 0:
        raise ValueError(f"search level must be a nonnegative integer, got {L!r}")
    if d * L > 20:
        raise BmoSearchTooLarge(
            f"search too large: 2^(d*L) = 2^{d * L} cells exceeds 2^20; use a smaller L")
    keys = (2 ** (L + 1) - 1) ** d
    if keys > MAX_KEYS:
        raise BmoSearchTooLarge(
            f"search too large: {keys} dyadic keys at d={d}, L={L}; use a smaller L")


def default_search_level(d: int) -> int:
    """min(4, floor(20/d)), lowered further until the key count fits."""
    L = min(4, 20 // d)
    while L > 0 and (2 ** (L + 1) - 1) ** d > MAX_KEYS:
        L -= 1
    return L


def _key_weights(P: PointSet, J: int, L: int) -> dict[tuple[int, ...], np.ndarray]:
    """Energy 2^|j| coeff^2 of all boxes with |j| <= J, summed per key.

    Keys at level l are arrays of shape (2^l_1, ..., 2^l_d).  All key arrays
    live in one flat buffer; a level vector l has id sum_i l_i (L+1)^i.
    """
    d = P.dim
    key_levels = list(itertools.product(range(L + 1), repeat=d))
    radix = (L + 1) ** np.arange(d, dtype=np.int64)
    sizes = np.zeros((L + 1) ** d, dtype=np.int64)
    for lv in key_levels:
        sizes[int(np.dot(lv, radix))] = 1 << sum(lv)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    flat = np.zeros(int(sizes.sum()))
    baseline = [[] for _ in range(sizes.size)]

    tab = haar._Tables(P.points) if P.n else None
    for lev, row, pos, summed in _iter_groups(tab, d, 0, J):
        order = lev.sum(axis=1)
        vol = haar._level_volume_parts(lev)
        key_lev = np.minimum(lev, L)
        ids = key_lev @ radix
        # every key gets the empty-box energy of all its level-j boxes
        base = np.ldexp(vol * vol, order + order - key_lev.sum(axis=1))
        srt = np.argsort(ids, kind="stable")
        uniq, first = np.unique(ids[srt], return_index=True)
        for i, part in zip(uniq, np.split(base[srt], first[1:])):
            baseline[int(i)].append(math.fsum(part))
        if row is None:
            continue
        a = summed / P.n
        adj = np.ldexp((a - vol[row]) ** 2 - vol[row] ** 2, order[row])
        klev = key_lev[row]
        anc = pos >> (lev[row] - klev)
        # C-order index inside the key array: anc_i shifted by the bits of later axes
        shifts = np.cumsum(klev[:, ::-1], axis=1)[:, ::-1] - klev
        np.add.at(flat, offsets[ids[row]] + (anc << shifts).sum(axis=1), adj)

    weights = {}
    for lv in key_levels:
        i = int(np.dot(lv, radix))
        arr = flat[offsets[i]:offsets[i] + sizes[i]].reshape(tuple(1 << x for x in lv))
        weights[lv] = arr + math.fsum(baseline[i])
    return weights


def _block_reduce(arr, from_lv, to_lv, op):
    shape = []
    for a, b in zip(from_lv, to_lv):
        shape += [1 << b, 1 << (a - b)]
    return op(arr.reshape(shape), axis=tuple(range(1, 2 * len(from_lv), 2)))


def _union_weight(weights, mask, L):
    parts = []
    full = tuple([L] * mask.ndim)
    for lv, w in weights.items():
        covered = _block_reduce(mask, full, lv, np.all)
        parts.append(float(w[covered].sum()))
    return math.fsum(parts)


def _mincut_closure(weights, L, d, lam, cell_vol):
    """Cell mask maximising W(S) - lam * vol(S) via a project-selection min-cut."""
    full = tuple([L] * d)
    g = nx.DiGraph()
    profits = {}
    for lv, w in weights.items():
        for p in np.ndindex(w.shape):
            profit = float(w[p])
            if lv == full:
                profit -= lam * cell_vol
            profits[(lv, p)] = profit
            # a key needs both halves along its first unsplit coordinate
            for i in range(d):
                if lv[i] < L:
                    child_lv = lv[:i] + (lv[i] + 1,) + lv[i + 1:]
                    for half in (0, 1):
                        child_p = p[:i] + (2 * p[i] + half,) + p[i + 1:]
                        g.add_edge((lv, p), (child_lv, child_p))
                    break
    scale = max((abs(v) for v in profits.values()), default=0.0)
    if scale == 0.0:
        return None
    g.add_node("s")
    g.add_node("t")
    for node, profit in profits.items():
        if profit > 0:
            g.add_edge("s", node, capacity=profit / scale)
        elif profit < 0:
            g.add_edge(node, "t", capacity=-profit / scale)
    _, (source_side, _) = nx.minimum_cut(g, "s", "t")
    mask = np.zeros(tuple([1 << L] * d), dtype=bool)
    for node in source_side:
        if node != "s" and node[0] == full:
            mask[node[1]] = True
    return mask


def _greedy_union(weights, L, d, cell_vol):
    """Add cells in order of their share of key energy, keep the best prefix."""
    full = tuple([L] * d)
    score = np.zeros(tuple([1 << L] * d))
    for lv, w in weights.items():
        reps = [1 << (L - x) for x in lv]
        share = w / math.prod(reps)
        score += np.kron(share, np.ones(reps)) if lv != full else w
    order = np.argsort(-score.reshape(-1), kind="stable")
    rank = np.empty(order.size, dtype=np.int64)
    rank[order] = np.arange(order.size)
    rank = rank.reshape(score.shape)
    gained = np.zeros(order.size)
    for lv, w in weights.items():
        done = _block_reduce(rank, full, lv, np.max)
        np.add.at(gained, done.reshape(-1), w.reshape(-1))
    total = np.cumsum(gained)
    ratio = total / (np.arange(1, order.size + 1) * cell_vol)
    t = int(np.argmax(ratio))
    mask = np.zeros(order.size, dtype=bool)
    mask[order[:t + 1]] = True
    return mask.reshape(score.shape)


def _union_search(weights, L, d, full_value):
    """Best cell union; ``full_value`` is r([0,1)^d), the starting ratio."""
    cell_vol = 2.0 ** -(d * L)
    best_mask = np.ones(tuple([1 << L] * d), dtype=bool)
    best = full_value
    n_nodes = sum(w.size for w in weights.values())
    if n_nodes > MINCUT_NODE_LIMIT:
        mask = _greedy_union(weights, L, d, cell_vol)
        ratio = _union_weight(weights, mask, L) / (mask.sum() * cell_vol)
        if ratio > best:
            best_mask, best = mask, ratio
        return best_mask, best, "greedy", 1

    iterations = 0
    for iterations in range(1, _DINKELBACH_MAX_ITER + 1):
        mask = _mincut_closure(weights, L, d, best, cell_vol)
        if mask is None or not mask.any():
            break
        ratio = _union_weight(weights, mask, L) / (mask.sum() * cell_vol)
        if not ratio > best * (1 + 1e-13):
            break
        best_mask, best = mask, ratio
    return best_mask, best, "dinkelbach-mincut", iterations


def _cells_of(mask):
    return tuple(tuple(int(v) for v in c) for c in np.argwhere(mask))


def bmo_union_search(P: PointSet, L: int, J: int) -> UnionSearchResult:
    """Best ratio r(U) over unions U of level-(L,...,L) cells.

    Exact (Dinkelbach with min-cut) while the key graph has at most
    ``MINCUT_NODE_LIMIT`` nodes, greedy prefix search beyond that.  The full
    cube is always among the compared sets.
    """
    _check_search_size(P.dim, L)
    if J < L:
        raise ValueError(f"truncation order {J} must be >= search level {L}")
    weights = _key_weights(P, J, L)
    mask, ratio, method, its = _union_search(weights, L, P.dim, bmo_global(P, J))
    return UnionSearchResult(_cells_of(mask), ratio, method, its)


def _box_candidates(weights, L, d):
    """(order, u, m, ratio) for every dyadic box with |u| <= L, in tie-break order."""
    out = []
    for k in range(L + 1):
        for u in haar.levels_of_order(d, k):
            u = tuple(int(x) for x in u)
            total = np.zeros(tuple(1 << x for x in u))
            for lv, w in weights.items():
                if all(a >= b for a, b in zip(lv, u)):
                    total += _block_reduce(w, lv, u, np.sum)
            ratios = total * 2.0 ** k
            for m in np.ndindex(ratios.shape):
                out.append((u, m, float(ratios[m])))
    return out


def bmo_discrepancy(P: PointSet, J: int, L: int, threads: int | None = None) -> BmoEstimate:
    """Largest r(U) over the full cube, dyadic boxes of order <= L and level-L cell unions.

    The full-cube term equals the truncated extreme L2 energy, so the result
    is never below ``extreme_l2_haar(P, J)``.
    """
    if J < L:
        raise ValueError(f"truncation order {J} must be >= search level {L}")
    _check_search_size(P.dim, L)
    energy = haar.haar_energy(P, J, star=False, threads=threads)
    best = energy.squared
    cand = Candidate(CandidateKind.FULL_CUBE)

    weights = _key_weights(P, J, L)
    for u, m, ratio in _box_candidates(weights, L, P.dim):
        if ratio > best:
            best = ratio
            cand = Candidate(CandidateKind.DYADIC_BOX, haar.DyadicIndex(u, m))
    mask, ratio, method, its = _union_search(weights, L, P.dim, energy.squared)
    if ratio > best:
        best = ratio
        cand = Candidate(CandidateKind.CELL_UNION, cells=_cells_of(mask), cell_level=L)

    diagnostics = {"union_method": method, "union_iterations": its,
                   "union_cells": int(mask.sum()), "levels": energy.n_levels}
    return BmoEstimate(math.sqrt(best), best, cand, int(J), int(L), energy.squared,
                       energy.tail_bound, diagnostics)
