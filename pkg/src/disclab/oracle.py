"""Brute-force references for the discrepancy engine.

Nothing here shares code with :mod:`disclab.haar` or
:mod:`disclab.discrepancy`.  Integrals are done piecewise on cells whose walls
contain every breakpoint of the integrand, so on each open cell the
integrand is a polynomial with a closed-form antiderivative.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .pointset import PointSet

__all__ = [
    "OracleGuardError",
    "local_discrepancy",
    "exact_haar_coefficient",
    "star_l2_exact_1d",
    "extreme_l2_exact_1d",
    "star_l2_mc",
    "extreme_l2_mc",
    "HAAR_GUARD",
]

# max dim, max points, max order for exact_haar_coefficient
HAAR_GUARD = (3, 16, 12)


class OracleGuardError(ValueError):
    pass


def local_discrepancy(P: PointSet, lower, upper) -> float:
    """Fraction of points in the box [lower, upper) minus its volume."""
    lower = np.asarray(lower, dtype=np.float64).reshape(-1)
    upper = np.asarray(upper, dtype=np.float64).reshape(-1)
    if lower.shape != (P.dim,) or upper.shape != (P.dim,):
        raise ValueError(f"box corners must have {P.dim} coordinates")
    if not (np.all(lower >= 0) and np.all(upper <= 1) and np.all(lower <= upper)):
        raise ValueError(f"malformed box [{lower}, {upper})")
    vol = math.prod(float(u - l) for l, u in zip(lower, upper))
    if P.n == 0:
        return -vol
    inside = np.all((P.points >= lower) & (P.points < upper), axis=1)
    return int(inside.sum()) / P.n - vol


def _haar_pieces(level, pos, coords):
    """1-d pieces (lo, hi, sign) covering the support of h_{level,pos}."""
    if level == -1:
        a, b, mid = 0.0, 1.0, None
    else:
        width = 2.0 ** -level
        a, b = pos * width, (pos + 1) * width
        mid = a + width / 2
    cuts = {a, b}
    if mid is not None:
        cuts.add(mid)
    cuts.update(float(c) for c in coords if a < c < b)
    cuts = sorted(cuts)
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        sign = 1.0 if mid is None or hi <= mid else -1.0
        pieces.append((lo, hi, sign))
    return pieces


def exact_haar_coefficient(P: PointSet, levels, positions) -> float:
    """<Delta_P([0, .)), h_{j,m}> by summing exact integrals over cells.

    On a cell the indicator 1[x_n < t] is constant (its value at the cell's
    lower corner), so the integrand is ``h * (count/N - prod t_i)``.
    """
    levels, positions = tuple(levels), tuple(positions)
    d = P.dim
    max_d, max_n, max_order = HAAR_GUARD
    order = sum(max(j, 0) for j in levels)
    if d > max_d or P.n > max_n or order > max_order:
        raise OracleGuardError(
            f"exact_haar_coefficient is limited to d<={max_d}, N<={max_n}, "
            f"|j|<={max_order} (got d={d}, N={P.n}, |j|={order})")
    if len(levels) != d or len(positions) != d:
        raise ValueError("index length does not match dimension")

    per_axis = [_haar_pieces(j, m, P.points[:, i]) for i, (j, m) in
                enumerate(zip(levels, positions))]
    terms = []
    for cell in itertools.product(*per_axis):
        lo = np.array([c[0] for c in cell])
        sign = math.prod(c[2] for c in cell)
        vol = math.prod(c[1] - c[0] for c in cell)
        # integral of prod t_i over the cell
        moment = math.prod((c[1] * c[1] - c[0] * c[0]) / 2 for c in cell)
        if P.n:
            count = int(np.all(P.points <= lo, axis=1).sum())
            terms.append(sign * count * vol / P.n)
        terms.append(-sign * moment)
    return math.fsum(terms)


def _require_1d(P):
    if P.dim != 1:
        raise ValueError(f"1-d oracle called with dim={P.dim}")


def star_l2_exact_1d(P: PointSet) -> float:
    """Star L2 discrepancy in d=1 by integrating (k/N - t)^2 between order statistics."""
    _require_1d(P)
    n = P.n
    xs = np.sort(P.points[:, 0])
    knots = [0.0, *xs.tolist(), 1.0]
    terms = []
    for k, (lo, hi) in enumerate(zip(knots[:-1], knots[1:])):
        c = k / n if n else 0.0
        # integral of (c - t)^2 over [lo, hi]
        terms.append(((c - lo) ** 3 - (c - hi) ** 3) / 3)
    return math.sqrt(math.fsum(terms))


def _rect_moment(c, x0, x1, y0, y1):
    """Integral of (c - (y - x))^2 over [x0,x1] x [y0,y1]."""
    lx, ly = x1 - x0, y1 - y0
    x1m, y1m = (x1 * x1 - x0 * x0) / 2, (y1 * y1 - y0 * y0) / 2
    x2m, y2m = (x1 ** 3 - x0 ** 3) / 3, (y1 ** 3 - y0 ** 3) / 3
    sq = y2m * lx - 2 * x1m * y1m + x2m * ly
    return c * c * lx * ly - 2 * c * (y1m * lx - x1m * ly) + sq


def extreme_l2_exact_1d(P: PointSet) -> float:
    """Extreme L2 discrepancy in d=1 over all x <= y, piecewise on a knot grid.

    For x in knot piece a and y in piece b > a, the points counted in [x, y)
    are those with knot[a+1] <= x_n <= knot[b].  Same-piece pairs (a == b)
    count nothing and integrate over a triangle.
    """
    _require_1d(P)
    n = P.n
    xs = np.sort(P.points[:, 0])
    knots = sorted({0.0, 1.0, *xs.tolist()})
    terms = []
    for a in range(len(knots) - 1):
        x0, x1 = knots[a], knots[a + 1]
        length = x1 - x0
        terms.append(length ** 4 / 12)
        for b in range(a + 1, len(knots) - 1):
            y0, y1 = knots[b], knots[b + 1]
            count = int(np.count_nonzero((xs >= x1) & (xs <= y0))) if n else 0
            c = count / n if n else 0.0
            terms.append(_rect_moment(c, x0, x1, y0, y1))
    return math.sqrt(math.fsum(terms))


def _mc_stats(values, scale):
    est = scale * float(np.mean(values))
    se = scale * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return est, se


def _counts_in(points, lo, hi, chunk):
    counts = np.empty(lo.shape[0])
    for s in range(0, lo.shape[0], chunk):
        inside = np.all((points[None, :, :] >= lo[s:s + chunk, None, :])
                        & (points[None, :, :] < hi[s:s + chunk, None, :]), axis=2)
        counts[s:s + chunk] = inside.sum(axis=1)
    return counts


def extreme_l2_mc(P: PointSet, samples: int = 100_000, seed: int = 0):
    """Monte Carlo estimate of the SQUARED extreme L2 discrepancy.

    Draw u, v uniform in [0,1)^d and set x = min(u, v), y = max(u, v)
    coordinatewise.  (x, y) then has density 2^d on {x <= y}, so
    ``2^-d * mean(Delta([x, y))^2)`` is unbiased for the integral.
    Returns ``(estimate, standard_error)``.
    """
    if samples < 1000:
        raise ValueError("extreme_l2_mc needs at least 1000 samples")
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random((samples, P.dim))
    v = rng.random((samples, P.dim))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    vol = np.prod(hi - lo, axis=1)
    if P.n:
        chunk = max(1, 2_000_000 // max(P.n * P.dim, 1))
        frac = _counts_in(P.points, lo, hi, chunk) / P.n
    else:
        frac = 0.0
    return _mc_stats((frac - vol) ** 2, 2.0 ** -P.dim)


def star_l2_mc(P: PointSet, samples: int = 100_000, seed: int = 0):
    """Monte Carlo estimate of the SQUARED star L2 discrepancy, ``(estimate, se)``."""
    if samples < 1000:
        raise ValueError("star_l2_mc needs at least 1000 samples")
    rng = np.random.Generator(np.random.Philox(seed))
    t = rng.random((samples, P.dim))
    vol = np.prod(t, axis=1)
    if P.n:
        chunk = max(1, 2_000_000 // max(P.n * P.dim, 1))
        frac = _counts_in(P.points, np.zeros_like(t), t, chunk) / P.n
    else:
        frac = 0.0
    return _mc_stats((frac - vol) ** 2, 1.0)
