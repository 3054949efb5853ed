"""Curse-of-dimensionality bounds, empirical inverse search and Roth-type tables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import bmo, discrepancy
from .discrepancy import Measure
from .pointset import PointSet, gen_corner, gen_hammersley, gen_random

__all__ = [
    "InverseBoundReport",
    "InverseSearchResult",
    "curse_lower_bound_bmo",
    "curse_lower_bound_extreme",
    "curse_table",
    "empirical_inverse",
    "inverse_search",
    "inverse_report",
    "roth_shape",
    "roth_curve",
    "initial_value",
    "TRACTABILITY_NOTES",
    "SEARCH_FAMILIES",
]

SEARCH_FAMILIES = ("hammersley", "random", "corner")

TRACTABILITY_NOTES = {
    "initial": "initial discrepancy = discrepancy of the empty point set; used as normaliser",
    "inverse": "N(eps, d) = least N for which some N-point set has discrepancy "
               "<= eps * initial discrepancy",
    "curse": "curse of dimensionality: N(eps, d) >= C (1 + tau)^d for all small eps "
             "and infinitely many d",
    "polynomial": "polynomial tractability: N(eps, d) <= C d^tau eps^-sigma for all eps, d",
    "weak": "weak tractability: log N(eps, d) / (d + 1/eps) -> 0 as d + 1/eps -> infinity",
}


def _check_eps_dim(epsilon, d):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")


def curse_lower_bound_bmo(epsilon: float, d: int) -> float:
    """(4/3)^d (1 - eps^2), lower bound on the inverse of the BMO discrepancy."""
    _check_eps_dim(epsilon, d)
    return math.exp(d * math.log(4.0 / 3.0)) * (1.0 - epsilon * epsilon)


def curse_lower_bound_extreme(epsilon: float, d: int) -> float:
    """(9/4)^d (1 - eps^2), lower bound on the inverse of the extreme L2 discrepancy."""
    _check_eps_dim(epsilon, d)
    return math.exp(d * math.log(9.0 / 4.0)) * (1.0 - epsilon * epsilon)


def curse_table(epsilon: float, dmax: int, dmin: int = 1) -> list[dict]:
    rows = []
    for d in range(dmin, dmax + 1):
        b = curse_lower_bound_bmo(epsilon, d)
        e = curse_lower_bound_extreme(epsilon, d)
        rows.append({"dim": d, "epsilon": epsilon, "bmo_lower": b, "extreme_lower": e,
                     "bmo_lower_ceil": math.ceil(b), "extreme_lower_ceil": math.ceil(e)})
    return rows


def initial_value(measure: Measure, d: int) -> float:
    measure = Measure(measure)
    if measure is Measure.STAR_L2:
        return discrepancy.star_initial(d)
    if measure is Measure.EXTREME_L2:
        return discrepancy.extreme_initial(d)
    return bmo.bmo_initial(d)


@dataclass
class InverseSearchResult:
    n: int | None
    value: float | None
    threshold: float
    heuristic: bool
    tested: dict[int, float] = field(default_factory=dict)


def _candidates(family, n, d, restarts, seed):
    sets = []
    if family == "hammersley":
        sets.append(gen_hammersley(n, d))
    elif family == "corner":
        return [gen_corner(n, d)]
    elif family != "random":
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(SEARCH_FAMILIES)}")
    n_random = restarts if family == "hammersley" else max(restarts, 1)
    for r in range(n_random):
        sub = int(np.random.SeedSequence([seed, n, r]).generate_state(1, np.uint64)[0])
        sets.append(gen_random(n, d, sub))
    return sets


def _evaluate(measure, P: PointSet, J, L) -> float:
    if measure is Measure.STAR_L2:
        return discrepancy.star_l2(P).value
    if measure is Measure.EXTREME_L2:
        return discrepancy.extreme_l2(P).value
    return bmo.bmo_discrepancy(P, J, L).value


def inverse_search(epsilon: float, d: int, measure: Measure | str, family: str = "hammersley",
                   n_max: int = 4096, restarts: int = 8, seed: int = 0,
                   J: int = 10, L: int | None = None) -> InverseSearchResult:
    """Doubling then bisection over N for the least tested N that reaches eps * initial.

    Each N is scored by the best of the family's sets (Hammersley plus
    ``restarts`` seeded random sets, or ``restarts`` random sets).  For star
    and extreme L2 the answer is an upper bound on the true inverse.  BMO
    values are only lower bounds, so a BMO answer is flagged heuristic.
    """
    _check_eps_dim(epsilon, d)
    measure = Measure(measure)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if L is None:
        L = min(bmo.default_search_level(d), J)
    threshold = epsilon * initial_value(measure, d)
    tested: dict[int, float] = {}

    def feasible(n):
        if n not in tested:
            tested[n] = min(_evaluate(measure, P, J, L)
                            for P in _candidates(family, n, d, restarts, seed))
        return tested[n] <= threshold

    lo, hi, n = 0, None, 1
    while True:
        if feasible(n):
            hi = n
            break
        lo = n
        if n >= n_max:
            break
        n = min(2 * n, n_max)
    if hi is not None:
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if feasible(mid):
                hi = mid
            else:
                lo = mid
    return InverseSearchResult(hi, tested.get(hi) if hi else None, threshold,
                               measure is Measure.BMO_LOWER, dict(sorted(tested.items())))


def empirical_inverse(epsilon: float, d: int, measure: Measure | str, family: str = "hammersley",
                      n_max: int = 4096, restarts: int = 8, seed: int = 0,
                      **kwargs) -> int | None:
    """Smallest tested N meeting eps * initial, or None if n_max is not enough."""
    return inverse_search(epsilon, d, measure, family, n_max, restarts, seed, **kwargs).n


@dataclass
class InverseBoundReport:
    epsilon: float
    dim: int
    bmo_lower: float
    extreme_lower: float
    empirical_upper: int | None
    family: str
    measure: str
    heuristic: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def inverse_report(epsilon: float, d: int, measure: Measure | str = Measure.EXTREME_L2,
                   family: str = "hammersley", n_max: int = 4096, restarts: int = 8,
                   seed: int = 0, **kwargs) -> InverseBoundReport:
    measure = Measure(measure)
    res = inverse_search(epsilon, d, measure, family, n_max, restarts, seed, **kwargs)
    notes = [TRACTABILITY_NOTES["inverse"], TRACTABILITY_NOTES["curse"]]
    if res.heuristic:
        notes.append("heuristic: BMO values are lower bounds, so reaching the threshold "
                     "is not certified")
    if res.n is None:
        notes.append(f"no tested N <= {n_max} reached the threshold")
    return InverseBoundReport(epsilon, d, curse_lower_bound_bmo(epsilon, d),
                              curse_lower_bound_extreme(epsilon, d), res.n, family,
                              measure.value, res.heuristic, notes)


def roth_shape(d: int, n: int) -> float:
    """(1 + log N)^((d-1)/2) / N."""
    if n < 1:
        raise ValueError("N must be >= 1")
    return (1.0 + math.log(n)) ** ((d - 1) / 2) / n


def roth_curve(d: int, n_list, family: str = "hammersley", restarts: int = 0, seed: int = 0,
               J: int = 10, L: int | None = None, with_bmo: bool = True) -> list[dict]:
    """Extreme L2 and BMO lower bound of the family's best set next to the Roth shape.

    ``ratio_extreme`` is value / shape; since the lower bound holds for every
    N-point set it is an empirical upper estimate of the constant.
    ``ratio_bmo`` uses a lower bound on the BMO value and is descriptive only.
    """
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if L is None:
        L = min(bmo.default_search_level(d), J)
    rows = []
    for n in n_list:
        sets = _candidates(family, int(n), d, restarts, seed)
        best = min(sets, key=lambda P: discrepancy.extreme_l2(P).squared)
        ext = discrepancy.extreme_l2(best).value
        shape = roth_shape(d, int(n))
        row = {"dim": d, "n": int(n), "extreme_l2": ext, "shape": shape,
               "ratio_extreme": ext / shape}
        if with_bmo:
            b = bmo.bmo_discrepancy(best, J, L).value
            row.update({"bmo_lower": b, "ratio_bmo": b / shape})
        rows.append(row)
    return rows
