"""Star and extreme L2 discrepancy: O(d N^2) closed forms and Haar series."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, asdict

import numpy as np

from . import haar
from .pointset import PointSet

__all__ = [
    "Measure",
    "Method",
    "DiscrepancyResult",
    "star_initial",
    "extreme_initial",
    "star_l2",
    "extreme_l2",
    "star_l2_haar",
    "extreme_l2_haar",
]

_ROW_BLOCK_ELEMS = 1 << 22


class Measure(str, enum.Enum):
    STAR_L2 = "STAR_L2"
    EXTREME_L2 = "EXTREME_L2"
    BMO_LOWER = "BMO_LOWER"


class Method(str, enum.Enum):
    CLOSED_FORM = "CLOSED_FORM"
    HAAR_TRUNCATED = "HAAR_TRUNCATED"


@dataclass(frozen=True)
class DiscrepancyResult:
    """A discrepancy value; for Haar results ``squared`` is a lower bound and
    ``squared + tail_bound`` an upper bound on the true squared value."""

    measure: Measure
    value: float
    squared: float
    method: Method
    truncation_order: int | None = None
    tail_bound: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["measure"] = self.measure.value
        out["method"] = self.method.value
        return out


def star_initial(d: int) -> float:
    """Star L2 discrepancy of the empty set, 3^(-d/2)."""
    return 3.0 ** (-d / 2)


def extreme_initial(d: int) -> float:
    """Extreme L2 discrepancy of the empty set, 12^(-d/2)."""
    return 12.0 ** (-d / 2)


def _pair_sum(points: np.ndarray, kernel) -> float:
    """sum_{n,n'} prod_i kernel(x_ni, x_n'i) for a symmetric kernel.

    Only the upper triangle is formed, in row blocks; off-diagonal entries are
    doubled.
    """
    n, d = points.shape
    rows = max(1, _ROW_BLOCK_ELEMS // max(1, n * d))
    parts = []
    for s in range(0, n, rows):
        a = points[s:s + rows, None, :]
        b = points[None, s:, :]
        k = np.prod(kernel(a, b), axis=2)
        diag = np.trace(k)
        upper = np.triu(k, 1)
        parts.append(float(diag))
        parts.append(2.0 * float(upper.sum()))
    return math.fsum(parts)


def _star_kernel(a, b):
    return 1.0 - np.maximum(a, b)


def _extreme_kernel(a, b):
    return np.minimum(a, b) * (1.0 - np.maximum(a, b))


def star_l2(P: PointSet) -> DiscrepancyResult:
    """Warnock's formula:

    3^-d - (2/N) sum_n prod_i (1 - x_ni^2)/2 + (1/N^2) sum_{n,n'} prod_i (1 - max(x_ni, x_n'i))
    """
    d = P.dim
    if P.n == 0:
        return DiscrepancyResult(Measure.STAR_L2, star_initial(d), 3.0 ** -d,
                                 Method.CLOSED_FORM)
    x = P.points
    single = math.fsum(np.prod((1.0 - x * x) / 2.0, axis=1))
    pair = _pair_sum(x, _star_kernel)
    sq = max(math.fsum([3.0 ** -d, -2.0 * single / P.n, pair / (P.n * P.n)]), 0.0)
    return DiscrepancyResult(Measure.STAR_L2, math.sqrt(sq), sq, Method.CLOSED_FORM)


def extreme_l2(P: PointSet) -> DiscrepancyResult:
    """Extreme (unanchored) L2 discrepancy in closed form:

    12^-d - (2/N) sum_n prod_i x_ni (1 - x_ni)/2
          + (1/N^2) sum_{n,n'} prod_i min(x_ni, x_n'i) (1 - max(x_ni, x_n'i))
    """
    d = P.dim
    if P.n == 0:
        return DiscrepancyResult(Measure.EXTREME_L2, extreme_initial(d), 12.0 ** -d,
                                 Method.CLOSED_FORM)
    x = P.points
    single = math.fsum(np.prod(x * (1.0 - x) / 2.0, axis=1))
    pair = _pair_sum(x, _extreme_kernel)
    sq = max(math.fsum([12.0 ** -d, -2.0 * single / P.n, pair / (P.n * P.n)]), 0.0)
    return DiscrepancyResult(Measure.EXTREME_L2, math.sqrt(sq), sq, Method.CLOSED_FORM)


def _from_energy(measure, energy: haar.HaarEnergy) -> DiscrepancyResult:
    return DiscrepancyResult(measure, math.sqrt(energy.squared), energy.squared,
                             Method.HAAR_TRUNCATED, energy.truncation_order,
                             energy.tail_bound)


def extreme_l2_haar(P: PointSet, J: int, threads: int | None = None) -> DiscrepancyResult:
    """Squared extreme L2 discrepancy as sum_{j in N_0^d, |j| <= J} 2^|j| sum_m coeff^2."""
    return _from_energy(Measure.EXTREME_L2, haar.haar_energy(P, J, star=False, threads=threads))


def star_l2_haar(P: PointSet, J: int, threads: int | None = None) -> DiscrepancyResult:
    """Same series over j in N_{-1}^d, i.e. with the level -1 terms added."""
    return _from_energy(Measure.STAR_L2, haar.haar_energy(P, J, star=True, threads=threads))
