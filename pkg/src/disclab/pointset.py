"""Point sets in the half-open unit cube, generators and text/JSON I/O."""
from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

__all__ = [
    "PointSet",
    "PointSetError",
    "PointSetFormatError",
    "PointSetDomainError",
    "PointSetAmbiguityError",
    "load_pointset",
    "dump_pointset",
    "pointset_to_json",
    "pointset_from_json",
    "empty",
    "from_points",
    "gen_random",
    "gen_hammersley",
    "gen_corner",
    "radical_inverse",
    "first_primes",
    "FAMILIES",
    "generate",
]

#: Bit generator behind :func:`gen_random`. Philox-4x64 is counter based, so a
#: given seed produces the same stream on every platform numpy supports.
RANDOM_BIT_GENERATOR = "numpy.random.Philox"


class PointSetError(ValueError):
    pass


class PointSetFormatError(PointSetError):
    pass


class PointSetDomainError(PointSetError):
    pass


class PointSetAmbiguityError(PointSetError):
    pass


@dataclass(frozen=True, eq=False)
class PointSet:
    """N points in [0,1)^d, stored as a read-only ``(N, d)`` float64 array.

    ``N == 0`` is allowed and stands for the empty set, whose discrepancy is
    the initial discrepancy.  Duplicate points are kept.
    """

    dim: int
    points: np.ndarray
    label: str | None = field(default=None)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise PointSetError(f"dim must be a positive integer, got {self.dim!r}")
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.size == 0:
            pts = pts.reshape(0, self.dim)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise PointSetError(
                f"points must have shape (N, {self.dim}), got {pts.shape}")
        bad = ~((pts >= 0.0) & (pts < 1.0))
        if bad.any():
            row, col = (int(v) for v in np.argwhere(bad)[0])
            raise PointSetDomainError(
                f"coordinate {pts[row, col]!r} at row {row + 1}, column {col + 1} "
                "is outside [0, 1)")
        pts.setflags(write=False)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (self.dim == other.dim
                and self.points.shape == other.points.shape
                and bool(np.array_equal(self.points, other.points)))

    def __repr__(self):
        tag = f", label={self.label!r}" if self.label else ""
        return f"PointSet(dim={self.dim}, n={self.n}{tag})"


_SPLIT = re.compile(r"[,\s]+")


def load_pointset(text: str | TextIO, dim_hint: int | None = None,
                  label: str | None = None) -> PointSet:
    """Parse one point per line, comma or whitespace separated.

    Blank lines and lines starting with ``#`` are skipped.  An input with no
    rows needs ``dim_hint`` to say which empty set it is.
    """
    if not isinstance(text, str):
        text = text.read()
    rows = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            values = [float(f) for f in fields]
        except ValueError as exc:
            raise PointSetFormatError(f"line {lineno}: {exc}") from None
        if rows and len(values) != len(rows[0]):
            raise PointSetFormatError(
                f"line {lineno}: expected {len(rows[0])} coordinates, got {len(values)}")
        rows.append(values)

    if not rows:
        if dim_hint is None:
            raise PointSetAmbiguityError(
                "empty point set input: pass dim_hint to fix the dimension")
        return empty(dim_hint, label=label)

    dim = len(rows[0])
    if dim_hint is not None and dim_hint != dim:
        raise PointSetFormatError(f"rows have {dim} coordinates but dim_hint={dim_hint}")
    return PointSet(dim, np.asarray(rows, dtype=np.float64), label)


def dump_pointset(P: PointSet) -> str:
    """Text format read back bit-exactly by :func:`load_pointset`."""
    lines = [f"# dim={P.dim} n={P.n}"]
    if P.label:
        lines.append(f"# {P.label}")
    lines.extend(",".join(repr(float(c)) for c in row) for row in P.points)
    return "\n".join(lines) + "\n"


def pointset_to_json(P: PointSet) -> dict:
    return {"dim": P.dim, "n": P.n, "points": P.points.tolist()}


def pointset_from_json(obj: dict | str) -> PointSet:
    if isinstance(obj, str):
        obj = json.loads(obj)
    pts = np.asarray(obj["points"], dtype=np.float64).reshape(-1, obj["dim"])
    if "n" in obj and obj["n"] != pts.shape[0]:
        raise PointSetFormatError(f"n={obj['n']} but {pts.shape[0]} points given")
    return PointSet(obj["dim"], pts)


def empty(dim: int, label: str | None = None) -> PointSet:
    return PointSet(dim, np.zeros((0, dim)), label)


def _check_counts(n, dim, min_n=0):
    if int(n) != n or n < min_n:
        raise PointSetError(f"n must be an integer >= {min_n}, got {n!r}")
    if int(dim) != dim or dim < 1:
        raise PointSetError(f"dim must be a positive integer, got {dim!r}")


def gen_random(n: int, dim: int, seed: int) -> PointSet:
    """i.i.d. uniform points from a seeded Philox generator."""
    _check_counts(n, dim)
    rng = np.random.Generator(np.random.Philox(seed))
    return PointSet(dim, rng.random((int(n), int(dim))), f"random(seed={seed})")


def first_primes(k: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < k:
        if all(cand % p for p in primes if p * p <= cand):
            primes.append(cand)
        cand += 1
    return primes


def radical_inverse(i: int, base: int) -> float:
    """Digit reversal of ``i`` in ``base`` about the radix point, correctly rounded."""
    num, den = 0, 1
    while i:
        i, r = divmod(i, base)
        num = num * base + r
        den *= base
    return num / den


def gen_hammersley(n: int, dim: int) -> PointSet:
    """Point i is (i/n, phi_2(i), phi_3(i), ...) with phi_b the radical inverse."""
    _check_counts(n, dim, min_n=1)
    n, dim = int(n), int(dim)
    pts = np.empty((n, dim))
    pts[:, 0] = np.arange(n) / n
    for k, b in enumerate(first_primes(dim - 1), start=1):
        pts[:, k] = [radical_inverse(i, b) for i in range(n)]
    return PointSet(dim, pts, "hammersley")


def gen_corner(n: int, dim: int) -> PointSet:
    """``n`` copies of the origin."""
    _check_counts(n, dim)
    return PointSet(dim, np.zeros((int(n), int(dim))), "corner")


FAMILIES = ("random", "hammersley", "corner")


def generate(family: str, n: int, dim: int, seed: int = 0) -> PointSet:
    if family == "random":
        return gen_random(n, dim, seed)
    if family == "hammersley":
        return gen_hammersley(n, dim)
    if family == "corner":
        return gen_corner(n, dim)
    raise PointSetError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def from_points(points: Iterable[Iterable[float]], dim: int | None = None,
                label: str | None = None) -> PointSet:
    """Build a PointSet from nested sequences; ``dim`` is needed only when empty."""
    rows = [list(p) for p in points]
    if not rows:
        if dim is None:
            raise PointSetAmbiguityError("no points and no dim given")
        return empty(dim, label)
    return PointSet(dim or len(rows[0]), np.asarray(rows, dtype=np.float64), label)
