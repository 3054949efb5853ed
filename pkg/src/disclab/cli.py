"""``disclab`` command line: gen, disc, verify, report, haar-dump.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, asdict

import numpy as np

from . import bmo, bounds, discrepancy, haar, oracle
from .pointset import (FAMILIES, PointSet, PointSetError, dump_pointset, generate,
                       load_pointset, pointset_to_json)

SCHEMA_VERSION = 1
DEFAULT_J = 16
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_MEASURES = {"star-l2": discrepancy.Measure.STAR_L2,
             "extreme-l2": discrepancy.Measure.EXTREME_L2,
             "bmo": discrepancy.Measure.BMO_LOWER}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    measure: str | None = None
    J: int = DEFAULT_J
    L: int | None = None
    epsilon: float | None = None
    dim: int | None = None
    n: int | None = None
    seed: int = 0
    format: str = "json"
    threads: int = 1

    def validate(self):
        if self.J is not None and not 0 <= self.J <= haar.MAX_LEVEL:
            raise UsageError(f"--haar-order must lie in [0, {haar.MAX_LEVEL}]")
        if self.L is not None and self.L < 0:
            raise UsageError("--search-level must be >= 0")
        if self.dim is not None and self.dim < 1:
            raise UsageError("--dim must be >= 1")
        if self.n is not None and self.n < 0:
            raise UsageError("--n must be >= 0")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise UsageError("--eps must lie in (0, 1)")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        return self


def _schema(kind):
    return f"disclab.{kind}.v{SCHEMA_VERSION}"


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(kind, payload, rows_key, fmt):
    """Render a payload as JSON, CSV (of ``payload[rows_key]`` or the flat record) or text."""
    if fmt == "json":
        return json.dumps({"schema": _schema(kind), **payload}, indent=2) + "\n"
    rows = payload[rows_key] if rows_key else [_flatten(payload)]
    if fmt == "csv":
        buf = io.StringIO()
        fields = list(rows[0]) if rows else []
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    lines = [f"[{_schema(kind)}]"]
    for row in rows:
        lines.append("  ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
    return "\n".join(lines) + "\n"


def _flatten(obj, prefix=""):
    out = {}
    for k, v in obj.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        elif isinstance(v, list):
            out[prefix + k] = json.dumps(v)
        else:
            out[prefix + k] = v
    return out


def _fmt(v):
    return f"{v:.12g}" if isinstance(v, float) else str(v)


def _load_input(path, dim) -> PointSet:
    if path is None:
        if dim is None:
            raise UsageError("give --input FILE, or --dim d for the empty point set")
        return load_pointset("", dim_hint=dim, label="empty")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return load_pointset(text, dim_hint=dim, label=os.path.basename(path))


def _order(cfg):
    return DEFAULT_J if cfg.J is None else cfg.J


def _search_level(cfg, d):
    L = cfg.L if cfg.L is not None else bmo.default_search_level(d)
    return min(L, _order(cfg))


# --------------------------------------------------------------------------- gen

def cmd_gen(cfg: RunConfig, family: str) -> int:
    P = generate(family, cfg.n, cfg.dim, cfg.seed)
    if cfg.format == "json":
        text = json.dumps({"schema": _schema("pointset"), **pointset_to_json(P)}) + "\n"
    else:
        text = dump_pointset(P)
    _write(text, cfg.output)
    return EXIT_OK


# -------------------------------------------------------------------------- disc

def cmd_disc(cfg: RunConfig, method: str) -> int:
    P = _load_input(cfg.input, cfg.dim)
    measure = _MEASURES[cfg.measure]
    if measure is discrepancy.Measure.BMO_LOWER:
        est = bmo.bmo_discrepancy(P, _order(cfg), _search_level(cfg, P.dim),
                                  threads=cfg.threads)
        payload = {"measure": measure.value, "dim": P.dim, "n": P.n, **est.to_dict()}
        _write(_render("bmo", payload, None, cfg.format), cfg.output)
        return EXIT_OK
    if method == "haar" or cfg.J is not None:
        fn = (discrepancy.star_l2_haar if measure is discrepancy.Measure.STAR_L2
              else discrepancy.extreme_l2_haar)
        res = fn(P, _order(cfg), threads=cfg.threads)
    else:
        fn = (discrepancy.star_l2 if measure is discrepancy.Measure.STAR_L2
              else discrepancy.extreme_l2)
        res = fn(P)
    payload = {"dim": P.dim, "n": P.n, **res.to_dict()}
    _write(_render("discrepancy", payload, None, cfg.format), cfg.output)
    return EXIT_OK


# ------------------------------------------------------------------------ verify

@dataclass
class Check:
    name: str
    status: str  # PASS, FAIL, SKIPPED
    detail: str


MC_SAMPLES = 100_000
MC_SIGMAS = 4.0
_MC_WORK = 2 * 10 ** 8


def run_checks(P: PointSet, J: int, L: int, mc_samples: int = MC_SAMPLES,
               seed: int = 0, threads: int = 1) -> list[Check]:
    """Invariant suite on one point set.  Evaluators are looked up on their
    modules at call time so the suite checks whatever is installed there."""
    checks = []
    d = P.dim

    def add(name, ok, detail):
        checks.append(Check(name, "PASS" if ok else "FAIL", detail))

    star = discrepancy.star_l2(P)
    ext = discrepancy.extreme_l2(P)
    add("initial_values",
        bmo.bmo_initial(d) == discrepancy.extreme_initial(d) == 12.0 ** (-d / 2),
        f"bmo={bmo.bmo_initial(d)!r} extreme={discrepancy.extreme_initial(d)!r}")
    add("domination", star.squared >= ext.squared * (1 - 1e-12),
        f"star^2={star.squared:.17g} extreme^2={ext.squared:.17g}")

    ext_h = discrepancy.extreme_l2_haar(P, J, threads=threads)
    gap = abs(ext.squared - ext_h.squared)
    add("lemma2", gap <= ext_h.tail_bound,
        f"|closed-haar|={gap:.3g} tail_bound={ext_h.tail_bound:.3g} J={J}")
    star_h = discrepancy.star_l2_haar(P, J, threads=threads)
    gap = abs(star.squared - star_h.squared)
    add("parseval", gap <= star_h.tail_bound,
        f"|closed-haar|={gap:.3g} tail_bound={star_h.tail_bound:.3g} J={J}")

    try:
        est = bmo.bmo_discrepancy(P, J, L, threads=threads)
        add("lemma3", est.value >= ext_h.value,
            f"bmo={est.value:.17g} extreme_haar={ext_h.value:.17g} L={L}")
    except bmo.BmoSearchTooLarge as exc:
        checks.append(Check("lemma3", "SKIPPED", str(exc)))

    if d == 1:
        diffs = [abs(star.value - oracle.star_l2_exact_1d(P)),
                 abs(ext.value - oracle.extreme_l2_exact_1d(P))]
        add("oracle_1d", max(diffs) <= 1e-12, f"max |closed-exact|={max(diffs):.3g}")
    else:
        checks.append(Check("oracle_1d", "SKIPPED", f"d={d} != 1"))

    if d in (2, 3) and P.n * mc_samples * d <= _MC_WORK:
        worst = 0.0
        for name, closed, mc in (("star", star, oracle.star_l2_mc),
                                 ("extreme", ext, oracle.extreme_l2_mc)):
            est_sq, se = mc(P, mc_samples, seed)
            worst = max(worst, abs(closed.squared - est_sq) / se if se > 0 else 0.0)
        add("oracle_mc", worst <= MC_SIGMAS,
            f"worst deviation {worst:.2f} standard errors (limit {MC_SIGMAS})")
    else:
        checks.append(Check("oracle_mc", "SKIPPED",
                            f"needs d in {{2,3}} and N*samples*d <= {_MC_WORK}"))

    max_d, max_n, max_order = oracle.HAAR_GUARD
    if d <= max_d and P.n <= max_n:
        rng = np.random.Generator(np.random.Philox(seed))
        worst = 0.0
        for _ in range(25):
            k = int(rng.integers(0, min(J, max_order) + 1))
            levels = haar.levels_of_order(d, k, star=True)
            lev = levels[int(rng.integers(0, levels.shape[0]))]
            pos = [0 if j < 0 else int(rng.integers(0, 1 << j)) for j in lev]
            if P.n and rng.random() < 0.7:
                # bias towards occupied boxes
                x = P.points[int(rng.integers(0, P.n))]
                pos = [0 if j < 0 else int(np.floor(xi * 2.0 ** j)) for xi, j in zip(x, lev)]
            idx = haar.DyadicIndex(lev, pos)
            diff = abs(haar.haar_coefficient(P, idx).value
                       - oracle.exact_haar_coefficient(P, lev, pos))
            worst = max(worst, diff)
        add("oracle_haar", worst <= 1e-12, f"max |engine-oracle|={worst:.3g} over 25 indices")
    else:
        checks.append(Check("oracle_haar", "SKIPPED",
                            f"needs d<={max_d} and N<={max_n}"))
    return checks


def cmd_verify(cfg: RunConfig, mc_samples: int) -> int:
    P = _load_input(cfg.input, cfg.dim)
    checks = run_checks(P, cfg.J, _search_level(cfg, P.dim), mc_samples, cfg.seed,
                        cfg.threads)
    failed = [c.name for c in checks if c.status == "FAIL"]
    payload = {"dim": P.dim, "n": P.n, "passed": not failed, "failed": failed,
               "checks": [asdict(c) for c in checks]}
    if cfg.format == "json":
        text = _render("verify", payload, None, "json")
    else:
        text = _render("verify", payload, "checks", cfg.format)
    _write(text, cfg.output)
    for name in failed:
        print(f"verify: check {name} FAILED", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# ------------------------------------------------------------------------ report

def cmd_report(cfg: RunConfig, args) -> int:
    kind = args.kind
    if kind == "curse":
        rows = bounds.curse_table(cfg.epsilon, args.dmax, args.dmin)
        payload = {"epsilon": cfg.epsilon, "notes": bounds.TRACTABILITY_NOTES, "rows": rows}
        _write(_render("curse", payload, "rows", cfg.format), cfg.output)
    elif kind == "roth":
        n_list = [int(v) for v in args.nlist.split(",") if v.strip()]
        if not n_list or min(n_list) < 1:
            raise UsageError("--nlist needs positive integers, e.g. 4,16,64")
        L = _search_level(cfg, cfg.dim)
        rows = bounds.roth_curve(cfg.dim, n_list, args.family, args.restarts, cfg.seed,
                                 cfg.J, L, with_bmo=not args.no_bmo)
        payload = {"dim": cfg.dim, "family": args.family, "truncation_order": cfg.J,
                   "search_level": L, "rows": rows}
        _write(_render("roth", payload, "rows", cfg.format), cfg.output)
    else:
        measure = _MEASURES[cfg.measure]
        rep = bounds.inverse_report(cfg.epsilon, cfg.dim, measure, args.family, args.n_max,
                                    args.restarts, cfg.seed, J=cfg.J,
                                    L=_search_level(cfg, cfg.dim))
        payload = rep.to_dict()
        if cfg.format == "json":
            _write(_render("inverse", payload, None, "json"), cfg.output)
        else:
            _write(_render("inverse", {"rows": [_flatten(payload)]}, "rows", cfg.format),
                   cfg.output)
    return EXIT_OK


# --------------------------------------------------------------------- haar-dump

MAX_DUMP_ROWS = 1_000_000


def _num(v):
    return repr(float(v) + 0.0)  # + 0.0 folds -0.0


def cmd_haar_dump(cfg: RunConfig, star: bool, occupied_only: bool) -> int:
    P = _load_input(cfg.input, cfg.dim)
    if not occupied_only:
        rows = sum(haar.level_count(P.dim, k, star) * 2 ** k for k in range(cfg.J + 1))
        if rows > MAX_DUMP_ROWS:
            raise UsageError(f"{rows} coefficients exceed {MAX_DUMP_ROWS}; lower --haar-order "
                             "or pass --occupied-only")
    energy = haar.haar_energy(P, cfg.J, star=star, threads=cfg.threads)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["levels", "positions", "counting_part", "volume_part", "value"])
    for c in haar.iter_coefficients(P, cfg.J, star=star, occupied_only=occupied_only):
        writer.writerow([" ".join(map(str, c.index.levels)),
                         " ".join(map(str, c.index.positions)),
                         _num(c.counting_part), _num(c.volume_part), _num(c.value)])
    writer.writerow(["# tail_bound", f"J={cfg.J}", "star" if star else "extreme",
                     f"squared={energy.squared!r}", repr(energy.tail_bound)])
    _write(buf.getvalue(), cfg.output)
    return EXIT_OK


# ------------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="disclab", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: $DISCLAB_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    def io_opts(sp, fmt_choices=("json", "csv", "pretty"), default="json"):
        sp.add_argument("-o", "--output", default=None)
        sp.add_argument("--format", choices=fmt_choices, default=default)

    def input_opts(sp, default_J=DEFAULT_J):
        sp.add_argument("--input", "-i", default=None, help="point file (omit for empty set)")
        sp.add_argument("--dim", type=int, default=None)
        sp.add_argument("--haar-order", "-J", dest="J", type=int, default=default_J)
        sp.add_argument("--search-level", "-L", dest="L", type=int, default=None)

    g = sub.add_parser("gen", help="generate a point set")
    g.add_argument("--family", choices=FAMILIES, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    io_opts(g, ("text", "json"), "text")

    d = sub.add_parser("disc", help="evaluate a discrepancy")
    d.add_argument("--measure", choices=sorted(_MEASURES), required=True)
    d.add_argument("--method", choices=("closed", "haar"), default="closed",
                   help="star/extreme: closed form (default) or truncated Haar series; "
                        "giving --haar-order implies haar")
    input_opts(d, default_J=None)
    io_opts(d)

    v = sub.add_parser("verify", help="run the invariant checks on a point set")
    input_opts(v)
    v.add_argument("--mc-samples", type=int, default=MC_SAMPLES)
    v.add_argument("--seed", type=int, default=0)
    io_opts(v)

    r = sub.add_parser("report", help="bounds, Roth-type and inverse tables")
    r.add_argument("kind", choices=("curse", "roth", "inverse"))
    r.add_argument("--eps", type=float, default=None)
    r.add_argument("--dim", type=int, default=None)
    r.add_argument("--dmin", type=int, default=1)
    r.add_argument("--dmax", type=int, default=20)
    r.add_argument("--nlist", default="4,16,64")
    r.add_argument("--measure", choices=sorted(_MEASURES), default="extreme-l2")
    r.add_argument("--family", choices=bounds.SEARCH_FAMILIES, default="hammersley")
    r.add_argument("--n-max", type=int, default=4096)
    r.add_argument("--restarts", type=int, default=8)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--no-bmo", action="store_true", help="roth: skip the BMO column")
    r.add_argument("--haar-order", "-J", dest="J", type=int, default=10)
    r.add_argument("--search-level", "-L", dest="L", type=int, default=None)
    io_opts(r, default="csv")

    h = sub.add_parser("haar-dump", help="CSV of Haar coefficients with |j| <= J")
    input_opts(h)
    h.add_argument("--star", action="store_true", help="include level -1 coordinates")
    h.add_argument("--occupied-only", action="store_true")
    h.add_argument("-o", "--output", default=None)
    return p


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("DISCLAB_THREADS")
    try:
        return int(env) if env else 1
    except ValueError:
        raise UsageError(f"DISCLAB_THREADS={env!r} is not an integer") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = RunConfig(command=args.command,
                        input=getattr(args, "input", None),
                        output=getattr(args, "output", None),
                        measure=getattr(args, "measure", None),
                        J=getattr(args, "J", DEFAULT_J),
                        L=getattr(args, "L", None),
                        epsilon=getattr(args, "eps", None),
                        dim=getattr(args, "dim", None),
                        n=getattr(args, "n", None),
                        seed=getattr(args, "seed", 0),
                        format=getattr(args, "format", "csv"),
                        threads=_threads(args)).validate()
        if args.command == "gen":
            return cmd_gen(cfg, args.family)
        if args.command == "disc":
            return cmd_disc(cfg, args.method)
        if args.command == "verify":
            return cmd_verify(cfg, args.mc_samples)
        if args.command == "haar-dump":
            return cmd_haar_dump(cfg, args.star, args.occupied_only)
        if args.command == "report":
            if args.kind in ("curse", "inverse") and cfg.epsilon is None:
                raise UsageError(f"report {args.kind} needs --eps")
            if args.kind in ("roth", "inverse") and cfg.dim is None:
                raise UsageError(f"report {args.kind} needs --dim")
            return cmd_report(cfg, args)
    except (UsageError, PointSetError, bmo.BmoSearchTooLarge, ValueError) as exc:
        print(f"disclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
