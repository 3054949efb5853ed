"""Extreme L2 and BMO lower bound of Hammersley sets against (1 + log N)^((d-1)/2) / N.

The ratio columns are empirical upper estimates of the constant in the
Roth-type lower bound; nothing is claimed about the constant itself.

    python3 scripts/roth_curve.py --dims 1 2 3 --kmax 10
"""
import argparse
import csv
import sys

from disclab.bounds import roth_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--kmax", type=int, default=9, help="N runs over 2^2 .. 2^kmax")
    ap.add_argument("--J", type=int, default=12)
    ap.add_argument("--no-bmo", action="store_true")
    args = ap.parse_args()
    rows = []
    for d in args.dims:
        rows += roth_curve(d, [2 ** k for k in range(2, args.kmax + 1)], J=args.J,
                           L=min(2, args.J), with_bmo=not args.no_bmo)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[-1]))
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
