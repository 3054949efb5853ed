"""Lower bounds on the inverse of the BMO and extreme L2 discrepancy across d.

    python3 scripts/curse_table.py --eps 0.5 --dmax 20 > curse.csv
"""
import argparse
import csv
import sys

from disclab.bounds import curse_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.3, 0.5])
    ap.add_argument("--dmax", type=int, default=20)
    args = ap.parse_args()
    rows = [r for e in args.eps for r in curse_table(e, args.dmax)]
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
