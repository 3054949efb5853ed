"""Run the invariant checks on a batch of random and Hammersley sets and tally them.

    python3 scripts/invariant_checks.py --count 20 --dmax 3 --nmax 64
"""
import argparse
import collections

import numpy as np

from disclab import bmo
from disclab.cli import run_checks
from disclab.pointset import gen_hammersley, gen_random


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--dmax", type=int, default=3)
    ap.add_argument("--nmax", type=int, default=64)
    ap.add_argument("--J", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    tally = collections.defaultdict(collections.Counter)
    failures = []
    for i in range(args.count):
        d = int(rng.integers(1, args.dmax + 1))
        n = int(rng.integers(1, args.nmax + 1))
        P = gen_random(n, d, args.seed + i) if i % 2 else gen_hammersley(n, d)
        L = min(bmo.default_search_level(d), 3)
        for c in run_checks(P, args.J, L, seed=i):
            tally[c.name][c.status] += 1
            if c.status == "FAIL":
                failures.append((P, c))
    for name, counts in tally.items():
        print(f"{name:15s} " + "  ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    for P, c in failures:
        print(f"FAIL {c.name} on {P!r}: {c.detail}")


if __name__ == "__main__":
    main()
