"""Exhaustive scan of all hyperplanes of g(4, F_p) for closure.

    python3 scripts/run_scan.py --primes 2 3 --jobs 4
"""

from __future__ import annotations

import argparse
from collections import Counter

from cliffcheck.scan import functional_count, scan


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--primes", nargs="+", type=int, default=[2, 3])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--long-run", action="store_true")
    args = ap.parse_args()
    for p in args.primes:
        rep = scan(p, jobs=args.jobs, long_run=args.long_run, progress=True)
        assert rep.examined == functional_count(p)
        print(f"p={p}: {rep.examined} hyperplanes, {len(rep.closed)} closed, {rep.seconds:.1f} s")
        # the last nonzero coordinate of the functional is the free column of its canonical basis
        by_family = Counter(16 - phi.trailing for phi in rep.closed)
        for fam, count in sorted(by_family.items()):
            print(f"  family {fam}: {count}")


if __name__ == "__main__":
    main()
