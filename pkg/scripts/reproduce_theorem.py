"""Run the case analysis for every family in several characteristics and replay each trace.

    python3 scripts/reproduce_theorem.py [--modes generic 3 5 2] [--out traces/]
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from cliffcheck import enumerate_families, prove_no_subalgebra, verify_trace


def run_mode(mode: str, out: Path | None):
    t0 = time.perf_counter()
    rows = []
    for fam in enumerate_families(4):
        trace = prove_no_subalgebra(fam, mode)
        doc = trace.to_json()
        replay = verify_trace(doc)
        rows.append((fam.number, trace.verdict, trace.caveat, replay.ok, len(trace.leaves)))
        if out is not None:
            (out / f"family{fam.number:02d}_{mode}.json").write_text(json.dumps(doc))
    print(f"== characteristic {mode} ({time.perf_counter() - t0:.1f} s)")
    for number, verdict, caveat, ok, leaves in rows:
        note = f" caveat {caveat}" if caveat else ""
        print(f"  family {number:2d}: {verdict:13s} leaves {leaves:3d} replay {'ok' if ok else 'FAILED'}{note}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", nargs="+", default=["generic", "3", "5", "2"])
    ap.add_argument("--out", type=Path, help="directory for per-family trace JSON")
    args = ap.parse_args()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    for mode in args.modes:
        run_mode(mode, args.out)


if __name__ == "__main__":
    main()
