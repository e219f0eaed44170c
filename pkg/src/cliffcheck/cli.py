"""Command-line entry point: ``cliffcheck <command> [flags]``.

Exit codes: 0 success/verdict holds, 1 check found the subspace not closed or a
verdict other than NoSubalgebra, 2 table mismatches, 64 usage error, 65 infeasible scan.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .bases import CanonicalBasisFamily, enumerate_families, families_json, family_by_number, field_instance, render_family
from .blades import Signature, parse_multivector
from .closure import NO_SUBALGEBRA, SOLUTION, CharMode, ProofTrace, prove_no_subalgebra
from .scalars import Parameter, PrimeField, is_prime
from .scan import InfeasibleScan, check_subspace, functional_count, scan
from .tables import FORMATS, MalformedReference, ReferenceTable, UnsupportedFormat, generate_table, verify_against_reference

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_DIFF = 2
EXIT_USAGE = 64
EXIT_INFEASIBLE = 65

TRACE_DIR_ENV = "CLIFFCHECK_TRACE_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    n: int = 4
    signature: Optional[Signature] = None
    prime: Optional[int] = None
    char_mode: CharMode = CharMode()
    jobs: int = 1
    output: Optional[str] = None
    fmt: str = "text"

    def validate(self):
        if not 1 <= self.n <= 8:
            raise UsageError("--n must be in 1..8")
        if self.signature is not None and self.signature.n != self.n:
            raise UsageError(f"--signature has {self.signature.n} entries, expected {self.n}")
        if self.prime is not None and not is_prime(self.prime):
            raise UsageError(f"--prime {self.prime} is not prime")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        if self.fmt not in FORMATS:
            raise UsageError(f"--format must be one of {', '.join(FORMATS)}")


def _signature(text: str) -> Signature:
    try:
        return Signature.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _char(text: str) -> CharMode:
    try:
        return CharMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--char expects 'generic' or a prime: {exc}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=4, help="number of generators (default 4)")
    common.add_argument("--signature", type=_signature, default=None,
                        help="comma-separated generator squares, e.g. -1,-1,-1,-1 (default all -1)")
    common.add_argument("--format", dest="fmt", default="text", help="text, csv or json")
    common.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")

    p = _Parser(prog="cliffcheck", description="Subalgebra search in Clifford algebras g(n, F).")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("table", parents=[common], help="print the blade multiplication table")
    v = sub.add_parser("verify-tables", parents=[common], help="diff the computed table against a reference")
    v.add_argument("--ref", default=None, help="reference table JSON (default: bundled n=4 transcription)")
    sub.add_parser("families", parents=[common], help="list canonical hyperplane bases")

    pr = sub.add_parser("prove", parents=[common], help="case analysis on the closure constraints")
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("--all", action="store_true", help="all 2^n families")
    g.add_argument("--family", type=int, help="one family number")
    pr.add_argument("--char", dest="char_mode", type=_char, default=CharMode(), help="generic or a prime")
    pr.add_argument("--trace", default=None, help="write the consolidated proof trace JSON here")
    pr.add_argument("--jobs", type=int, default=1)

    sc = sub.add_parser("scan", parents=[common], help="exhaustive hyperplane scan over F_p")
    sc.add_argument("--prime", type=int, required=True)
    sc.add_argument("--jobs", type=int, default=1)
    sc.add_argument("--long-run", action="store_true", help="allow primes beyond 2 and 3 at n = 4")
    sc.add_argument("--quiet", action="store_true", help="no progress lines on stderr")

    ch = sub.add_parser("check", parents=[common], help="closure check of one subspace over F_p")
    ch.add_argument("basis", help="basis JSON file ('-' for stdin)")
    ch.add_argument("--prime", type=int, required=True)
    return p


def _emit(text: str, cfg: RunConfig):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


# commands -----------------------------------------------------------------

def cmd_table(cfg: RunConfig, args) -> int:
    if cfg.fmt == "text" and cfg.n > 6:
        raise UsageError("text tables are limited to n <= 6")
    _emit(generate_table(cfg.n, cfg.signature, cfg.fmt), cfg)
    return EXIT_OK


def cmd_verify_tables(cfg: RunConfig, args) -> int:
    try:
        ref = ReferenceTable.load(args.ref)
    except (OSError, MalformedReference) as exc:
        raise UsageError(f"cannot read reference table: {exc}")
    diff = verify_against_reference(ref, cfg.signature)
    _emit(diff.render(cfg.fmt), cfg)
    return EXIT_DIFF if diff else EXIT_OK


def cmd_families(cfg: RunConfig, args) -> int:
    fams = enumerate_families(cfg.n)
    if cfg.fmt == "json":
        text = families_json(cfg.n) + "\n"
    elif cfg.fmt == "csv":
        text = "number,free_col,params\n" + "".join(f"{f.number},{f.free_col},{len(f.params)}\n" for f in fams)
    else:
        text = "".join(f"({f.number}) {render_family(f)}\n" for f in fams)
    _emit(text, cfg)
    return EXIT_OK


def _prove_one(args) -> ProofTrace:
    number, n, mode, squares = args
    sig = Signature(squares) if squares else None
    return prove_no_subalgebra(family_by_number(number, n), mode, sig)


def coverage_statement(traces: Sequence[ProofTrace], mode: CharMode, f2_closed: Optional[int] = None,
                       generic: Optional[Sequence[ProofTrace]] = None) -> str:
    """One-line summary of which fields the run settles.

    ``generic`` is a companion characteristic-0 run; with it, a char-2 report also
    states what is known for every other characteristic.
    """
    verdicts = {t.verdict for t in traces}
    if mode.p is None:
        if verdicts == {NO_SUBALGEBRA}:
            caveat = sorted({q for t in traces for q in t.caveat})
            if caveat:
                return ("no codimension-1 subalgebra over any field of characteristic not in "
                        f"{{{', '.join(map(str, caveat))}}}")
            return "no codimension-1 subalgebra over any field"
        return "symbolic analysis incomplete: some families are not NoSubalgebra"
    parts = []
    if generic is not None:
        g = {t.verdict for t in generic}
        caveat = {q for t in generic for q in t.caveat}
        if g == {NO_SUBALGEBRA} and caveat <= {mode.p}:
            parts.append(f"all fields of characteristic != {mode.p}: no codimension-1 subalgebra (generic run)")
        else:
            parts.append("generic run does not settle the other characteristics")
    closed = [t.family for t in traces if t.verdict == SOLUTION]
    ruled = [t.family for t in traces if t.verdict == NO_SUBALGEBRA]
    parts.append(f"characteristic {mode.p}: families {_ranges(ruled)} ruled out symbolically" if ruled
                 else f"characteristic {mode.p}: no family ruled out symbolically")
    if closed:
        parts.append(f"closed hyperplanes exist (verified) in families {_ranges(closed)}")
    undecided = [t.family for t in traces if t.verdict not in (SOLUTION, NO_SUBALGEBRA)]
    if undecided:
        parts.append(f"families {_ranges(undecided)} undecided symbolically")
    if f2_closed is not None:
        parts.append(f"exhaustive F_{mode.p} scan: {f2_closed} closed hyperplanes")
    return "; ".join(parts)


def _ranges(nums: Sequence[int]) -> str:
    return ",".join(map(str, nums))


def _trace_path(arg: Optional[str], mode: CharMode) -> Optional[Path]:
    base = os.environ.get(TRACE_DIR_ENV)
    if arg is None and base is None:
        return None
    name = Path(arg) if arg else Path(f"proof_{mode.label}.json")
    if base and not name.is_absolute():
        return Path(base) / name
    return name


def cmd_prove(cfg: RunConfig, args) -> int:
    mode = args.char_mode
    numbers = range(1, (1 << cfg.n) + 1) if args.all else [args.family]
    for k in numbers:
        if not 1 <= k <= 1 << cfg.n:
            raise UsageError(f"--family must be in 1..{1 << cfg.n}")
    squares = cfg.signature.squares if cfg.signature else None
    tasks = [(k, cfg.n, mode, squares) for k in numbers]
    t0 = time.perf_counter()
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            traces = list(pool.map(_prove_one, tasks))
    else:
        traces = [_prove_one(t) for t in tasks]
    seconds = time.perf_counter() - t0
    scan_closed = None
    if mode.p is not None and functional_count(mode.p, cfg.n) <= 1 << 20:
        scan_closed = len(scan(mode.p, cfg.n, sig=cfg.signature, progress=False).closed)
    generic = None
    if mode.p == 2:
        generic = [_prove_one((k, cfg.n, CharMode(), squares)) for k in range(1, (1 << cfg.n) + 1)]
    coverage = coverage_statement(traces, mode, scan_closed, generic)
    overall = NO_SUBALGEBRA if all(t.verdict == NO_SUBALGEBRA for t in traces) else (
        SOLUTION if any(t.verdict == SOLUTION for t in traces) else "Undecided")
    caveat = sorted({q for t in traces for q in t.caveat})

    rows = []
    for t in traces:
        counts = t.leaf_counts()
        consts = sorted({leaf.constant for leaf in t.leaves if leaf.constant is not None})
        rows.append({"family": t.family, "verdict": t.verdict, "leaves": len(t.leaves),
                     "contradictions": counts.get("Contradiction", 0), "constants": consts,
                     "caveat": t.caveat, "nodes": len(t.nodes)})
    path = _trace_path(args.trace, mode)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = {"n": cfg.n, "char_mode": mode.label, "verdict": overall, "caveat": caveat,
               "coverage": coverage, "families": [t.to_json() for t in traces]}
        path.write_text(json.dumps(doc, indent=1) + "\n")

    if cfg.fmt == "json":
        text = json.dumps({"char_mode": mode.label, "verdict": overall, "caveat": caveat,
                           "coverage": coverage, "families": rows}, indent=1) + "\n"
    elif cfg.fmt == "csv":
        text = "family,verdict,leaves,contradictions,caveat\n" + "".join(
            f"{r['family']},{r['verdict']},{r['leaves']},{r['contradictions']},{' '.join(map(str, r['caveat']))}\n"
            for r in rows)
    else:
        lines = [f"char mode: {mode.label}"]
        for r in rows:
            extra = f"caveat {{{', '.join(map(str, r['caveat']))}}}" if r["caveat"] else "no caveat"
            lines.append(f"family {r['family']:2d}: {r['verdict']:<13} {r['leaves']:3d} leaves, "
                         f"{r['nodes']:5d} nodes, {extra}")
        lines.append(f"overall: {overall}")
        lines.append(f"coverage: {coverage}")
        lines.append(f"time: {seconds:.2f} s")
        if path is not None:
            lines.append(f"trace: {path}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg)
    return EXIT_OK if overall == NO_SUBALGEBRA else EXIT_FAIL


def cmd_scan(cfg: RunConfig, args) -> int:
    try:
        rep = scan(args.prime, cfg.n, jobs=cfg.jobs, sig=cfg.signature, long_run=args.long_run,
                   progress=not args.quiet)
    except InfeasibleScan as exc:
        sys.stderr.write(f"cliffcheck: {exc}\n")
        return EXIT_INFEASIBLE
    if cfg.fmt == "json":
        text = json.dumps(rep.to_json(), indent=1) + "\n"
    elif cfg.fmt == "csv":
        text = "p,n,examined,closed,seconds\n" + f"{rep.p},{rep.n},{rep.examined},{len(rep.closed)},{rep.seconds:.3f}\n"
    else:
        text = (f"p = {rep.p}, n = {rep.n}: examined {rep.examined}, closed {len(rep.closed)}, "
                f"{rep.seconds:.2f} s\n")
        text += "".join(f"  closed: {f.to_json()}\n" for f in rep.closed)
    _emit(text, cfg)
    return EXIT_OK if not rep.closed else EXIT_FAIL


def load_basis(data: dict, n: int, p: int, sig: Optional[Signature]):
    """Either a canonical family with an ``assignment``, or a plain list of integer multivectors."""
    if "free_col" in data:
        fam = CanonicalBasisFamily.from_json(data, n)
        raw = data.get("assignment", {})
        assignment = {Parameter.parse(k): int(v) for k, v in raw.items()}
        return field_instance(fam, assignment, PrimeField(p), sig).vectors
    if "vectors" in data:
        F = PrimeField(p)
        out = []
        for text in data["vectors"]:
            mv = parse_multivector(text, n, sig)
            out.append(mv._new({b: F(c) for b, c in mv.coeffs.items()}))
        return out
    raise ValueError("basis JSON needs 'free_col' (+ 'assignment') or 'vectors'")


def cmd_check(cfg: RunConfig, args) -> int:
    try:
        raw = sys.stdin.read() if args.basis == "-" else Path(args.basis).read_text()
        data = json.loads(raw)
        vectors = load_basis(data, cfg.n, args.prime, cfg.signature)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read basis: {exc}")
    closed = check_subspace(vectors, args.prime, cfg.signature) if vectors else True
    if cfg.fmt == "json":
        text = json.dumps({"p": args.prime, "dimension": len(vectors), "closed": closed}) + "\n"
    elif cfg.fmt == "csv":
        text = f"p,dimension,closed\n{args.prime},{len(vectors)},{closed}\n"
    else:
        text = f"{'closed' if closed else 'not closed'} over F_{args.prime} ({len(vectors)} vectors)\n"
    _emit(text, cfg)
    return EXIT_OK if closed else EXIT_FAIL


COMMANDS = {
    "table": cmd_table,
    "verify-tables": cmd_verify_tables,
    "families": cmd_families,
    "prove": cmd_prove,
    "scan": cmd_scan,
    "check": cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig(args.command, n=args.n, signature=args.signature,
                        prime=getattr(args, "prime", None),
                        char_mode=getattr(args, "char_mode", CharMode()),
                        jobs=getattr(args, "jobs", 1), output=args.output, fmt=args.fmt)
        cfg.validate()
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        sys.stderr.write(f"cliffcheck: {exc}\n")
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE
    except UnsupportedFormat as exc:
        sys.stderr.write(f"cliffcheck: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
