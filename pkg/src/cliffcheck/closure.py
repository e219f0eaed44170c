"""Closure constraints for canonical hyperplane bases and their case analysis.

For a canonical family with basis a_1..a_m, every product a_i a_j must lie in the
span.  Because the basis is in RREF, the coefficient of a_k in that expansion is
forced to be the product's coefficient on the pivot blade of a_k; what remains is
one scalar condition on the free blade, the *residual*.  The engine collects all
residuals and runs a small deduction calculus on them:

R1  combine two constraints p, q into p + q / p - q when that drops monomials
R2  divide out integer content (recorded: the division needs the divisor invertible)
R3  solve a constraint linear in one parameter and substitute it everywhere

and splits branches on  m = 0 (monomial), v^3 - v = 0, v^2 - 1 = 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .bases import CanonicalBasisFamily, field_instance, symbolic_instance
from .blades import Multivector, Signature, position_blade
from .scalars import (IntPoly, Parameter, PrimeField, integer_content, is_prime, poly_eval,
                      prime_factors)

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 64
DEFAULT_MAX_BRANCHES = 20000
VERIFY_PRIME = 1000003

CONTRADICTION = "Contradiction"
SOLUTION = "SolutionFound"
UNDECIDED = "Undecided"
NO_SUBALGEBRA = "NoSubalgebra"


# characteristic --------------------------------------------------------

@dataclass(frozen=True)
class CharMode:
    """``p is None`` means generic: integer coefficients, divisions tracked."""

    p: Optional[int] = None

    def __post_init__(self):
        if self.p is not None and not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @classmethod
    def parse(cls, text) -> CharMode:
        if text in (None, "generic", "0", 0):
            return cls(None)
        return cls(int(text))

    @property
    def label(self):
        return "generic" if self.p is None else self.p

    @property
    def two_invertible(self) -> bool:
        return self.p != 2

    def reduce(self, poly: IntPoly) -> IntPoly:
        return poly if self.p is None else poly.mod(self.p)

    def is_unit(self, c: int) -> bool:
        return c in (1, -1) if self.p is None else c % self.p != 0

    def unit_normal(self, poly: IntPoly) -> IntPoly:
        """Scale by a unit so the leading coefficient is positive (generic) or 1 (mod p)."""
        if not poly:
            return poly
        _, c = poly.leading()
        if self.p is None:
            return -poly if c < 0 else poly
        return (poly * pow(c, -1, self.p)).mod(self.p)

    def content(self, poly: IntPoly) -> tuple[int, IntPoly]:
        """``poly = g * q`` with q unit-normal; in mode p, g is always 1."""
        poly = self.unit_normal(poly)
        if self.p is not None:
            return 1, poly
        return integer_content(poly)

    def same_up_to_unit(self, a: IntPoly, b: IntPoly) -> bool:
        return self.unit_normal(self.reduce(a)) == self.unit_normal(self.reduce(b))


# span expressions ------------------------------------------------------

@dataclass(frozen=True)
class SpanExpression:
    coefficients: Dict[int, IntPoly]
    residual: IntPoly


def express_in_span(product: Multivector, fam: CanonicalBasisFamily) -> SpanExpression:
    """Coefficients x_k (keyed by basis index k, 1-based) and the free-column residual."""
    zero = IntPoly()
    coeffs: Dict[int, IntPoly] = {}
    residual = IntPoly.coerce(product.coeff(fam.free_blade, zero))
    for k, v in enumerate(fam.vectors, start=1):
        x = IntPoly.coerce(product.coeff(position_blade(v.pivot, fam.n), zero))
        if not x:
            continue
        coeffs[k] = x
        if v.param is not None:
            residual = residual - x * IntPoly.var(v.param)
    return SpanExpression(coeffs, residual)


@dataclass(frozen=True)
class Constraint:
    poly: IntPoly
    pair: tuple[int, int]


def derive_constraints(fam: CanonicalBasisFamily, sig: Signature | None = None) -> List[Constraint]:
    """Nonzero residuals of all ordered products a_i a_j, in (i, j) order."""
    vecs = symbolic_instance(fam, sig).vectors
    out = []
    for i, a in enumerate(vecs, start=1):
        for j, b in enumerate(vecs, start=1):
            r = express_in_span(a * b, fam).residual
            if r:
                out.append(Constraint(r, (i, j)))
    return out


class CompiledConstraints:
    """Residual polynomials of a family compiled for batched evaluation mod p."""

    def __init__(self, polys: Sequence[IntPoly], params: Sequence[Parameter]):
        self.params = list(params)
        col = {v: i for i, v in enumerate(self.params)}
        monos = sorted({m for q in polys for m in q.terms}, key=repr)
        index = {m: i for i, m in enumerate(monos)}
        self.monomials = [tuple((col[v], e) for v, e in m) for m in monos]
        self.coeffs = np.zeros((len(polys), len(monos)), dtype=np.int64)
        for r, q in enumerate(polys):
            for m, c in q.terms.items():
                self.coeffs[r, index[m]] = c

    def evaluate(self, values: np.ndarray, p: int) -> np.ndarray:
        """(B, params) residues -> (B, constraints) residues."""
        values = np.asarray(values, dtype=np.int64) % p
        mono = np.ones((values.shape[0], len(self.monomials)), dtype=np.int64)
        for k, m in enumerate(self.monomials):
            for i, e in m:
                for _ in range(e):
                    mono[:, k] = mono[:, k] * values[:, i] % p
        return (mono @ (self.coeffs % p).T) % p

    def satisfied(self, values: np.ndarray, p: int) -> np.ndarray:
        return ~self.evaluate(values, p).any(axis=1)


def compile_constraints(fam: CanonicalBasisFamily, sig: Signature | None = None) -> CompiledConstraints:
    return CompiledConstraints([c.poly for c in derive_constraints(fam, sig)], fam.params)


# trace bookkeeping -----------------------------------------------------

@dataclass
class Node:
    id: int
    branch: int
    rule: str
    inputs: tuple[int, ...]
    poly: IntPoly
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"id": self.id, "parent": self.branch, "rule": self.rule, "inputs": list(self.inputs),
               "constraint": str(self.poly)}
        out.update(self.info)
        return out


@dataclass
class Leaf:
    branch: int
    verdict: str
    witness: Optional[int] = None
    constant: Optional[int] = None
    inverted_constants: list[int] = field(default_factory=list)
    caveat: list[int] = field(default_factory=list)
    assignment: Optional[dict] = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"id": self.branch, "verdict": self.verdict, "witness": self.witness,
               "constant": self.constant, "inverted_constants": self.inverted_constants,
               "caveat": self.caveat}
        if self.assignment is not None:
            out["assignment"] = self.assignment
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class BranchInfo:
    id: int
    parent: Optional[int]
    depth: int
    assumptions: list[str]
    split_node: Optional[int] = None
    split_rule: Optional[str] = None

    def to_json(self) -> dict:
        return {"id": self.id, "parent": self.parent, "depth": self.depth,
                "assumptions": self.assumptions, "split_node": self.split_node,
                "split_rule": self.split_rule}


@dataclass
class ProofTrace:
    family: int
    char_mode: object
    n: int = 4
    nodes: List[Node] = field(default_factory=list)
    branches: List[BranchInfo] = field(default_factory=list)
    leaves: List[Leaf] = field(default_factory=list)
    verdict: str = UNDECIDED
    caveat: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        nodes = []
        for node in self.nodes:
            d = node.to_json()
            d["assumptions"] = self.branches[node.branch].assumptions
            nodes.append(d)
        return {"family": self.family, "n": self.n, "char_mode": self.char_mode, "verdict": self.verdict,
                "caveat": self.caveat,
                "branches": [b.to_json() for b in self.branches],
                "nodes": nodes,
                "leaves": [leaf.to_json() for leaf in self.leaves]}

    def ancestors(self, branch: int) -> list[int]:
        out = []
        b: Optional[int] = branch
        while b is not None:
            out.append(b)
            b = self.branches[b].parent
        return out

    def subtree(self, branch: int) -> set[int]:
        return {b.id for b in self.branches if branch in self.ancestors(b.id)}

    def derived(self, branches: Optional[set[int]] = None) -> list[Node]:
        """Non-product nodes, optionally restricted to a set of branches."""
        return [n for n in self.nodes if n.rule != "product" and (branches is None or n.branch in branches)]

    def leaf_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for leaf in self.leaves:
            out[leaf.verdict] = out.get(leaf.verdict, 0) + 1
        return out


# branch state ----------------------------------------------------------

class Branch:
    def __init__(self, info: BranchInfo):
        self.info = info
        self.active: Dict[IntPoly, int] = {}
        self.by_mono: Dict[tuple, set] = {}
        self.facts: Dict[Parameter, tuple[IntPoly, int]] = {}
        self.contradiction: Optional[int] = None
        self.pairs: Dict[tuple[IntPoly, IntPoly], tuple] = {}
        self.fresh: list[IntPoly] = []

    def child(self, info: BranchInfo) -> Branch:
        b = Branch(info)
        b.facts = dict(self.facts)
        for q, nid in self.active.items():
            b._index(q, nid)
        b.pairs = dict(self.pairs)
        return b

    def _index(self, q: IntPoly, nid: int):
        self.active[q] = nid
        for m in q.terms:
            self.by_mono.setdefault(m, set()).add(q)
        self.fresh.append(q)

    def remove(self, q: IntPoly):
        del self.active[q]
        for m in q.terms:
            s = self.by_mono[m]
            s.discard(q)
            if not s:
                del self.by_mono[m]


@dataclass(frozen=True)
class EngineConfig:
    max_depth: int = DEFAULT_DEPTH
    max_branches: int = DEFAULT_MAX_BRANCHES
    # split on one-variable case equations as soon as they show up
    eager_split: bool = True


class Engine:
    """Depth-first case analysis for one family in one characteristic mode."""

    def __init__(self, fam: CanonicalBasisFamily, mode: CharMode = CharMode(), sig: Signature | None = None,
                 config: EngineConfig | None = None):
        self.fam = fam
        self.mode = mode
        self.sig = sig
        self.config = config or EngineConfig()
        self._patterns: Dict[IntPoly, object] = {}
        self.trace = ProofTrace(fam.number, mode.label, fam.n)
        self.constraints = derive_constraints(fam, sig)

    # node helpers
    def node(self, branch: Branch, rule: str, inputs, poly: IntPoly, **info) -> int:
        nid = len(self.trace.nodes)
        self.trace.nodes.append(Node(nid, branch.info.id, rule, tuple(inputs), poly, info))
        return nid

    def add(self, br: Branch, poly: IntPoly, nid: int):
        """Insert a constraint already recorded as node ``nid`` (rule R2 applied here)."""
        if br.contradiction is not None:
            return
        poly = self.mode.reduce(poly)
        if not poly:
            return
        if poly.is_constant():
            br.contradiction = nid
            return
        g, q = self.mode.content(poly)
        if g != 1:
            nid = self.node(br, "content", [nid], q, divisor=g)
        if q in br.active:
            return
        br._index(q, nid)

    # R1 -----------------------------------------------------------------
    def _score(self, p: IntPoly, q: IntPoly):
        """Best combination move for the pair, or None."""
        pt, qt = p.terms, q.terms
        if len(pt) > len(qt):
            small, big = pt, qt
        else:
            small, big = qt, pt
        shared = cancel_s = cancel_d = 0
        mod = self.mode.p
        for m, c in small.items():
            d = big.get(m)
            if d is None:
                continue
            shared += 1
            s_, d_ = c + d, c - d
            if mod is not None:
                s_, d_ = s_ % mod, d_ % mod
            if s_ == 0:
                cancel_s += 1
            if d_ == 0:
                cancel_d += 1
        if not shared:
            return None
        lp, lq = len(pt), len(qt)
        size_s = lp + lq - shared - cancel_s
        size_d = lp + lq - shared - cancel_d
        best = None
        # elimination: replace one member by the sum or difference
        for target, keep_len in ((q, lq), (p, lp)):
            for sign, size in ((1, size_s), (-1, size_d)):
                gain = keep_len - size
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, 1, "replace", target, sign)
        if self.mode.two_invertible:
            gain = lp + lq - size_s - size_d
            if gain > 0 and (best is None or gain > best[0]):
                best = (gain, 0, "split", None, 0)
        return best

    def _refresh_pairs(self, br: Branch):
        fresh, br.fresh = br.fresh, []
        for q in fresh:
            if q not in br.active:
                continue
            partners = set()
            for m in q.terms:
                partners |= br.by_mono.get(m, set())
            partners.discard(q)
            for o in partners:
                key = (q, o) if br.active[q] < br.active[o] else (o, q)
                if key in br.pairs:
                    continue
                br.pairs[key] = self._score(*key)

    def combine_step(self, br: Branch) -> bool:
        self._refresh_pairs(br)
        best_key, best = None, None
        stale = []
        for key, mv in br.pairs.items():
            if key[0] not in br.active or key[1] not in br.active:
                stale.append(key)
                continue
            if mv is None:
                continue
            rank = (-mv[0], mv[1], br.active[key[0]], br.active[key[1]])
            if best is None or rank < best[0]:
                best, best_key = (rank, mv), key
        for key in stale:
            del br.pairs[key]
        if best is None:
            return False
        p, q = best_key
        _, mv = best
        np_, nq = br.active[p], br.active[q]
        br.remove(p)
        br.remove(q)
        if mv[2] == "split":
            s = self.mode.reduce(p + q)
            d = self.mode.reduce(p - q)
            ns = self.node(br, "combine", [np_, nq], self.mode.unit_normal(s), sign=1)
            nd = self.node(br, "combine", [np_, nq], self.mode.unit_normal(d), sign=-1)
            self.add(br, s, ns)
            self.add(br, d, nd)
        else:
            target, sign = mv[3], mv[4]
            other = q if target is p else p
            nt = np_ if target is p else nq
            no = nq if target is p else np_
            r = self.mode.reduce(target + other * sign)
            nr = self.node(br, "combine", [nt, no], self.mode.unit_normal(r), sign=sign)
            self.add(br, other, no)
            self.add(br, r, nr)
        return True

    # R3 -----------------------------------------------------------------
    def _solvable(self, q: IntPoly):
        for v in sorted(q.variables()):
            c = q.terms.get(((v, 1),))
            if c is None or not self.mode.is_unit(c):
                continue
            if sum(1 for m in q.terms if any(u == v for u, _ in m)) != 1:
                continue
            rest = q - IntPoly({((v, 1),): c})
            if self.mode.p is None:
                rhs = rest * (-c)
            else:
                rhs = (rest * (-pow(c, -1, self.mode.p))).mod(self.mode.p)
            return v, rhs
        return None

    def solve_step(self, br: Branch) -> bool:
        best = None
        for q, nid in br.active.items():
            s = self._solvable(q)
            if s is None:
                continue
            rank = (len(q), s[0], nid)
            if best is None or rank < best[0]:
                best = (rank, q, nid, s)
        if best is None:
            return False
        _, q, nid, (v, rhs) = best
        br.remove(q)
        fid = self.node(br, "solve", [nid], self.mode.unit_normal(IntPoly.var(v) - rhs),
                        var=str(v), fact=f"{v} := {rhs}")
        self.assign(br, v, rhs, fid)
        return True

    def assign(self, br: Branch, v: Parameter, rhs: IntPoly, fid: int):
        sub = {v: rhs}
        for u, (old, onid) in list(br.facts.items()):
            if v in old.variables():
                new = self.mode.reduce(old.subs(sub))
                nn = self.node(br, "substitute", [onid, fid], self.mode.unit_normal(IntPoly.var(u) - new),
                               var=str(u), fact=f"{u} := {new}")
                br.facts[u] = (new, nn)
        br.facts[v] = (rhs, fid)
        for q, nid in list(br.active.items()):
            if q not in br.active or v not in q.variables():
                continue
            br.remove(q)
            new = self.mode.reduce(q.subs(sub))
            nn = self.node(br, "substitute", [nid, fid], self.mode.unit_normal(new))
            self.add(br, new, nn)
            if br.contradiction is not None:
                return

    def deduce(self, br: Branch):
        while br.contradiction is None:
            if self.config.eager_split and self.split_options(br, eager=True) is not None:
                return
            if self.combine_step(br):
                continue
            if not self.solve_step(br):
                return

    # splitting ----------------------------------------------------------
    def split_options(self, br: Branch, eager: bool = False):
        """(node, rule, variable, values) for the split to make, lowest parameter first.

        ``eager`` restricts to one-variable case equations (S2, S3); monomial
        splits wait until deduction has saturated.
        """
        best = None
        for q, nid in br.active.items():
            opt = self._patterns.get(q, False)
            if opt is False:
                opt = self._patterns[q] = self.pattern(q)
            if opt is None or (eager and opt[0] == "S1"):
                continue
            rule, var, values = opt
            rank = (var, len(values), nid)
            if best is None or rank < best[0]:
                best = (rank, nid, rule, var, values)
        return None if best is None else best[1:]

    def pattern(self, q: IntPoly):
        """Split rule, variable and child assignments if q matches S1, S2 or S3."""
        if len(q) == 1 and not q.is_constant():
            (m, _), = q.terms.items()
            vs = [v for v, _ in m]
            return "S1", vs[0], [(v, 0) for v in vs]
        vs = q.variables()
        if len(vs) != 1:
            return None
        v, = vs
        x = IntPoly.var(v)
        if self.mode.same_up_to_unit(q, x * x * x - x):
            return "S2", v, self._dedupe([(v, 0), (v, 1), (v, -1)])
        if self.mode.same_up_to_unit(q, x * x - 1):
            return "S3", v, self._dedupe([(v, 1), (v, -1)])
        return None

    def _dedupe(self, vals):
        if self.mode.p is None:
            return vals
        seen, out = set(), []
        for v, c in vals:
            if c % self.mode.p not in seen:
                seen.add(c % self.mode.p)
                out.append((v, c))
        return out

    # driver ---------------------------------------------------------------
    def new_branch(self, parent: Optional[Branch], assumptions, split=None) -> Branch:
        bid = len(self.trace.branches)
        info = BranchInfo(bid, parent.info.id if parent else None,
                          parent.info.depth + 1 if parent else 0, assumptions)
        if split:
            info.split_node, info.split_rule = split
        self.trace.branches.append(info)
        return parent.child(info) if parent else Branch(info)

    def run(self) -> ProofTrace:
        root = self.new_branch(None, [])
        for c in self.constraints:
            poly = self.mode.reduce(c.poly)
            nid = self.node(root, "product", [], self.mode.unit_normal(poly), pair=list(c.pair))
            self.add(root, poly, nid)
            if root.contradiction is not None:
                break
        stack = [root]
        while stack:
            br = stack.pop()
            self.deduce(br)
            if br.contradiction is not None:
                self._contradiction_leaf(br)
                continue
            if not br.active:
                self._solution_leaf(br)
                continue
            opt = self.split_options(br)
            if opt is None:
                self.trace.leaves.append(Leaf(br.info.id, UNDECIDED, note="no split pattern applies"))
                continue
            if br.info.depth >= self.config.max_depth or len(self.trace.branches) >= self.config.max_branches:
                self.trace.leaves.append(Leaf(br.info.id, UNDECIDED, note="search bound exceeded"))
                continue
            nid, rule, _, values = opt
            children = []
            for v, c in values:
                ch = self.new_branch(br, br.info.assumptions + [f"{v} = {c}"], (nid, rule))
                ch.remove(next(q for q, i in ch.active.items() if i == nid))
                fid = self.node(ch, "assume", [nid], self.mode.unit_normal(IntPoly.var(v) - c),
                                var=str(v), value=c, fact=f"{v} := {c}")
                self.assign(ch, v, self.mode.reduce(IntPoly.const(c)), fid)
                children.append(ch)
            stack.extend(reversed(children))
        self._finish()
        return self.trace

    def _ancestors(self, start: Sequence[int]) -> set[int]:
        seen, todo = set(), list(start)
        nodes = self.trace.nodes
        while todo:
            i = todo.pop()
            if i in seen:
                continue
            seen.add(i)
            todo.extend(nodes[i].inputs)
        return seen

    def _contradiction_leaf(self, br: Branch):
        w = br.contradiction
        const = self.mode.reduce(self.trace.nodes[w].poly).constant_value()
        roots = [w]
        info = {b.id: b for b in self.trace.branches}
        b = br.info
        while b is not None:
            if b.split_node is not None:
                roots.append(b.split_node)
            b = info[b.parent] if b.parent is not None else None
        divisors = sorted({abs(self.trace.nodes[i].info["divisor"]) for i in self._ancestors(roots)
                           if self.trace.nodes[i].rule == "content"})
        caveat = set()
        if self.mode.p is None:
            for d in divisors:
                caveat |= prime_factors(d)
            caveat |= prime_factors(const)
        # witness poly is stored unit-normalized; report the raw constant too
        self.trace.leaves.append(Leaf(br.info.id, CONTRADICTION, w, int(const), divisors, sorted(caveat)))

    def _solution_leaf(self, br: Branch):
        values: Dict[Parameter, int] = {}
        free = {p: 0 for p in self.fam.params if p not in br.facts}
        for p in self.fam.params:
            if p in br.facts:
                values[p] = int(poly_eval(br.facts[p][0], free, int_field))
            else:
                values[p] = 0
        prime = self.mode.p or VERIFY_PRIME
        ok = verify_assignment(self.fam, values, prime, self.sig)
        if self.mode.p is None:
            ok = ok and all(poly_eval(c.poly, values, int_field) == 0 for c in self.constraints)
        assignment = {str(p): values[p] % prime if self.mode.p else values[p] for p in self.fam.params}
        if ok:
            self.trace.leaves.append(Leaf(br.info.id, SOLUTION, assignment=assignment))
        else:
            self.trace.leaves.append(Leaf(br.info.id, UNDECIDED, assignment=assignment,
                                          note="candidate solution failed direct closure check"))

    def _finish(self):
        t = self.trace
        verdicts = {leaf.verdict for leaf in t.leaves}
        if verdicts == {CONTRADICTION}:
            t.verdict = NO_SUBALGEBRA
        elif SOLUTION in verdicts:
            t.verdict = SOLUTION
        else:
            t.verdict = UNDECIDED
        caveat = set()
        for leaf in t.leaves:
            caveat |= set(leaf.caveat)
        t.caveat = sorted(caveat)
        log.debug("family %d (%s): %s, %d nodes, %d branches", t.family, t.char_mode, t.verdict,
                  len(t.nodes), len(t.branches))


def int_field(x):
    return x


def verify_assignment(fam: CanonicalBasisFamily, values: Dict[Parameter, int], p: int,
                      sig: Signature | None = None) -> bool:
    from .scan import check_subspace
    F = PrimeField(p)
    inst = field_instance(fam, {k: v % p for k, v in values.items()}, F, sig)
    return check_subspace(inst.vectors, p, sig)


def prove_no_subalgebra(fam: CanonicalBasisFamily, char_mode: CharMode | str | int | None = None,
                        sig: Signature | None = None, config: EngineConfig | None = None) -> ProofTrace:
    mode = char_mode if isinstance(char_mode, CharMode) else CharMode.parse(char_mode)
    return Engine(fam, mode, sig, config).run()
