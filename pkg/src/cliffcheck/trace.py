"""Standalone replay of proof-trace JSON.

Every node is re-checked against the rule it cites, using only polynomial
arithmetic and a fresh evaluation of the basis products.  Nothing from the
deduction engine is reused, so a bug in the search cannot certify itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .bases import family_by_number, symbolic_instance
from .blades import Signature, position_blade
from .scalars import IntPoly, Parameter, prime_factors


@dataclass
class TraceReport:
    ok: bool
    checked_nodes: int = 0
    checked_leaves: int = 0
    errors: list[str] = field(default_factory=list)
    caveat: list[int] = field(default_factory=list)


class _Mode:
    def __init__(self, char_mode):
        self.p = None if char_mode in (None, "generic") else int(char_mode)

    def red(self, q: IntPoly) -> IntPoly:
        return q if self.p is None else q.mod(self.p)

    def unit(self, c: int) -> bool:
        return c in (1, -1) if self.p is None else c % self.p != 0

    def equal_up_to_unit(self, a: IntPoly, b: IntPoly) -> bool:
        a, b = self.red(a), self.red(b)
        if not a or not b:
            return not a and not b
        (ma, ca), (mb, cb) = a.leading(), b.leading()
        if ma != mb:
            return False
        if self.p is None:
            if ca == cb:
                return a == b
            return ca == -cb and a == -b
        return (a * cb).mod(self.p) == (b * ca).mod(self.p)


def _residuals(family: int, n: int, sig: Optional[Signature]) -> dict[tuple[int, int], IntPoly]:
    fam = family_by_number(family, n)
    vecs = symbolic_instance(fam, sig).vectors
    free = fam.free_blade
    out = {}
    for i, a in enumerate(vecs, start=1):
        for j, b in enumerate(vecs, start=1):
            prod = a * b
            r = IntPoly.coerce(prod.coeff(free, IntPoly()))
            for v in fam.vectors:
                x = IntPoly.coerce(prod.coeff(position_blade(v.pivot, n), IntPoly()))
                if x and v.param is not None:
                    r = r - x * IntPoly.var(v.param)
            out[(i, j)] = r
    return out


def _fact_rhs(node: dict) -> tuple[Parameter, IntPoly]:
    var, rhs = node["fact"].split(":=")
    return Parameter.parse(var.strip()), IntPoly.parse(rhs.strip())


def verify_trace(data: dict, sig: Optional[Signature] = None) -> TraceReport:
    mode = _Mode(data["char_mode"])
    n = data.get("n", 4)
    rep = TraceReport(ok=True)
    err = rep.errors.append
    branches = {b["id"]: b for b in data["branches"]}
    nodes = {node["id"]: node for node in data["nodes"]}
    polys: dict[int, IntPoly] = {}
    residuals = None

    def lineage(bid):
        out = []
        while bid is not None and bid in branches:
            out.append(bid)
            bid = branches[bid]["parent"]
        return out

    for node in data["nodes"]:
        nid = node["id"]
        if node["parent"] not in branches:
            err(f"node {nid}: unknown branch {node['parent']}")
            continue
        q = IntPoly.parse(node["constraint"])
        polys[nid] = q
        visible = set(lineage(node["parent"]))
        ins = node["inputs"]
        if any(i not in polys or i >= nid or nodes[i]["parent"] not in visible for i in ins):
            err(f"node {nid}: input not visible from branch {node['parent']}")
            continue
        rule = node["rule"]
        if rule == "product":
            if residuals is None:
                residuals = _residuals(data["family"], n, sig)
            ok = mode.equal_up_to_unit(q, residuals[tuple(node["pair"])])
        elif rule == "content":
            g = node["divisor"]
            ok = mode.p is None and g > 1 and polys[ins[0]] == q * g
        elif rule == "combine":
            ok = mode.equal_up_to_unit(q, polys[ins[0]] + polys[ins[1]] * node["sign"])
        elif rule == "solve":
            v, rhs = _fact_rhs(node)
            c = polys[ins[0]].terms.get(((v, 1),), 0)
            ok = (mode.equal_up_to_unit(q, polys[ins[0]]) and mode.unit(c)
                  and v not in rhs.variables() and mode.equal_up_to_unit(q, IntPoly.var(v) - rhs))
        elif rule == "substitute":
            src, fact = nodes[ins[0]], nodes[ins[1]]
            v, rhs = _fact_rhs(fact)
            ok = "fact" in fact and mode.equal_up_to_unit(q, polys[ins[0]].subs({v: rhs}))
            if "fact" in node:
                u, urhs = _fact_rhs(node)
                ok = ok and "fact" in src and mode.equal_up_to_unit(q, IntPoly.var(u) - urhs)
        elif rule == "assume":
            v, rhs = _fact_rhs(node)
            split = polys[ins[0]]
            ok = (rhs.is_constant() and mode.equal_up_to_unit(q, IntPoly.var(v) - rhs)
                  and not mode.red(split.subs({v: rhs}))
                  and f"{v} = {rhs.constant_value()}" in branches[node["parent"]]["assumptions"])
        else:
            ok = False
        if not ok:
            err(f"node {nid}: rule {rule} does not reproduce {node['constraint']!r}")
        rep.checked_nodes += 1

    # splits must be exhaustive: the children's values are every root of the split constraint
    children: dict[int, list[dict]] = {}
    for b in data["branches"]:
        if b["parent"] is not None:
            children.setdefault(b["parent"], []).append(b)
    assumed = {node["parent"]: node for node in nodes.values() if node["rule"] == "assume"}
    for parent, kids in children.items():
        split_ids = {k["split_node"] for k in kids}
        if len(split_ids) != 1 or any(k["id"] not in assumed for k in kids) or not split_ids <= polys.keys():
            err(f"branch {parent}: children do not share one split")
            continue
        split = polys[split_ids.pop()]
        facts = [_fact_rhs(assumed[k["id"]]) for k in kids]
        vars_ = {v for v, _ in facts}
        if len(split) == 1 and all(rhs == 0 for _, rhs in facts):
            (m, _), = split.terms.items()
            ok = vars_ == {v for v, _ in m}
        else:
            ok = len(vars_) == 1 and _covers(mode, split, [IntPoly.var(v) - rhs for v, rhs in facts])
        if not ok:
            err(f"branch {parent}: split on {split} is not exhaustive")

    caveat: set[int] = set()
    leaf_ids = set()
    for leaf in data["leaves"]:
        bid = leaf["id"]
        leaf_ids.add(bid)
        if leaf["verdict"] != "Contradiction":
            continue
        w = leaf["witness"]
        if bid not in branches or w not in polys or nodes[w]["parent"] not in lineage(bid):
            err(f"leaf {bid}: witness not on its path")
            continue
        wq = mode.red(polys[w])
        if not wq or not wq.is_constant():
            err(f"leaf {bid}: witness {nodes[w]['constraint']!r} is not a nonzero constant")
            continue
        roots = [w] + [branches[b]["split_node"] for b in lineage(bid) if branches[b]["split_node"] is not None]
        seen, todo = set(), roots
        while todo:
            i = todo.pop()
            if i not in seen and i in nodes:
                seen.add(i)
                todo.extend(nodes[i]["inputs"])
        divisors = sorted({nodes[i]["divisor"] for i in seen if nodes[i]["rule"] == "content"})
        if sorted(leaf["inverted_constants"]) != divisors:
            err(f"leaf {bid}: inverted constants {leaf['inverted_constants']} != {divisors}")
        if mode.p is None:
            for d in divisors + [wq.constant_value()]:
                caveat |= prime_factors(abs(d))
        rep.checked_leaves += 1
    for bid in branches:
        if bid not in leaf_ids and bid not in children:
            err(f"branch {bid} is neither split nor closed by a leaf")
    rep.caveat = sorted(caveat)
    if sorted(data.get("caveat", [])) != rep.caveat and data.get("verdict") == "NoSubalgebra":
        err(f"reported caveat {data.get('caveat')} != replayed {rep.caveat}")
    rep.ok = not rep.errors
    return rep


def _covers(mode: _Mode, split: IntPoly, factors: list[IntPoly]) -> bool:
    """split = unit * prod(factor_i ** e_i) with every e_i >= 1 (roots may repeat mod p)."""
    extra = split.degree() - len(factors)
    if extra < 0:
        return False
    for exps in product(range(extra + 1), repeat=len(factors)):
        if sum(exps) != extra:
            continue
        cover = IntPoly.const(1)
        for f, e in zip(factors, exps):
            cover = cover * f ** (e + 1)
        if mode.equal_up_to_unit(split, cover):
            return True
    return False
