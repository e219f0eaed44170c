from __future__ import annotations

import itertools
import json

import numpy as np
import pytest

from cliffcheck.bases import enumerate_families, family_by_number, instance_matrices, symbolic_instance
from cliffcheck.closure import (CharMode, CompiledConstraints, Engine, EngineConfig, compile_constraints,
                                derive_constraints, express_in_span, prove_no_subalgebra)
from cliffcheck.scalars import IntPoly, Parameter
from cliffcheck.scan import check_subspaces_batched, structure_table
from cliffcheck.trace import verify_trace

P = IntPoly.parse


def test_span_expression_of_a2_a6_in_family_1():
    fam = family_by_number(1)
    v = symbolic_instance(fam).vectors
    prod = v[1] * v[5]
    assert str(prod) == "a2,16*a6,16 - e2 - a2,16*e34 - a6,16*e234"
    se = express_in_span(prod, fam)
    assert se.coefficients == {1: P("a2,16*a6,16"), 3: P("-1"), 11: P("-a2,16"), 15: P("-a6,16")}
    # residual = z[free] - sum x_k a_k,16
    assert se.residual == P("a3,16 + a2,16*a11,16 + a6,16*a15,16 - a1,16*a2,16*a6,16")
    at_zero = se.residual.subs({Parameter(1, 16): IntPoly()})
    assert -at_zero == P("-a3,16 - a2,16*a11,16 - a6,16*a15,16")


def test_span_expression_constant_residual_family_6():
    fam = family_by_number(6)
    v = symbolic_instance(fam).vectors
    se = express_in_span(v[10] * v[11], fam)
    assert se.coefficients == {} and se.residual == P("-1")


def test_basis_vector_lies_in_span():
    fam = family_by_number(3)
    v = symbolic_instance(fam).vectors
    se = express_in_span(v[0], fam)
    assert se.coefficients == {1: P("1")} and not se.residual


def test_derived_constraints_examples():
    c1 = {c.pair: c.poly for c in derive_constraints(family_by_number(1))}
    a1 = P("a1,16")
    assert c1[(1, 1)] == -(a1 * (a1 * a1 - 1))
    assert len(c1) <= 225
    c16 = {c.pair: c.poly for c in derive_constraints(family_by_number(16))}
    assert c16[(1, 1)] == P("-1")
    c7 = {c.pair: c.poly for c in derive_constraints(family_by_number(7))}
    assert c7[(11, 13)].constant_value() == 1


@pytest.mark.parametrize("p", [3, 5, 7])
def test_residuals_vanish_iff_product_in_span(p):
    """Evaluate residuals at random points and compare with RREF membership of each product."""
    rng = np.random.default_rng(p)
    table = structure_table(4)
    T = table.tensor()
    for fam in enumerate_families(4)[:6]:
        cons = derive_constraints(fam)
        by_pair = {c.pair: c.poly for c in cons}
        compiled = CompiledConstraints([by_pair.get((i, j), IntPoly()) for i in range(1, 16) for j in range(1, 16)],
                                       fam.params)
        vals = rng.integers(0, p, (20, len(fam.params)))
        res = compiled.evaluate(vals, p).reshape(20, 15, 15)
        mats = instance_matrices(fam, vals, p)
        for z in range(20):
            R = mats[z]
            prods = np.einsum("ia,jb,abc->ijc", R, R, T) % p
            piv = [v.pivot - 1 for v in fam.vectors]
            rem = (prods - np.einsum("ijk,kc->ijc", prods[:, :, piv], R)) % p
            assert ((res[z] == 0) == ~rem.any(axis=2)).all()


def _engine(mode=None):
    return Engine(family_by_number(1), CharMode.parse(mode))


def test_split_patterns():
    e = _engine()
    assert e.pattern(P("a2,16*a11,16")) == ("S1", Parameter(2, 16), [(Parameter(2, 16), 0), (Parameter(11, 16), 0)])
    assert e.pattern(P("a1,16^3 - a1,16"))[2] == [(Parameter(1, 16), 0), (Parameter(1, 16), 1), (Parameter(1, 16), -1)]
    assert e.pattern(P("-a2,15^2 + 1"))[0] == "S3"
    assert e.pattern(P("a1,16^2 + 1")) is None
    assert e.pattern(P("a1,16 + a2,16")) is None
    e2 = _engine(2)
    assert e2.pattern(P("a1,16^2 + 1"))[2] == [(Parameter(1, 16), 1)]
    assert len(e2.pattern(P("a1,16^3 + a1,16"))[2]) == 2


def test_char_mode_parsing():
    assert CharMode.parse("generic").p is None
    assert CharMode.parse("3").p == 3
    with pytest.raises(ValueError):
        CharMode.parse("4")


def test_generic_verdicts_and_certificates():
    for fam in enumerate_families(4):
        t = prove_no_subalgebra(fam)
        assert t.verdict == "NoSubalgebra"
        assert all(leaf.constant for leaf in t.leaves)
        assert set(t.caveat) <= {2}


def test_family_1_case_structure():
    t = prove_no_subalgebra(family_by_number(1))
    first = [b.assumptions for b in t.branches if b.parent == 0]
    assert first == [["a1,16 = 0"], ["a1,16 = 1"], ["a1,16 = -1"]]
    assert t.branches[1].split_rule == "S2"


def test_single_step_families():
    assert len(prove_no_subalgebra(family_by_number(6)).branches) == 1
    t16 = prove_no_subalgebra(family_by_number(16))
    assert len(t16.nodes) == 1 and t16.nodes[0].info["pair"] == [1, 1]


def test_depth_bound_gives_undecided():
    t = prove_no_subalgebra(family_by_number(1), config=EngineConfig(max_depth=1))
    assert t.verdict == "Undecided"
    assert any(leaf.note == "search bound exceeded" for leaf in t.leaves)


def test_traces_are_deterministic():
    a = json.dumps(prove_no_subalgebra(family_by_number(3)).to_json())
    b = json.dumps(prove_no_subalgebra(family_by_number(3)).to_json())
    assert a == b


def _leaf_paths(trace, point, p):
    """Branches reachable for ``point``: follow every child whose assumption holds mod p."""
    kids = {}
    for b in trace.branches:
        if b.parent is not None:
            kids.setdefault(b.parent, []).append(b)
    out, todo = [], [0]
    while todo:
        bid = todo.pop()
        if bid not in kids:
            out.append(bid)
            continue
        for k in kids[bid]:
            var, val = k.assumptions[-1].split(" = ")
            if (point[Parameter.parse(var)] - int(val)) % p == 0:
                todo.append(k.id)
    return out


def _value(q, point, p):
    total = 0
    for m, c in q.terms.items():
        term = c
        for v, e in m:
            term *= point[v] ** e
        total += term
    return total % p


@pytest.mark.parametrize("n,p,mode", [(2, 3, 3), (2, 5, 5), (3, 2, 2), (3, 3, 3), (3, 5, 5), (3, 3, None),
                                      (3, 5, None), (2, 5, None)])
def test_traces_are_sound_and_complete_on_real_solutions(n, p, mode):
    table = structure_table(n)
    leaf_ok = {"SolutionFound", "Undecided"}
    for fam in enumerate_families(n):
        m = len(fam.params)
        pts = np.array(list(itertools.product(range(p), repeat=m)), dtype=np.int64).reshape(p ** m, m)
        closed = check_subspaces_batched(instance_matrices(fam, pts, p), p, table)
        assert (compile_constraints(fam).satisfied(pts, p) == closed).all()
        trace = prove_no_subalgebra(fam, mode)
        leaves = {leaf.branch: leaf for leaf in trace.leaves}
        if closed.any():
            assert trace.verdict != "NoSubalgebra"
        for row in pts[closed]:
            point = dict(zip(fam.params, map(int, row)))
            paths = _leaf_paths(trace, point, p)
            assert paths
            for bid in paths:
                assert leaves[bid].verdict in leaf_ok
                visible = set(trace.ancestors(bid))
                for node in trace.nodes:
                    if node.branch in visible:
                        assert _value(node.poly, point, p) == 0, (fam.number, node.to_json())


@pytest.mark.parametrize("mode", [None, 2, 3])
def test_traces_replay(mode):
    for fam in enumerate_families(4):
        rep = verify_trace(json.loads(json.dumps(prove_no_subalgebra(fam, mode).to_json())))
        assert rep.ok, rep.errors[:3]


def test_solution_leaves_are_real_subalgebras_in_characteristic_two():
    t = prove_no_subalgebra(family_by_number(1), 2)
    sols = [leaf for leaf in t.leaves if leaf.verdict == "SolutionFound"]
    assert sols
    fam = family_by_number(1)
    table = structure_table(4)
    for leaf in sols:
        vals = np.array([[leaf.assignment[str(q)] for q in fam.params]])
        assert check_subspaces_batched(instance_matrices(fam, vals, 2), 2, table).all()
