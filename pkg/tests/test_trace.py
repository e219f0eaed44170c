from __future__ import annotations

import copy
import json

import pytest

from cliffcheck.bases import family_by_number
from cliffcheck.closure import prove_no_subalgebra
from cliffcheck.trace import verify_trace


@pytest.fixture(scope="module")
def trace1():
    return json.loads(json.dumps(prove_no_subalgebra(family_by_number(1)).to_json()))


def test_clean_trace_replays(trace1):
    rep = verify_trace(trace1)
    assert rep.ok
    assert rep.checked_nodes == len(trace1["nodes"])
    assert rep.checked_leaves == len(trace1["leaves"])
    assert rep.caveat == [2]


def _first(trace, rule):
    return next(n for n in trace["nodes"] if n["rule"] == rule)


@pytest.mark.parametrize("rule", ["product", "combine", "content", "solve", "substitute", "assume"])
def test_tampered_node_is_rejected(trace1, rule):
    bad = copy.deepcopy(trace1)
    node = _first(bad, rule)
    node["constraint"] = node["constraint"] + " + 1" if node["constraint"] != "1" else "2"
    assert not verify_trace(bad).ok


def test_wrong_divisor_is_rejected(trace1):
    bad = copy.deepcopy(trace1)
    _first(bad, "content")["divisor"] += 1
    assert not verify_trace(bad).ok


def test_missing_child_breaks_exhaustiveness(trace1):
    bad = copy.deepcopy(trace1)
    victim = next(b for b in bad["branches"] if b["assumptions"] == ["a1,16 = -1"])
    dropped = {victim["id"]}
    changed = True
    while changed:
        changed = False
        for b in bad["branches"]:
            if b["parent"] in dropped and b["id"] not in dropped:
                dropped.add(b["id"])
                changed = True
    bad["branches"] = [b for b in bad["branches"] if b["id"] not in dropped]
    bad["nodes"] = [n for n in bad["nodes"] if n["parent"] not in dropped]
    bad["leaves"] = [leaf for leaf in bad["leaves"] if leaf["id"] not in dropped]
    rep = verify_trace(bad)
    assert not rep.ok
    assert any("not exhaustive" in e for e in rep.errors)


def test_leaf_without_constant_witness_is_rejected(trace1):
    bad = copy.deepcopy(trace1)
    bad["leaves"][0]["witness"] = 0
    assert not verify_trace(bad).ok


def test_unclosed_branch_is_rejected(trace1):
    bad = copy.deepcopy(trace1)
    bad["leaves"].pop()
    assert not verify_trace(bad).ok


def test_understated_caveat_is_rejected(trace1):
    bad = copy.deepcopy(trace1)
    bad["caveat"] = []
    assert not verify_trace(bad).ok
