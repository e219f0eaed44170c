from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from cliffcheck.bases import (CanonicalBasisFamily, enumerate_families, families_json, family, family_by_number,
                              field_instance, instance_matrices, render_family, symbolic_instance)
from cliffcheck.linalg import rref
from cliffcheck.scalars import MissingParameter, PrimeField
from cliffcheck.scan import functional_count

GOLDEN = Path(__file__).parent / "fixtures" / "canonical_bases_n4.txt"


def golden_lines():
    out = {}
    for line in GOLDEN.read_text().splitlines():
        num, body = line.split(") ", 1)
        out[int(num.lstrip("("))] = body
    return out


def test_render_matches_golden_listing():
    gold = golden_lines()
    fams = enumerate_families(4)
    assert [f.number for f in fams] == list(range(1, 17))
    for f in fams:
        assert render_family(f) == gold[f.number]


def test_family_structure():
    f1 = family_by_number(1)
    assert f1.free_col == 16 and len(f1.params) == 15
    assert str(f1.params[0]) == "a1,16"
    f16 = family_by_number(16)
    assert f16.free_col == 1 and f16.params == []
    assert [len(f.params) for f in enumerate_families(4)] == list(range(15, -1, -1))


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_family_sizes_sum_to_hyperplane_count(n, p):
    assert sum(p ** len(f.params) for f in enumerate_families(n)) == functional_count(p, n)


def test_errors():
    with pytest.raises(ValueError):
        enumerate_families(0)
    with pytest.raises(ValueError):
        family(4, 17)
    with pytest.raises(ValueError):
        family_by_number(0)


def test_json_roundtrip():
    for f in enumerate_families(4):
        assert CanonicalBasisFamily.from_json(json.loads(json.dumps(f.to_json()))) == f
    data = json.loads(families_json(4))
    assert len(data) == 16 and data[0]["vectors"][0] == {"pivot": "1", "param": "a1,16"}
    bad = family_by_number(2).to_json()
    bad["vectors"][0]["pivot"] = "e1"
    with pytest.raises(ValueError):
        CanonicalBasisFamily.from_json(bad)


def test_instances():
    f = family_by_number(1)
    vecs = symbolic_instance(f).vectors
    assert str(vecs[0]) == "1 + a1,16*e1234"
    F = PrimeField(3)
    inst = field_instance(f, {p: 2 for p in f.params}, F)
    assert str(inst.vectors[1]) == "e1 + 2*e1234"
    with pytest.raises(MissingParameter):
        field_instance(f, {}, F)


def test_instance_matrices_are_rref():
    rng = np.random.default_rng(0)
    for f in enumerate_families(4):
        vals = rng.integers(0, 5, (3, len(f.params)))
        for m in instance_matrices(f, vals, 5):
            reduced, pivots = rref(m, 5)
            assert (reduced == m).all()
            assert f.free_col - 1 not in pivots
