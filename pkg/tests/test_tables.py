from __future__ import annotations

import csv
import io
import json

import pytest
from oracles import blade_subsets, bubble_product, signed_name

from cliffcheck.blades import parse_signed_blade
from cliffcheck.tables import (MalformedReference, ReferenceTable, UnsupportedFormat, generate_table,
                               product_table, verify_against_reference)


def cell(n, a, b):
    rows = list(csv.reader(io.StringIO(generate_table(n, fmt="csv"))))
    cols = rows[0]
    row = next(r for r in rows[1:] if r[0] == a)
    return row[cols.index(b)]


def test_table_examples():
    assert cell(4, "e2", "e13") == "-e123"
    assert cell(4, "e1234", "e1234") == "1"
    names = list(csv.reader(io.StringIO(generate_table(4, fmt="csv"))))[0][1:]
    assert all(cell(4, "1", x) == x and cell(4, x, "1") == x for x in names)


@pytest.mark.parametrize("a,b,expected", [("e1", "e12", "-e2"), ("e234", "e12", "e134"), ("e2", "e3", "e23"),
                                          ("e123", "e134", "e24"), ("e12", "e34", "e1234")])
def test_products_used_in_hand_expansions(a, b, expected):
    assert cell(4, a, b) == expected


def test_every_cell_is_a_signed_blade():
    for row in product_table(4):
        for c in row:
            assert c.sign in (1, -1) and 0 <= c.blade.mask < 16


def test_formats():
    data = json.loads(generate_table(3, fmt="json"))
    assert data["cells"][1][1] == {"sign": -1, "blade": "1"}
    text = generate_table(2)
    assert text.splitlines()[1].split() == ["1", "1", "e1", "e2", "e12"]
    with pytest.raises(UnsupportedFormat):
        generate_table(4, fmt="xml")
    with pytest.raises(UnsupportedFormat):
        generate_table(7)


def test_reference_fixture_is_complete_and_verbatim():
    ref = ReferenceTable.load()
    assert len(ref.cells) == 256
    assert ref.cells[("e1", "e3")] == "e12"
    assert ref.cells[("e23", "e124")] == "e34"
    assert ref.provenance[("e1", "e3")] == 1 and ref.provenance[("e23", "e124")] == 2


def test_diff_against_reference():
    diff = verify_against_reference(ReferenceTable.load())
    assert {("e1", "e3"), ("e1", "e4"), ("e23", "e124")} <= diff.cells()
    assert ("e12", "e34") not in diff.cells()
    squares = {i: -1 for i in range(1, 5)}
    for e in diff.entries:
        a = parse_signed_blade(e.row).blade.indices
        b = parse_signed_blade(e.col).blade.indices
        assert signed_name(*bubble_product(a, b, squares)) == e.computed
        assert e.reference != e.computed


def test_diff_is_stable():
    a = verify_against_reference(ReferenceTable.load()).render("json")
    b = verify_against_reference(ReferenceTable.load()).render("json")
    assert a == b


def test_self_consistent_reference_gives_empty_diff(tmp_path):
    names = [signed_name(1, s) for s in blade_subsets(4)]
    names = sorted(names, key=lambda x: (len(x) if x != "1" else 0, x))
    squares = {i: -1 for i in range(1, 5)}
    cells = []
    for a in blade_subsets(4):
        for b in blade_subsets(4):
            cells.append({"row": signed_name(1, a), "col": signed_name(1, b),
                          "value": signed_name(*bubble_product(a, b, squares))})
    path = tmp_path / "ok.json"
    path.write_text(json.dumps({"n": 4, "blades": names, "cells": cells}))
    diff = verify_against_reference(ReferenceTable.load(path))
    assert not diff and diff.render() == "tables agree\n"


@pytest.mark.parametrize("payload", ['{"n": 4}', "not json",
                                     '{"n": 4, "blades": ["1"], "cells": []}',
                                     '{"n": 4, "blades": ["1"], "cells": [{"row": "1", "col": "1", "value": "x"}]}'])
def test_malformed_reference(tmp_path, payload):
    path = tmp_path / "bad.json"
    path.write_text(payload)
    with pytest.raises(MalformedReference):
        ReferenceTable.load(path)
