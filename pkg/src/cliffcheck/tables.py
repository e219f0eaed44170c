"""Multiplication tables: generation, rendering, and comparison with a reference transcription."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Tuple

from .blades import Signature, SignedBlade, all_blades, blade_product, parse_signed_blade, render_blade

FORMATS = ("text", "csv", "json")
REFERENCE_N4 = "reference_table_n4.json"


class UnsupportedFormat(ValueError):
    pass


class MalformedReference(ValueError):
    pass


def product_table(n: int = 4, sig: Signature | None = None) -> List[List[SignedBlade]]:
    blades = all_blades(n)
    return [[blade_product(a, b, sig) for b in blades] for a in blades]


def cell_text(sb: SignedBlade) -> str:
    return str(sb)


def generate_table(n: int = 4, sig: Signature | None = None, fmt: str = "text") -> str:
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    names = [render_blade(b) for b in all_blades(n)]
    rows = product_table(n, sig)
    if fmt == "json":
        return json.dumps({
            "n": n,
            "blades": names,
            "cells": [[{"sign": c.sign, "blade": render_blade(c.blade)} for c in row] for row in rows],
        }, indent=1)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + names)
        for name, row in zip(names, rows):
            w.writerow([name] + [cell_text(c) for c in row])
        return buf.getvalue()
    if n > 6:
        raise UnsupportedFormat("text rendering is limited to n <= 6")
    width = max(len(x) for x in names) + 2
    lines = ["".rjust(width) + "".join(x.rjust(width) for x in names)]
    for name, row in zip(names, rows):
        lines.append(name.rjust(width) + "".join(cell_text(c).rjust(width) for c in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReferenceTable:
    n: int
    blades: Tuple[str, ...]
    cells: Dict[Tuple[str, str], str]
    provenance: Dict[Tuple[str, str], int]

    @classmethod
    def from_json(cls, data: dict) -> ReferenceTable:
        try:
            n = int(data["n"])
            blades = tuple(data["blades"])
            cells, prov = {}, {}
            for c in data["cells"]:
                key = (c["row"], c["col"])
                if key in cells:
                    raise MalformedReference(f"duplicate cell {key}")
                cells[key] = c["value"]
                prov[key] = int(c.get("table", 0))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedReference):
                raise
            raise MalformedReference(f"bad reference table: {exc}") from exc
        missing = [(a, b) for a in blades for b in blades if (a, b) not in cells]
        if missing:
            raise MalformedReference(f"{len(missing)} cells missing, e.g. {missing[0]}")
        for value in cells.values():
            try:
                _parse_value(value, n)
            except ValueError as exc:
                raise MalformedReference(str(exc)) from exc
        return cls(n, blades, cells, prov)

    @classmethod
    def load(cls, path: str | Path | None = None) -> ReferenceTable:
        if path is None:
            text = resources.files("cliffcheck.data").joinpath(REFERENCE_N4).read_text()
        else:
            text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedReference(f"not JSON: {exc}") from exc
        return cls.from_json(data)


def _parse_value(text: str, n: int) -> SignedBlade:
    return parse_signed_blade(text, n)


@dataclass(frozen=True)
class DiffEntry:
    row: str
    col: str
    reference: str
    computed: str
    table: int = 0


@dataclass(frozen=True)
class TableDiff:
    entries: Tuple[DiffEntry, ...]

    def __bool__(self):
        return bool(self.entries)

    def __len__(self):
        return len(self.entries)

    def cells(self) -> set[Tuple[str, str]]:
        return {(e.row, e.col) for e in self.entries}

    def render(self, fmt: str = "text") -> str:
        if fmt == "json":
            return json.dumps([e.__dict__ for e in self.entries], indent=1)
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["row", "col", "reference", "computed", "table"])
            for e in self.entries:
                w.writerow([e.row, e.col, e.reference, e.computed, e.table])
            return buf.getvalue()
        if fmt != "text":
            raise UnsupportedFormat(f"unknown format {fmt!r}")
        if not self.entries:
            return "tables agree\n"
        lines = [f"{len(self.entries)} mismatching cell(s):"]
        for e in self.entries:
            lines.append(f"  {e.row} * {e.col}: reference {e.reference}, computed {e.computed} (table {e.table})")
        return "\n".join(lines) + "\n"


def verify_against_reference(reference: ReferenceTable, sig: Signature | None = None) -> TableDiff:
    n = reference.n
    out = []
    for a in reference.blades:
        for b in reference.blades:
            ref = _parse_value(reference.cells[(a, b)], n)
            got = blade_product(parse_signed_blade(a, n).blade, parse_signed_blade(b, n).blade, sig)
            if ref != got:
                out.append(DiffEntry(a, b, reference.cells[(a, b)], str(got), reference.provenance[(a, b)]))
    return TableDiff(tuple(out))
