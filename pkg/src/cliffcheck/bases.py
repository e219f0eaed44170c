"""Canonical (reduced row-echelon) bases of the hyperplanes of g(n, F).

A hyperplane in RREF has exactly one non-pivot coordinate ``free_col``.
The basis vector with pivot ``p < free_col`` carries the parameter
``a_{p,free_col}`` on the free blade; pivots above ``free_col`` are bare blades.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .blades import MAX_N, Blade, Multivector, Signature, parse_blade, position_blade, render_blade
from .scalars import QQ, IntPoly, MissingParameter, Parameter


@dataclass(frozen=True)
class BasisVector:
    pivot: int
    param: Optional[Parameter] = None


@dataclass(frozen=True)
class CanonicalBasisFamily:
    n: int
    free_col: int
    vectors: tuple[BasisVector, ...]

    @property
    def number(self) -> int:
        """1-based family number; family 1 has the top blade free."""
        return (1 << self.n) - self.free_col + 1

    @property
    def params(self) -> list[Parameter]:
        return [v.param for v in self.vectors if v.param is not None]

    @property
    def free_blade(self) -> Blade:
        return position_blade(self.free_col, self.n)

    def to_json(self) -> dict:
        return {
            "free_col": self.free_col,
            "vectors": [
                {"pivot": render_blade(position_blade(v.pivot, self.n)),
                 "param": str(v.param) if v.param else None}
                for v in self.vectors
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping, n: int = 4) -> CanonicalBasisFamily:
        from .blades import blade_position
        fam = family(n, int(data["free_col"]))
        got = tuple(
            BasisVector(blade_position(parse_blade(v["pivot"], n)),
                        Parameter.parse(v["param"]) if v.get("param") else None)
            for v in data["vectors"]
        )
        if got != fam.vectors:
            raise ValueError(f"vectors do not form the canonical family with free_col={fam.free_col}")
        return fam


def family(n: int, free_col: int) -> CanonicalBasisFamily:
    size = 1 << n
    if not 1 <= free_col <= size:
        raise ValueError(f"free_col {free_col} outside 1..{size}")
    vectors = tuple(
        BasisVector(p, Parameter(i, free_col) if p < free_col else None)
        for i, p in enumerate((q for q in range(1, size + 1) if q != free_col), start=1)
    )
    return CanonicalBasisFamily(n, free_col, vectors)


def enumerate_families(n: int = 4) -> list[CanonicalBasisFamily]:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in 1..{MAX_N}")
    return [family(n, c) for c in range((1 << n), 0, -1)]


def family_by_number(number: int, n: int = 4) -> CanonicalBasisFamily:
    size = 1 << n
    if not 1 <= number <= size:
        raise ValueError(f"family number {number} outside 1..{size}")
    return family(n, size - number + 1)


@dataclass
class BasisInstance:
    family: CanonicalBasisFamily
    assignment: dict
    vectors: list[Multivector] = field(default_factory=list)


def _instantiate(fam: CanonicalBasisFamily, value, one, sig: Signature | None) -> list[Multivector]:
    free = fam.free_blade
    out = []
    for v in fam.vectors:
        coeffs = {position_blade(v.pivot, fam.n): one}
        if v.param is not None:
            coeffs[free] = value(v.param)
        out.append(Multivector(coeffs, fam.n, sig))
    return out


def symbolic_instance(fam: CanonicalBasisFamily, sig: Signature | None = None) -> BasisInstance:
    assignment = {p: IntPoly.var(p) for p in fam.params}
    return BasisInstance(fam, assignment, _instantiate(fam, assignment.__getitem__, IntPoly.const(1), sig))


def field_instance(fam: CanonicalBasisFamily, assignment: Mapping[Parameter, object], fld=QQ,
                   sig: Signature | None = None) -> BasisInstance:
    values = {}
    for p in fam.params:
        if p not in assignment:
            raise MissingParameter(f"no value for parameter {p}")
        values[p] = fld(int(assignment[p])) if isinstance(assignment[p], int) else assignment[p]
    return BasisInstance(fam, values, _instantiate(fam, values.__getitem__, fld(1), sig))


def instance_matrices(fam: CanonicalBasisFamily, values: np.ndarray, p: int) -> np.ndarray:
    """Stack of basis matrices (B, 2^n - 1, 2^n) for parameter rows ``values`` (B, len(params))."""
    values = np.asarray(values, dtype=np.int64) % p
    size = 1 << fam.n
    out = np.zeros((values.shape[0], size - 1, size), dtype=np.int64)
    k = 0
    for i, v in enumerate(fam.vectors):
        out[:, i, v.pivot - 1] = 1
        if v.param is not None:
            out[:, i, fam.free_col - 1] = values[:, k]
            k += 1
    return out


def render_family(fam: CanonicalBasisFamily) -> str:
    """One line, e.g. ``a1 = 1 + a1,16*e1234, ..., a15 = e234 + a15,16*e1234``."""
    free = render_blade(fam.free_blade)
    parts = []
    for i, v in enumerate(fam.vectors, start=1):
        body = render_blade(position_blade(v.pivot, fam.n))
        if v.param is not None:
            body += f" + {v.param}*{free}"
        parts.append(f"a{i} = {body}")
    return ", ".join(parts)


def families_json(n: int = 4) -> str:
    return json.dumps([f.to_json() for f in enumerate_families(n)], indent=1)
