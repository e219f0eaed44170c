"""Exact scalars: rationals, prime fields and integer polynomials in basis parameters."""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Dict, Iterable, Iterator, Mapping, NamedTuple, Tuple

# Characteristic 0 coefficients are plain fractions.
Rational = Fraction


@lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def prime_factors(n: int) -> set[int]:
    n = abs(n)
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1
    if n > 1:
        out.add(n)
    return out


class FieldMismatch(ValueError):
    pass


class PrimeFieldElement:
    """Residue class modulo a prime."""

    __slots__ = ("modulus", "residue")

    def __init__(self, residue: int, modulus: int):
        if not is_prime(modulus):
            raise ValueError(f"modulus {modulus} is not prime")
        self.modulus = modulus
        self.residue = residue % modulus

    def _coerce(self, other) -> int:
        if isinstance(other, PrimeFieldElement):
            if other.modulus != self.modulus:
                raise FieldMismatch(f"F_{self.modulus} vs F_{other.modulus}")
            return other.residue
        if isinstance(other, int):
            return other
        return NotImplemented

    def _new(self, value: int) -> PrimeFieldElement:
        return PrimeFieldElement(value, self.modulus)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._new(self.residue + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._new(self.residue - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._new(o - self.residue)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._new(self.residue * o)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.residue)

    def inverse(self) -> PrimeFieldElement:
        if self.residue == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._new(pow(self.residue, -1, self.modulus))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * self._new(o).inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self._new(pow(self.residue, e, self.modulus))

    def __eq__(self, other):
        if isinstance(other, PrimeFieldElement):
            return self.modulus == other.modulus and self.residue == other.residue
        if isinstance(other, int):
            return (other - self.residue) % self.modulus == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.modulus))

    def __bool__(self):
        return self.residue != 0

    def __int__(self):
        return self.residue

    def __repr__(self):
        return f"{self.residue} (mod {self.modulus})"

    def __str__(self):
        return str(self.residue)


class PrimeField:
    """Field descriptor for F_p; calling it maps integers into the field."""

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p

    characteristic = property(lambda self: self.p)

    def __call__(self, value: int) -> PrimeFieldElement:
        return PrimeFieldElement(int(value), self.p)

    def elements(self) -> list[PrimeFieldElement]:
        return [self(i) for i in range(self.p)]

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


class RationalField:
    characteristic = 0

    def __call__(self, value) -> Fraction:
        return Fraction(value)

    def __repr__(self):
        return "RationalField()"


QQ = RationalField()


class Parameter(NamedTuple):
    """The symbol a_{row,col}; ordering is by (row, col)."""

    row: int
    col: int

    def __str__(self):
        return f"a{self.row},{self.col}"

    @classmethod
    def parse(cls, text: str) -> Parameter:
        m = re.fullmatch(r"\s*a(\d+),(\d+)\s*", text)
        if not m:
            raise ValueError(f"malformed parameter name {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


Monomial = Tuple[Tuple[Parameter, int], ...]
ONE: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_key(m: Monomial):
    """Sort key putting larger monomials (graded lex) first."""
    return (-mono_degree(m), tuple((v, -e) for v, e in m))


def _render_mono(m: Monomial) -> str:
    return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in m)


class MissingParameter(KeyError):
    pass


class IntPoly:
    """Multivariate polynomial with integer coefficients in Parameters.

    Immutable; the zero polynomial has no terms.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | None = None):
        self._terms: Dict[Monomial, int] = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    @classmethod
    def const(cls, c: int) -> IntPoly:
        return cls({ONE: c})

    @classmethod
    def var(cls, v: Parameter) -> IntPoly:
        return cls({((v, 1),): 1})

    @classmethod
    def coerce(cls, x) -> IntPoly:
        if isinstance(x, IntPoly):
            return x
        if isinstance(x, int):
            return cls.const(x)
        if isinstance(x, Parameter):
            return cls.var(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to IntPoly")

    @property
    def terms(self) -> Dict[Monomial, int]:
        return self._terms

    def items(self) -> list[tuple[Monomial, int]]:
        """Terms in canonical (graded lex, descending) order."""
        return sorted(self._terms.items(), key=lambda t: mono_key(t[0]))

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPoly.const(other)
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and ONE in self._terms)

    def constant_value(self) -> int:
        return self._terms.get(ONE, 0)

    def degree(self) -> int:
        return max((mono_degree(m) for m in self._terms), default=-1)

    def variables(self) -> set[Parameter]:
        return {v for m in self._terms for v, _ in m}

    def leading(self) -> tuple[Monomial, int]:
        return min(self._terms.items(), key=lambda t: mono_key(t[0]))

    def __add__(self, other):
        other = IntPoly.coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return IntPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return IntPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-IntPoly.coerce(other))

    def __rsub__(self, other):
        return IntPoly.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPoly({m: c * other for m, c in self._terms.items()})
        other = IntPoly.coerce(other)
        out: Dict[Monomial, int] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power")
        return reduce(lambda a, b: a * b, [self] * e, IntPoly.const(1))

    def mod(self, p: int) -> IntPoly:
        """Reduce coefficients into [0, p)."""
        return IntPoly({m: c % p for m, c in self._terms.items()})

    def subs(self, values: Mapping[Parameter, IntPoly]) -> IntPoly:
        if not values or not self.variables() & values.keys():
            return self
        out = IntPoly()
        for m, c in self._terms.items():
            term = IntPoly.const(c)
            rest = []
            for v, e in m:
                if v in values:
                    term = term * (values[v] ** e)
                else:
                    rest.append((v, e))
            out = out + term * IntPoly({tuple(rest): 1})
        return out

    def __repr__(self):
        return f"IntPoly({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m, c in self.items():
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not m:
                body = str(a)
            elif a == 1:
                body = _render_mono(m)
            else:
                body = f"{a}*{_render_mono(m)}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    _TERM = re.compile(r"([+-]?)\s*([^+-]+)")

    @classmethod
    def parse(cls, text: str) -> IntPoly:
        """Inverse of ``str``: e.g. ``"-a3,16 - 2*a2,16*a11,16^2 + 1"``."""
        s = text.strip()
        if s == "0":
            return cls()
        out = cls()
        pos = 0
        for m in cls._TERM.finditer(s):
            if s[pos:m.start()].strip():
                raise ValueError(f"malformed polynomial {text!r}")
            pos = m.end()
            sign = -1 if m.group(1) == "-" else 1
            coeff = sign
            mono: Dict[Parameter, int] = {}
            for factor in m.group(2).strip().split("*"):
                factor = factor.strip()
                if re.fullmatch(r"\d+", factor):
                    coeff *= int(factor)
                    continue
                fm = re.fullmatch(r"a(\d+),(\d+)(?:\^(\d+))?", factor)
                if not fm:
                    raise ValueError(f"malformed factor {factor!r} in {text!r}")
                v = Parameter(int(fm.group(1)), int(fm.group(2)))
                mono[v] = mono.get(v, 0) + int(fm.group(3) or 1)
            out = out + cls({tuple(sorted(mono.items())): coeff})
        if s[pos:].strip():
            raise ValueError(f"malformed polynomial {text!r}")
        return out


def poly_add(a: IntPoly, b: IntPoly) -> IntPoly:
    return a + b


def poly_mul(a: IntPoly, b: IntPoly) -> IntPoly:
    return a * b


def poly_eval(p: IntPoly, assignment: Mapping[Parameter, object], field=QQ):
    """Evaluate ``p`` with integer coefficients mapped through ``field``."""
    total = field(0)
    for m, c in p.terms.items():
        term = field(c)
        for v, e in m:
            if v not in assignment:
                raise MissingParameter(f"no value for parameter {v}")
            term = term * (field(assignment[v]) if isinstance(assignment[v], int) else assignment[v]) ** e
        total = total + term
    return total


def integer_content(p: IntPoly) -> tuple[int, IntPoly]:
    """Split ``p`` as ``g * q`` with ``g`` the positive gcd of the coefficients."""
    if not p:
        raise ValueError("content of the zero polynomial")
    g = reduce(gcd, (abs(c) for c in p.terms.values()))
    return g, IntPoly({m: c // g for m, c in p.terms.items()})


def iter_params(polys: Iterable[IntPoly]) -> Iterator[Parameter]:
    seen = set()
    for p in polys:
        for v in sorted(p.variables()):
            if v not in seen:
                seen.add(v)
                yield v
