"""Basis blades of g(n, F) and the associative product on multivectors.

A blade e_A is stored as a bitmask: bit ``i - 1`` set means e_i occurs in A.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Generic, Iterable, Mapping, NamedTuple, TypeVar

MAX_N = 16

S = TypeVar("S")


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    squares: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.squares):
            raise ValueError("generator squares must be +1 or -1")

    @classmethod
    def default(cls, n: int) -> Signature:
        return _default_signature(n)

    @classmethod
    def parse(cls, text: str) -> Signature:
        return cls(tuple(int(s) for s in text.split(",")))

    @property
    def n(self) -> int:
        return len(self.squares)

    @property
    def negative_mask(self) -> int:
        return sum(1 << i for i, s in enumerate(self.squares) if s == -1)


@lru_cache(maxsize=None)
def _default_signature(n: int) -> Signature:
    return Signature((-1,) * n)


@dataclass(frozen=True, order=True)
class Blade:
    mask: int
    n: int = 4

    def __post_init__(self):
        if not 0 <= self.n <= MAX_N:
            raise ValueError(f"n must be in 0..{MAX_N}")
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} not inside {{1..{self.n}}}")

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int = 4) -> Blade:
        mask = 0
        for i in indices:
            if not 1 <= i <= n:
                raise ValueError(f"index {i} outside 1..{n}")
            mask |= 1 << (i - 1)
        return cls(mask, n)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.mask >> i & 1)

    @property
    def grade(self) -> int:
        return bin(self.mask).count("1")

    def __str__(self):
        return render_blade(self)


class SignedBlade(NamedTuple):
    sign: int
    blade: Blade

    def __str__(self):
        name = render_blade(self.blade)
        return name if self.sign > 0 else "-" + name


def reorder_sign(a: int, b: int) -> int:
    """(-1)^t where t counts pairs (j in a, i in b) with j > i."""
    t = 0
    a >>= 1
    while a:
        t += bin(a & b).count("1")
        a >>= 1
    return -1 if t & 1 else 1


def mask_product(a: int, b: int, negative_mask: int) -> tuple[int, int]:
    """Sign and mask of e_a * e_b for the given set of generators squaring to -1."""
    sign = reorder_sign(a, b)
    if bin(a & b & negative_mask).count("1") & 1:
        sign = -sign
    return sign, a ^ b


def blade_product(a: Blade, b: Blade, sig: Signature | None = None) -> SignedBlade:
    sig = sig or Signature.default(a.n)
    if not (a.n == b.n == sig.n):
        raise DimensionMismatch(f"blades of dimension {a.n}, {b.n} with signature of length {sig.n}")
    sign, mask = mask_product(a.mask, b.mask, sig.negative_mask)
    return SignedBlade(sign, Blade(mask, a.n))


@lru_cache(maxsize=None)
def blade_order(n: int) -> tuple[int, ...]:
    """Masks ordered by grade, then lexicographically by index set."""
    def key(mask):
        idx = tuple(i for i in range(n) if mask >> i & 1)
        return (len(idx), idx)
    return tuple(sorted(range(1 << n), key=key))


@lru_cache(maxsize=None)
def _position_index(n: int) -> Dict[int, int]:
    return {mask: i + 1 for i, mask in enumerate(blade_order(n))}


def blade_position(b: Blade) -> int:
    return _position_index(b.n)[b.mask]


def position_blade(i: int, n: int = 4) -> Blade:
    if not 1 <= i <= 1 << n:
        raise IndexError(f"position {i} outside 1..{1 << n}")
    return Blade(blade_order(n)[i - 1], n)


def all_blades(n: int = 4) -> list[Blade]:
    return [Blade(m, n) for m in blade_order(n)]


def render_blade(b: Blade) -> str:
    if b.mask == 0:
        return "1"
    idx = b.indices
    if b.n <= 9:
        return "e" + "".join(map(str, idx))
    return "e" + ".".join(map(str, idx))


_BLADE_RE = re.compile(r"e(\d+(?:\.\d+)*)")


def parse_blade(text: str, n: int = 4) -> Blade:
    s = text.strip()
    if s in ("1", "e0"):
        return Blade(0, n)
    m = _BLADE_RE.fullmatch(s)
    if not m:
        raise ValueError(f"malformed blade name {text!r}")
    body = m.group(1)
    idx = [int(t) for t in body.split(".")] if "." in body else [int(c) for c in body]
    if any(j <= i for i, j in zip(idx, idx[1:])):
        raise ValueError(f"indices in {text!r} are not strictly increasing")
    if any(not 1 <= i <= n for i in idx):
        raise ValueError(f"index in {text!r} outside 1..{n}")
    return Blade.from_indices(idx, n)


def parse_signed_blade(text: str, n: int = 4) -> SignedBlade:
    s = text.strip()
    sign = 1
    if s.startswith("-"):
        sign, s = -1, s[1:]
    elif s.startswith("+"):
        s = s[1:]
    return SignedBlade(sign, parse_blade(s, n))


class Multivector(Generic[S]):
    """Finite sum of blades with coefficients from one scalar domain.

    Scalars need ``+``, ``*`` (also by plain ints) and truthiness for zero.
    """

    __slots__ = ("n", "sig", "coeffs")

    def __init__(self, coeffs: Mapping[Blade, S] | None = None, n: int = 4, sig: Signature | None = None):
        self.n = n
        self.sig = sig or Signature.default(n)
        if self.sig.n != n:
            raise DimensionMismatch("signature length differs from n")
        out: Dict[Blade, S] = {}
        for b, c in (coeffs or {}).items():
            if b.n != n:
                raise DimensionMismatch(f"blade {b} has n={b.n}, expected {n}")
            if c:
                out[b] = c
        self.coeffs = out

    @classmethod
    def blade(cls, b: Blade, coeff=1, sig: Signature | None = None) -> Multivector:
        return cls({b: coeff}, b.n, sig)

    @classmethod
    def scalar(cls, c, n: int = 4, sig: Signature | None = None) -> Multivector:
        return cls({Blade(0, n): c}, n, sig)

    def coeff(self, b: Blade, zero=0):
        return self.coeffs.get(b, zero)

    def _check(self, other: Multivector):
        if not isinstance(other, Multivector):
            raise TypeError(f"expected Multivector, got {type(other).__name__}")
        if other.n != self.n or other.sig != self.sig:
            raise DimensionMismatch(f"multivectors over g({self.n}) and g({other.n}) or different signatures")

    def _new(self, coeffs) -> Multivector:
        return Multivector(coeffs, self.n, self.sig)

    def __add__(self, other: Multivector) -> Multivector:
        self._check(other)
        out = dict(self.coeffs)
        for b, c in other.coeffs.items():
            out[b] = out[b] + c if b in out else c
        return self._new(out)

    def __neg__(self) -> Multivector:
        return self._new({b: -c for b, c in self.coeffs.items()})

    def __sub__(self, other: Multivector) -> Multivector:
        return self + (-other)

    def scale(self, s) -> Multivector:
        return self._new({b: s * c for b, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return mv_mul(self, other)
        return self.scale(other)

    def __rmul__(self, s):
        return self.scale(s)

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return self.n == other.n and self.sig == other.sig and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __bool__(self):
        return bool(self.coeffs)

    def terms(self) -> list[tuple[Blade, S]]:
        return sorted(self.coeffs.items(), key=lambda t: blade_position(t[0]))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for b, c in self.terms():
            text = str(c)
            if b.mask == 0:
                parts.append(text if " " not in text else f"({text})")
            elif text == "1":
                parts.append(render_blade(b))
            elif text == "-1":
                parts.append("-" + render_blade(b))
            else:
                if " " in text:
                    text = f"({text})"
                parts.append(f"{text}*{render_blade(b)}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        return f"Multivector({str(self)!r})"


def mv_mul(a: Multivector, b: Multivector) -> Multivector:
    a._check(b)
    neg = a.sig.negative_mask
    out: dict = {}
    for ba, ca in a.coeffs.items():
        for bb, cb in b.coeffs.items():
            sign, mask = mask_product(ba.mask, bb.mask, neg)
            blade = Blade(mask, a.n)
            term = ca * cb
            if sign < 0:
                term = -term
            out[blade] = out[blade] + term if blade in out else term
    return Multivector(out, a.n, a.sig)


def mv_add(a: Multivector, b: Multivector) -> Multivector:
    return a + b


def mv_scale(s, a: Multivector) -> Multivector:
    return a.scale(s)


def parse_multivector(text: str, n: int = 4, sig: Signature | None = None) -> Multivector[int]:
    """Parse an integer multivector such as ``"1 + 2*e1234 - e13"``."""
    s = text.strip()
    if s == "0":
        return Multivector({}, n, sig)
    out: Dict[Blade, int] = {}
    for raw in re.split(r"(?=[+-])", s):
        raw = raw.strip()
        if not raw:
            continue
        m = re.fullmatch(r"([+-])?\s*(\d+)?\s*\*?\s*(e[\d.]+)?", raw)
        if not m or not (m.group(2) or m.group(3)):
            raise ValueError(f"malformed multivector term {raw!r}")
        c = int(m.group(2) or 1) * (-1 if m.group(1) == "-" else 1)
        b = parse_blade(m.group(3), n) if m.group(3) else Blade(0, n)
        out[b] = out.get(b, 0) + c
    return Multivector(out, n, sig)
