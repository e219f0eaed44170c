"""Exhaustive closure test of every hyperplane of g(n, F_p).

Each hyperplane is the kernel of a functional phi, normalized so that its first
nonzero coordinate is 1.  ker(phi) is closed under the product iff the bilinear
form (x, y) -> phi(xy) vanishes on ker(phi) x ker(phi).
"""

from __future__ import annotations

import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .blades import Multivector, Signature, blade_order, blade_position, mask_product, position_blade
from .linalg import batched_rref, inverse_table, reduce_rows, rref
from .scalars import PrimeFieldElement, is_prime

log = logging.getLogger(__name__)

PROGRESS_EVERY = 10 ** 6
FEASIBLE_PRIMES = (2, 3)


class InfeasibleScan(ValueError):
    def __init__(self, p: int, count: int):
        super().__init__(f"scan over F_{p} would examine {count} functionals; "
                         f"enable the long-run option to attempt it")
        self.p = p
        self.count = count


@dataclass(frozen=True)
class StructureTable:
    """sign[A, B] and result[A, B] for e_A e_B, indexed by 0-based blade position."""

    n: int
    sign: np.ndarray
    result: np.ndarray

    @property
    def size(self) -> int:
        return 1 << self.n

    def tensor(self) -> np.ndarray:
        """T[A, B, C] = coefficient of e_C in e_A e_B."""
        size = self.size
        t = np.zeros((size, size, size), dtype=np.int64)
        a, b = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        t[a, b, self.result] = self.sign
        return t


@lru_cache(maxsize=None)
def structure_table(n: int = 4, sig: Signature | None = None) -> StructureTable:
    sig = sig or Signature.default(n)
    order = blade_order(n)
    pos = {m: i for i, m in enumerate(order)}
    size = 1 << n
    sign = np.zeros((size, size), dtype=np.int64)
    result = np.zeros((size, size), dtype=np.int64)
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            s, m = mask_product(a, b, sig.negative_mask)
            sign[i, j] = s
            result[i, j] = pos[m]
    sign.setflags(write=False)
    result.setflags(write=False)
    return StructureTable(n, sign, result)


@dataclass(frozen=True)
class Functional:
    p: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if not any(c % self.p for c in self.coords):
            raise ValueError("zero functional")

    @classmethod
    def normalized(cls, coords: Sequence[int], p: int) -> Functional:
        c = [int(x) % p for x in coords]
        lead = next((x for x in c if x), 0)
        if not lead:
            raise ValueError("zero functional")
        inv = pow(lead, -1, p)
        return cls(p, tuple(x * inv % p for x in c))

    @classmethod
    def dual(cls, position: int, p: int, n: int = 4) -> Functional:
        """The coordinate functional picking the blade at 1-based ``position``."""
        c = [0] * (1 << n)
        c[position - 1] = 1
        return cls(p, tuple(c))

    @property
    def is_normalized(self) -> bool:
        return next(x for x in self.coords if x) == 1

    @property
    def leading(self) -> int:
        return next(i for i, x in enumerate(self.coords) if x)

    @property
    def trailing(self) -> int:
        return max(i for i, x in enumerate(self.coords) if x)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def to_json(self) -> list[int]:
        return list(self.coords)


def gram_matrix(phi: Functional, table: StructureTable) -> np.ndarray:
    return (table.sign * phi.array()[table.result]) % phi.p


def kernel_basis(phi: Functional) -> np.ndarray:
    """Columns e_j - (phi_j / phi_c) e_c for j != c, c the last nonzero coordinate.

    In blade-position order this is the canonical RREF basis whose free column is c.
    """
    p = phi.p
    coords = phi.array()
    c = phi.trailing
    inv = pow(int(coords[c]), -1, p)
    size = coords.size
    cols = []
    for j in range(size):
        if j == c:
            continue
        v = np.zeros(size, dtype=np.int64)
        v[j] = 1
        v[c] = (-coords[j] * inv) % p
        cols.append(v)
    return np.stack(cols, axis=1)


def check_functional(phi: Functional, table: StructureTable) -> bool:
    P = kernel_basis(phi)
    M = gram_matrix(phi, table)
    return not ((P.T @ M @ P) % phi.p).any()


def _as_matrix(vectors: Sequence[Multivector], n: int) -> tuple[np.ndarray, int]:
    p = None
    rows = []
    for v in vectors:
        row = np.zeros(1 << n, dtype=np.int64)
        for b, c in v.coeffs.items():
            if isinstance(c, PrimeFieldElement):
                if p is not None and c.modulus != p:
                    raise ValueError("vectors over different fields")
                p = c.modulus
                row[blade_position(b) - 1] = c.residue
            else:
                row[blade_position(b) - 1] = int(c)
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(len(rows), 1 << n), p


def check_subspace(vectors: Sequence[Multivector], p: int | None = None,
                   sig: Signature | None = None) -> bool:
    """True iff span(vectors) over F_p is closed under the product."""
    if not vectors:
        return True
    n = vectors[0].n
    sig = sig or vectors[0].sig
    mat, found = _as_matrix(vectors, n)
    p = p or found
    if p is None:
        raise ValueError("prime not given and vectors carry no field elements")
    return check_subspace_matrix(mat, p, structure_table(n, sig))


def check_subspace_matrix(mat: np.ndarray, p: int, table: StructureTable) -> bool:
    basis, pivots = rref(mat, p)
    if not pivots:
        return True
    products = np.einsum("ia,jb,abc->ijc", basis, basis, table.tensor()) % p
    rem = reduce_rows(products.reshape(-1, table.size), basis, pivots, p)
    return not rem.any()


def check_subspaces_batched(mats: np.ndarray, p: int, table: StructureTable) -> np.ndarray:
    """Vectorized ``check_subspace_matrix`` over a stack (B, k, N).

    Products are formed with float64 matmuls; entries stay below N^2 p^2, far
    inside the exact integer range of a double.
    """
    R, _ = batched_rref(mats, p)
    bsz, k, size = R.shape
    Rf = R.astype(np.float64)
    T = table.tensor().astype(np.float64)
    # RT[z, i, b, c] = sum_a R[z, i, a] T[a, b, c]
    RT = (Rf.reshape(bsz * k, size) @ T.reshape(size, size * size)).reshape(bsz, k, size, size)
    prods = np.matmul(Rf[:, None, :, :], RT)  # (B, i, j, c)
    prods = np.mod(prods, p).reshape(bsz, k * k, size)
    # a reduced basis expresses v as sum_t v[lead_t] * row_t
    nz = R != 0
    lead = np.argmax(nz, axis=2)
    valid = nz.any(axis=2)
    coef = np.take_along_axis(prods, np.broadcast_to(lead[:, None, :], (bsz, k * k, k)), axis=2)
    coef = coef * valid[:, None, :]
    rem = np.mod(prods - coef @ Rf, p)
    return ~rem.any(axis=(1, 2))


# exhaustive scan ---------------------------------------------------------

def functional_count(p: int, n: int = 4) -> int:
    return (p ** (1 << n) - 1) // (p - 1)


@dataclass
class ScanReport:
    p: int
    n: int
    examined: int
    closed: list[Functional] = field(default_factory=list)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "examined": self.examined,
                "closed": [f.to_json() for f in self.closed], "seconds": round(self.seconds, 3)}


@dataclass(frozen=True)
class Block:
    """Functionals with leading 1 at ``lead`` and tail index in [start, stop)."""

    lead: int
    start: int
    stop: int


def blocks(p: int, n: int = 4, chunk: int = 1 << 17) -> Iterator[Block]:
    size = 1 << n
    for lead in range(size):
        total = p ** (size - 1 - lead)
        for start in range(0, total, chunk):
            yield Block(lead, start, min(total, start + chunk))


def _block_functionals(block: Block, p: int, size: int) -> np.ndarray:
    tail_len = size - 1 - block.lead
    idx = np.arange(block.start, block.stop, dtype=np.int64)
    phi = np.zeros((idx.size, size), dtype=np.int64)
    phi[:, block.lead] = 1
    for d in range(tail_len):
        # most significant digit first, so enumeration is lexicographic
        phi[:, block.lead + 1 + d] = (idx // p ** (tail_len - 1 - d)) % p
    return phi


def closed_in_batch(phi: np.ndarray, lead: int, p: int, table: StructureTable) -> np.ndarray:
    """Boolean mask of functionals (rows of phi, all with phi[:, lead] == 1) with closed kernel.

    With k = lead, ker(phi) is spanned by e_j - phi_j e_k (j != k), so closure means
    M[i,j] - phi_j M[i,k] - phi_i M[k,j] + phi_i phi_j M[k,k] = 0 for all i, j,
    where M[i,j] = phi(e_i e_j).  Rows are tested one at a time, dropping failures.
    """
    k = lead
    sign, result = table.sign, table.result
    alive = np.arange(phi.shape[0])
    cur = phi
    Mk = (sign[k] * cur[:, result[k]]) % p
    order = [i for i in range(table.size) if i != k]
    for i in order:
        if alive.size == 0:
            break
        Mi = sign[i] * cur[:, result[i]]
        phi_i = cur[:, i:i + 1]
        C = Mi - cur * Mi[:, k:k + 1] - phi_i * Mk + phi_i * Mk[:, k:k + 1] * cur
        ok = ~((C % p).any(axis=1))
        alive, cur, Mk = alive[ok], cur[ok], Mk[ok]
    mask = np.zeros(phi.shape[0], dtype=bool)
    mask[alive] = True
    return mask


def _scan_block(args) -> tuple[Block, list[tuple[int, ...]]]:
    block, p, n, squares = args
    table = structure_table(n, Signature(squares))
    phi = _block_functionals(block, p, 1 << n)
    mask = closed_in_batch(phi, block.lead, p, table)
    return block, [tuple(int(x) for x in row) for row in phi[mask]]


def scan(p: int, n: int = 4, jobs: int = 1, sig: Signature | None = None,
         long_run: bool = False, progress: bool = True, chunk: int = 1 << 17) -> ScanReport:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    count = functional_count(p, n)
    if n == 4 and p not in FEASIBLE_PRIMES and not long_run:
        raise InfeasibleScan(p, count)
    sig = sig or Signature.default(n)
    t0 = time.perf_counter()
    tasks = [(b, p, n, sig.squares) for b in blocks(p, n, chunk)]
    closed: list[Functional] = []
    examined = 0
    next_report = PROGRESS_EVERY

    def consume(results):
        nonlocal examined, next_report
        for block, found in results:
            examined += block.stop - block.start
            closed.extend(Functional(p, c) for c in found)
            if progress and examined >= next_report:
                print(f"[scan p={p}] {examined}/{count} examined, {len(closed)} closed",
                      file=sys.stderr, flush=True)
                next_report = (examined // PROGRESS_EVERY + 1) * PROGRESS_EVERY

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            consume(pool.map(_scan_block, tasks))
    else:
        consume(map(_scan_block, tasks))
    return ScanReport(p, n, examined, closed, time.perf_counter() - t0)


def brute_force_closed_hyperplanes(p: int, n: int) -> list[Functional]:
    """Dense oracle for tiny n: enumerate every (2^n - 1)-dim subspace as a set of
    vectors and test closure elementwise, then report it by its normalized functional."""
    import itertools

    size = 1 << n
    table = structure_table(n)
    T = table.tensor()
    vecs = np.array(list(itertools.product(range(p), repeat=size)), dtype=np.int64)
    found = set()
    for coords in itertools.product(range(p), repeat=size):
        if not any(coords) or next(c for c in coords if c) != 1:
            continue
        phi = np.array(coords)
        members = vecs[(vecs @ phi) % p == 0]
        prods = np.einsum("ia,jb,abc->ijc", members, members, T) % p
        if not ((prods @ phi) % p).any():
            found.add(tuple(coords))
    return [Functional(p, c) for c in sorted(found)]


def functional_of_instance(vectors: Sequence[Multivector], p: int) -> Functional:
    """Normalized functional whose kernel is span(vectors) (a hyperplane)."""
    n = vectors[0].n
    mat, _ = _as_matrix(vectors, n)
    basis, pivots = rref(mat, p)
    if len(pivots) != (1 << n) - 1:
        raise ValueError("vectors do not span a hyperplane")
    free = next(c for c in range(1 << n) if c not in pivots)
    coords = [0] * (1 << n)
    coords[free] = 1
    for row, c in zip(basis, pivots):
        coords[c] = int(-row[free]) % p
    return Functional.normalized(coords, p)


def field_multivector(coords: Sequence[int], p: int, n: int = 4) -> Multivector:
    from .scalars import PrimeField
    F = PrimeField(p)
    return Multivector({position_blade(i + 1, n): F(c) for i, c in enumerate(coords) if c % p}, n)


__all__ = [
    "StructureTable", "structure_table", "Functional", "gram_matrix", "kernel_basis",
    "check_functional", "check_subspace", "check_subspaces_batched", "ScanReport", "scan",
    "functional_count", "InfeasibleScan", "brute_force_closed_hyperplanes", "inverse_table",
]
