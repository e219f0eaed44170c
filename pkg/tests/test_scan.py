from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import closed_hyperplanes_by_enumeration

from cliffcheck.bases import enumerate_families, field_instance, instance_matrices
from cliffcheck.blades import parse_multivector
from cliffcheck.scalars import PrimeField
from cliffcheck.scan import (Functional, InfeasibleScan, blocks, brute_force_closed_hyperplanes, check_functional,
                             check_subspace, check_subspace_matrix, check_subspaces_batched, closed_in_batch,
                             field_multivector, functional_count, functional_of_instance, kernel_basis, scan,
                             structure_table)


def test_functional_counts():
    assert functional_count(2) == 65535
    assert functional_count(3) == 21523360


@pytest.mark.parametrize("p", [2, 3])
def test_blocks_cover_every_functional_once(p):
    n = 2
    total = sum(b.stop - b.start for b in blocks(p, n, chunk=5))
    assert total == functional_count(p, n)


def test_functional_normalization():
    f = Functional.normalized([0, 2, 1, 0], 3)
    assert f.coords == (0, 1, 2, 0) and f.is_normalized
    with pytest.raises(ValueError):
        Functional(3, (0, 0, 3))
    with pytest.raises(ValueError):
        Functional.normalized([0, 0], 2)


@pytest.mark.parametrize("n,p", [(1, 2), (1, 3), (2, 2), (2, 3)])
def test_scan_matches_enumeration_oracle(n, p):
    expected = closed_hyperplanes_by_enumeration(n, p)
    got = {f.coords for f in scan(p, n, progress=False).closed}
    assert got == expected
    assert got == {f.coords for f in brute_force_closed_hyperplanes(p, n)}


@pytest.mark.parametrize("n,p", [(3, 2), (3, 3), (3, 5)])
def test_scan_matches_per_functional_check(n, p):
    table = structure_table(n)
    closed = {f.coords for f in scan(p, n, progress=False).closed}
    rng = np.random.default_rng(n * p)
    for _ in range(300):
        raw = rng.integers(0, p, 1 << n)
        if not raw.any():
            continue
        f = Functional.normalized(raw, p)
        assert check_functional(f, table) == (f.coords in closed)
    for c in closed:
        assert check_functional(Functional(p, c), table)


def test_scan_f2_finds_the_characteristic_two_hyperplanes():
    rep = scan(2, progress=False)
    assert rep.examined == 65535
    coords = {f.coords for f in rep.closed}
    assert len(coords) == 16
    # augmentation ideal of the group algebra: sum of coefficients vanishes
    assert (1,) * 16 in coords


def test_scan_parallel_agrees():
    a = scan(3, 3, jobs=1, progress=False, chunk=50)
    b = scan(3, 3, jobs=2, progress=False, chunk=50)
    assert a.examined == b.examined == functional_count(3, 3)
    assert [f.coords for f in a.closed] == [f.coords for f in b.closed]


def test_infeasible_prime():
    with pytest.raises(InfeasibleScan):
        scan(5)
    with pytest.raises(ValueError):
        scan(4, 2)


def test_kernel_basis_is_canonical_family():
    table = structure_table(4)
    phi = Functional.normalized([1, 0, 2] + [0] * 12 + [1], 3)
    P = kernel_basis(phi)
    assert P.shape == (16, 15)
    assert not ((phi.array() @ P) % 3).any()
    assert check_functional(phi, table) == check_subspace_matrix(P.T, 3, table)


@given(st.integers(0, 15), st.lists(st.integers(0, 4), min_size=16, max_size=16))
def test_closed_in_batch_agrees_with_gram_check(lead, tail):
    p = 5
    coords = [0] * lead + [1] + [t % p for t in tail[lead + 1:]]
    table = structure_table(4)
    phi = np.array([coords])
    assert closed_in_batch(phi, lead, p, table)[0] == check_functional(Functional(p, tuple(coords)), table)


def test_batched_subspace_check_matches_single():
    table = structure_table(4)
    rng = np.random.default_rng(7)
    for p in (2, 3, 5):
        mats = rng.integers(0, p, (200, 15, 16))
        mats[:100, 4:] = 0
        # a few matrices spanning known subalgebras: the quaternions 1, e1, e2, e12 and the scalars
        mats[:20, :4] = 0
        mats[:20, 0, 0] = 1
        mats[20:40] = 0
        for i, pos in enumerate([0, 1, 2, 5]):
            mats[20:40, i, pos] = 1
        single = np.array([check_subspace_matrix(m, p, table) for m in mats])
        batched = check_subspaces_batched(mats, p, table)
        assert (single == batched).all()
        assert single[:40].all()


@pytest.mark.parametrize("p", [2, 3, 5])
def test_g3_span_and_even_subalgebra_are_closed(p):
    F = PrimeField(p)

    def fv(texts):
        out = []
        for t in texts:
            m = parse_multivector(t)
            out.append(m._new({b: F(c) for b, c in m.coeffs.items()}))
        return out
    g3 = fv(["1", "e1", "e2", "e3", "e12", "e13", "e23", "e123"])
    even = fv(["1", "e12", "e13", "e14", "e23", "e24", "e34", "e1234"])
    assert check_subspace(g3, p)
    assert check_subspace(even, p)
    assert not check_subspace(fv(["e1", "e2"]), p)


def test_instance_functional_roundtrip():
    fam = enumerate_families(4)[2]
    vals = {q: i % 3 for i, q in enumerate(fam.params)}
    inst = field_instance(fam, vals, PrimeField(3))
    phi = functional_of_instance(inst.vectors, 3)
    P = kernel_basis(phi).T
    assert (P == instance_matrices(fam, np.array([[vals[q] for q in fam.params]]), 3)[0]).all()
    assert field_multivector(phi.coords, 3).n == 4
