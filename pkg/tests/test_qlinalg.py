from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.matrices.normalforms import smith_normal_form

from nilpot.qlinalg import (
    EchelonBasis,
    format_rat,
    hnf,
    kernel_basis,
    lattice_membership,
    parse_rat,
    rank,
    rational_xgcd,
    rref,
    snf,
    solve,
)

small_int = st.integers(-6, 6)


def int_matrix(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_int, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def test_rational_round_trip():
    assert format_rat(Fraction(-3, 4)) == "-3/4"
    assert format_rat(5) == "5"
    assert parse_rat("-3/4") == Fraction(-3, 4)
    with pytest.raises(ValueError):
        parse_rat(0.5)


@given(int_matrix())
def test_rref_matches_sympy(m):
    red, piv = rref(m)
    ref, ref_piv = sympy.Matrix(m).rref()
    assert piv == list(ref_piv)
    assert [[Fraction(int(x.p), int(x.q)) for x in ref.row(i)] for i in range(ref.rows)] == red


@given(int_matrix())
def test_kernel_vectors_are_annihilated(m):
    ker = kernel_basis(m)
    assert len(ker) + rank(m) == len(m[0])
    for v in ker:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)
        assert next(x for x in v if x) == 1


def test_solve_inconsistent():
    assert solve([[1, 1], [2, 2]], [1, 3]) is None
    assert solve([[1, 1], [0, 2]], [3, 2]) == [2, 1]


@given(int_matrix())
def test_hnf_is_unimodular_transform(m):
    h, t = hnf(m)
    assert matmul(t, m) == h
    assert abs(sympy.Matrix(t).det()) == 1
    lead_cols = []
    for row in h:
        nz = [j for j, x in enumerate(row) if x]
        if nz:
            lead_cols.append(nz[0])
            assert row[nz[0]] > 0
    assert lead_cols == sorted(set(lead_cols))
    for i, c in enumerate(lead_cols):
        for above in h[:i]:
            assert 0 <= above[c] < h[i][c]


@settings(max_examples=60)
@given(int_matrix())
def test_snf_matches_sympy_oracle(m):
    ours = snf(m)
    ref = smith_normal_form(sympy.Matrix(m), domain=sympy.ZZ)
    diag = [abs(int(ref[i, i])) for i in range(min(ref.shape))]
    nz = sorted(d for d in diag if d)
    assert [d for d in ours if d] == nz
    assert ours.count(0) == diag.count(0)
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0


def test_snf_torsion_example():
    assert snf([[2, 0], [0, 3]]) == [1, 6]
    assert snf([[2, 4], [4, 8]]) == [2, 0]


def test_lattice_membership():
    basis = [[2, 0], [1, 3]]
    assert lattice_membership(basis, [3, 3])
    assert not lattice_membership(basis, [1, 0])
    assert lattice_membership([], [0, 0])


@given(st.fractions(max_denominator=30).filter(bool), st.fractions(max_denominator=30).filter(bool))
def test_rational_xgcd(a, b):
    d, s, t = rational_xgcd(a, b)
    assert d > 0 and d == s * a + t * b
    assert (a / d).denominator == 1 and (b / d).denominator == 1


@given(st.lists(st.dictionaries(st.integers(0, 5), st.fractions(max_denominator=5), max_size=4), max_size=6))
def test_echelon_basis_matches_dense_rank(vectors):
    eb = EchelonBasis(6)
    for v in vectors:
        eb.add(v)
    dense = [[Fraction(v.get(j, 0)) for j in range(6)] for v in vectors]
    assert eb.rank == (rank(dense) if dense else 0)
    for v in vectors:
        assert eb.contains(v)
    for p in eb.pivots:
        row = eb.row(p)
        assert row[p] == 1 and min(row) == p
        assert all(eb.row(q).get(p, 0) == 0 for q in eb.pivots if q != p)
