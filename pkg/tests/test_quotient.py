import random

import pytest
from hypothesis import given, settings, strategies as st

from nilpot.freelie import free_lie_algebra, parse_bracket, random_element, substitute
from nilpot.quotient import (
    associated_graded,
    generated_subalgebra,
    graded_identity_defects,
    hom_from_generators,
    ideal_closure,
    is_fully_invariant,
    lcs,
    lcs_dims,
    law_values,
    quotient,
    verbal_closure,
    zero_ideal,
)

seeds = st.integers(0, 100_000)


@pytest.fixture(scope="module")
def mixed_model():
    L = free_lie_algebra(4, 3)
    v = parse_bracket(L, "[1,2]") + parse_bracket(L, "[3,4,3]")
    I = ideal_closure(L, [v])
    return L, v, I, quotient(L, I)


def test_ideal_closure_basics():
    L = free_lie_algebra(2, 3)
    assert ideal_closure(L, []).rank == 0
    assert ideal_closure(L, [L.e("12")]).rank == 3


def test_non_homogeneous_ideal(mixed_model):
    L, v, I, Q = mixed_model
    assert I.rank == 5 and not I.is_homogeneous()
    for i in range(1, 5):
        assert I.contains(parse_bracket(L, f"[1,2,{i}]"))
    assert I.pivots[0] == L.word_index("12")
    assert Q.dim == 25
    assert Q.bracket(Q.y(1), Q.y(2)) == -Q.reduce(parse_bracket(L, "[3,4,3]"))
    for i in range(1, 5):
        assert Q.reduce(parse_bracket(L, f"[1,2,{i}]")) == 0


def test_zero_ideal_quotient_is_ambient():
    L = free_lie_algebra(2, 3)
    Q = quotient(L, zero_ideal(L))
    assert Q.dim == L.dim and Q.same_structure(L)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_quotient_bracket_is_well_defined(seed):
    rng = random.Random(seed)
    L = free_lie_algebra(4, 3)
    v = parse_bracket(L, "[1,2]") + parse_bracket(L, "[3,4,3]")
    I = ideal_closure(L, [v])
    Q = quotient(L, I)
    rows = I.rows()
    u, w = random_element(L, rng, 0.3), random_element(L, rng, 0.3)
    a = sum((r * rng.randint(-3, 3) for r in rows), L.zero())
    b = sum((r * rng.randint(-3, 3) for r in rows), L.zero())
    assert Q.reduce(L.bracket(u + a, w + b)) == Q.bracket(Q.reduce(u), Q.reduce(w))
    assert Q.reduce(Q.lift(Q.reduce(u))) == Q.reduce(u)


def test_lower_central_series(mixed_model):
    assert lcs_dims(free_lie_algebra(2, 2)) == [3, 1, 0]
    assert lcs_dims(mixed_model[3]) == [25, 21, 16, 0]
    L = free_lie_algebra(3, 2)
    abelian = quotient(L, ideal_closure(L, [parse_bracket(L, "[1,2]"), parse_bracket(L, "[1,3]"), parse_bracket(L, "[2,3]")]))
    assert lcs_dims(abelian) == [3, 0]
    gr = associated_graded(abelian)
    assert gr.same_structure(abelian)


def test_associated_graded(mixed_model):
    Q = mixed_model[3]
    gr = associated_graded(Q)
    assert gr.component_dims() == [4, 5, 16]
    assert gr.bracket(gr.project(Q.y(1), 1), gr.project(Q.y(2), 1)) == 0
    assert Q.bracket(Q.y(1), Q.y(2)) != 0
    assert graded_identity_defects(Q)
    assert not graded_identity_defects(free_lie_algebra(3, 3))


@pytest.mark.parametrize("n,c", [(2, 3), (3, 3), (2, 5)])
def test_commutator_law_gives_derived_ideal(n, c):
    L = free_lie_algebra(n, c)
    law = parse_bracket(free_lie_algebra(2, 2), "[1,2]")
    V = verbal_closure(L, [law])
    assert V.span.same_space(lcs(L)[1])
    assert is_fully_invariant(V)


def test_verbal_closure_of_mixed_element(mixed_model):
    L, v, I, _ = mixed_model
    V = verbal_closure(L, [v])
    assert V.rank == 26 and V.span.same_space(lcs(L)[1])
    assert not is_fully_invariant(I)
    assert is_fully_invariant(zero_ideal(L))
    assert verbal_closure(L, []).rank == 0


def _metabelian():
    L = free_lie_algebra(2, 5)
    law = parse_bracket(free_lie_algebra(4, 4), "[[1,2],[3,4]]")
    return L, law, verbal_closure(L, [law])


def test_metabelian_quotient_dimensions():
    L, _, V = _metabelian()
    assert V.rank == 2
    assert lcs_dims(quotient(L, V)) == [12, 10, 9, 7, 4, 0]


def _probe_images(target, rng, k):
    return [random_element(target, rng, density=0.5, bound=4) for _ in range(k)]


@pytest.mark.parametrize("case", ["metabelian", "engel", "mixed"])
def test_random_endomorphisms_stay_inside(case):
    rng = random.Random(7)
    if case == "metabelian":
        L, law, V = _metabelian()
        laws = [law]
    elif case == "engel":
        L = free_lie_algebra(2, 4)
        laws = [parse_bracket(free_lie_algebra(2, 3), "[1,2,2]")]
        V = verbal_closure(L, laws)
    else:
        L = free_lie_algebra(3, 3)
        laws = [parse_bracket(L, "[1,2]") + parse_bracket(L, "[1,3,1]")]
        V = verbal_closure(L, laws)
    for f in laws:
        for _ in range(50):
            value = substitute(_probe_images(L, rng, f.algebra.n), f)
            assert V.contains(value)
    for row in V.rows():
        for _ in range(10):
            assert V.contains(substitute(_probe_images(L, rng, L.n), row))


@pytest.mark.parametrize("n,c,law", [(2, 5, "[[1,2],[3,4]]"), (2, 4, "[1,2,2]"), (3, 3, "[1,2,3]")])
def test_verbal_ideals_contain_degree_components(n, c, law):
    rng = random.Random(3)
    L = free_lie_algebra(n, c)
    f = parse_bracket(free_lie_algebra(max(4, n), c), law)
    V = verbal_closure(L, [f])
    rows = V.rows()
    for _ in range(20):
        u = sum((r * rng.randint(-3, 3) for r in rows), L.zero())
        for m in range(1, c + 1):
            assert V.contains(u.degree_component(m))
    assert lcs(L)[1].contains_space(V.span)


def test_law_values_scale():
    L = free_lie_algebra(2, 3)
    vals = law_values(parse_bracket(L, "[1,2]"), L)
    assert vals and all(v.min_degree() >= 2 for v in vals)


def test_homomorphisms():
    L = free_lie_algebra(2, 2)
    h = hom_from_generators(L, L, [L.x(1), L.x(1)])
    assert h.well_defined and not h.is_injective and h.rank == 1
    assert hom_from_generators(L, L, L.generators()).is_isomorphism
    F = free_lie_algebra(2, 3)
    bad = hom_from_generators(L, F, F.generators())
    assert not bad.well_defined and bad.witness is not None


def test_homogeneous_lcs_is_tail_sum():
    L, _, V = _metabelian()
    Q = quotient(L, V)
    counts = [sum(1 for d in Q.degrees if d == m) for m in range(1, 6)]
    tails = [sum(counts[t:]) for t in range(5)]
    assert lcs_dims(Q)[:-1] == tails


def test_generated_subalgebra(mixed_model):
    Q = mixed_model[3]
    assert generated_subalgebra(Q, Q.generators()).rank == 25
    assert generated_subalgebra(Q, Q.basis()).rank == 25
    L = free_lie_algebra(2, 3)
    assert generated_subalgebra(L, [L.x(1)]).rank == 1


def test_description_export(mixed_model):
    Q = mixed_model[3]
    doc = Q.describe()
    assert doc["ambient"] == {"n": 4, "c": 3} and doc["ideal_rank"] == 5
    assert len(doc["adapted_basis"]) == 25
    assert doc["relations"][0] == ["12", [["334", "1"]]]
