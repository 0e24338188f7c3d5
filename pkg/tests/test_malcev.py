import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilpot.algebra import LieAlgebra
from nilpot.errors import UsageError
from nilpot.freelie import free_lie_algebra, parse_bracket, random_element
from nilpot.malcev import (
    MGroup,
    collect,
    gamma_subgroup,
    gcommutator,
    gcommutator_left,
    ginv,
    gmul,
    gpower,
    graded_ring,
    hirsch,
    isolator,
    isolator_index,
    magnus_check,
    subgroup_closure,
)
from nilpot.quotient import associated_graded, ideal_closure, quotient, verbal_closure

seeds = st.integers(0, 100_000)


@pytest.fixture(scope="module")
def heis():
    L = free_lie_algebra(2, 2)
    G = MGroup(L)
    x1, x2 = G.element(L.x(1)), G.element(L.x(2))
    return L, G, x1, x2, subgroup_closure([x1, x2])


def test_group_operations(heis):
    L, G, x1, x2, _ = heis
    assert gmul(x2, x1).log == L.x(1) + L.x(2) - L.e("12") / 2
    assert gmul(x1, ginv(x1)).is_identity()
    assert (x1 ** 3).log == L.x(1) * 3
    with pytest.raises(UsageError):
        gpower(x1, Fraction(1, 2))
    other = MGroup(free_lie_algebra(2, 3)).identity()
    with pytest.raises(UsageError):
        gmul(x1, other)


def test_heisenberg_sequence(heis):
    L, G, x1, x2, H = heis
    assert [r for r in H.rows] == [L.x(1), L.x(2), L.e("12")]
    assert H.leading_coefficients() == [1, 1, 1]
    assert collect(H, gmul(x2, x1)) == [1, 1, -1]
    assert collect(H, x1) == [1, 0, 0]
    assert collect(H, L.x(1) / 2) is None
    assert hirsch(H) == 3
    assert gamma_subgroup(H, 1) is H
    assert gamma_subgroup(H, 2).rows == [L.e("12")]
    assert gamma_subgroup(H, 3).rows == []
    assert hirsch(subgroup_closure([x1])) == 1


def test_heisenberg_graded_ring(heis):
    H = heis[4]
    R = graded_ring(H)
    assert R.component_ranks() == [2, 1]
    assert R.integer_table() == {(0, 1): {2: 1}}


def test_index_two_subgroup_is_not_magnus(heis):
    L, G, x1, x2, _ = heis
    H = subgroup_closure([x1, x2, G.element(L.e("12") / 2)])
    m = magnus_check(H)
    assert not m and m.factors[2] == [2]
    assert isolator_index(H, 2) == [2]
    assert magnus_check(subgroup_closure([x1, G.element(L.e("12") / 2)]))


def test_scaled_generator_isolator():
    A = LieAlgebra([1], {}, labels=["x1"])
    G = MGroup(A)
    H = subgroup_closure([G.element(A.basis_element(0) * 2)])
    tau = isolator(H, 1)
    assert len(tau) == 1
    assert collect(H, A.basis_element(0) * 2) == [1]


def test_rational_gcd_in_closure():
    L = free_lie_algebra(2, 2)
    G = MGroup(L)
    H = subgroup_closure([G.element(L.x(1) * Fraction(2, 3)), G.element(L.x(1) * Fraction(3, 4))])
    assert H.leading_coefficients() == [Fraction(1, 12)]


@pytest.mark.parametrize("n,c", [(2, 3), (2, 4), (3, 3)])
def test_free_group_graded_ring(n, c):
    L = free_lie_algebra(n, c)
    G = MGroup(L)
    H = subgroup_closure([G.element(g) for g in L.generators()])
    assert hirsch(H) == L.dim
    R = graded_ring(H)
    gr = associated_graded(L)
    assert R.integral and R.structure_table() == gr.structure_table()
    assert isolator(H, 2).same_group(gamma_subgroup(H, 2))


def test_proper_subgroup_uses_frame():
    L = free_lie_algebra(3, 3)
    G = MGroup(L)
    H = subgroup_closure([G.element(L.x(1)), G.element(L.x(2) * 2)])
    assert hirsch(H) == 5
    frame = H.frame
    assert not frame.is_identity and frame.algebra.dim == 5
    R = graded_ring(H)
    assert R.component_ranks() == [2, 1, 2]
    assert magnus_check(H)
    for r in H.rows:
        assert frame.from_frame(frame.to_frame(r)) == r


def _models():
    out = []
    for n, c in [(2, 3), (3, 3)]:
        L = free_lie_algebra(n, c)
        out.append((f"free{n}{c}", L))
    L = free_lie_algebra(2, 5)
    V = verbal_closure(L, [parse_bracket(free_lie_algebra(4, 4), "[[1,2],[3,4]]")])
    out.append(("metabelian", quotient(L, V)))
    F = free_lie_algebra(4, 3)
    I = ideal_closure(F, [parse_bracket(F, "[1,2]") + parse_bracket(F, "[3,4,3]")])
    out.append(("mixed", quotient(F, I)))
    return out


MODELS = _models()


@pytest.mark.parametrize("name,alg", MODELS, ids=[m[0] for m in MODELS])
def test_collection_round_trip(name, alg):
    rng = random.Random(11)
    G = MGroup(alg)
    gens = [G.element(g) for g in alg.generators()]
    H = subgroup_closure(gens)
    for _ in range(30):
        word = [rng.choice(gens) ** rng.choice((-2, -1, 1, 2)) for _ in range(rng.randint(1, 6))]
        acc = G.identity()
        for w in word:
            acc = acc * w
        exps = collect(H, acc)
        assert exps is not None and H.expand(exps) == acc


@pytest.mark.parametrize("name,alg", MODELS, ids=[m[0] for m in MODELS])
def test_leading_term_law(name, alg):
    rng = random.Random(5)
    G = MGroup(alg)
    top = max(alg.degrees)
    for _ in range(15):
        i, j = rng.randint(1, top - 1), rng.randint(1, top - 1)
        if i + j > top:
            continue
        a = random_element(alg, rng, 0.5, degrees={d for d in range(i, top + 1)})
        b = random_element(alg, rng, 0.5, degrees={d for d in range(j, top + 1)})
        c = gcommutator(G.element(a), G.element(b)).log
        assert c.truncate_below(i + j) == c
        assert c.degree_component(i + j) == alg.bracket(a, b).degree_component(i + j)


def test_isolator_predicate_on_random_elements():
    L = free_lie_algebra(2, 3)
    G = MGroup(L)
    H = subgroup_closure([G.element(L.x(1)), G.element(L.x(2)), G.element(L.e("12") / 3)])
    idx = isolator_index(H, 2)
    order = 1
    for f in idx:
        order *= f
    assert order == 6
    tau = H.frame.H.tail(2)
    gam = gamma_subgroup(H, 2)
    rng = random.Random(2)
    for _ in range(20):
        exps = [rng.randint(-2, 2) for _ in H.rows]
        h = H.expand(exps)
        in_tau = tau.contains(h.log)
        powers = [gam.contains((h ** k).log) for k in range(1, order + 1)]
        assert in_tau == any(powers)


def test_reference_group_identity():
    F = free_lie_algebra(4, 3)
    Q = quotient(F, ideal_closure(F, [parse_bracket(F, "[1,2]") + parse_bracket(F, "[3,4,3]")]))
    G = MGroup(Q)
    y = [G.element(Q.y(i)) for i in range(1, 5)]
    assert gcommutator(y[0], y[1]) == ginv(gcommutator_left(y[2], y[3], y[2]))
    H = subgroup_closure(y)
    assert hirsch(H) == 25
    R = graded_ring(H)
    assert R.component_ranks() == [4, 5, 16]
    m = magnus_check(H)
    assert m and m.abelianization_rank == 4


def test_isolator_generated_by_gamma_and_next_isolator():
    L = free_lie_algebra(2, 5)
    V = verbal_closure(L, [parse_bracket(free_lie_algebra(4, 4), "[[1,2],[3,4]]")])
    Q = quotient(L, V)
    G = MGroup(Q)
    H = subgroup_closure([G.element(g) for g in Q.generators()])
    for i in range(1, 5):
        tau = isolator(H, i)
        combined = subgroup_closure(gamma_subgroup(H, i).rows + isolator(H, i + 1).rows, group=G)
        assert combined.same_group(tau)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_associativity_in_quotient(seed):
    rng = random.Random(seed)
    alg = MODELS[-1][1]
    G = MGroup(alg)
    a, b, c = (G.element(random_element(alg, rng, 0.3)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
