import itertools
import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilpot.bch import BchContext, TensorElement, tensor_mul
from nilpot.errors import UsageError
from nilpot.freelie import (
    build_basis,
    cache_path,
    certify,
    element_from_json,
    element_to_json,
    free_lie_algebra,
    is_lyndon,
    left_normed,
    load_cached,
    lyndon_words,
    parse_bracket,
    random_element,
    save_cache,
    standard_factorization,
    substitute,
    witt_dimension,
)


def necklace_count(n: int, m: int) -> int:
    """Aperiodic necklaces of length m by brute force over all words."""
    seen, count = set(), 0
    for w in itertools.product(range(n), repeat=m):
        if w in seen:
            continue
        rots = {w[i:] + w[:i] for i in range(m)}
        seen |= rots
        if len(rots) == m:
            count += 1
    return count


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 5) for m in range(1, 6)])
def test_witt_formula_matches_necklaces(n, m):
    assert witt_dimension(n, m) == necklace_count(n, m)


def test_lyndon_words_are_lyndon_and_ordered():
    words = lyndon_words(3, 4)
    assert all(is_lyndon(w) for w in words)
    assert words == sorted(words)
    basis_words = [e.word for e in build_basis(3, 4).elements]
    assert basis_words == sorted(words, key=lambda w: (len(w), w))
    assert len(words) == sum(witt_dimension(3, m) for m in range(1, 5))


def test_standard_factorization():
    assert standard_factorization((1, 1, 2)) == ((1,), (1, 2))
    assert standard_factorization((1, 2, 2)) == ((1, 2), (2,))
    assert standard_factorization((1, 2, 3)) == ((1,), (2, 3))


@pytest.mark.parametrize("n,c,dim", [(2, 2, 3), (2, 3, 5), (4, 3, 30), (2, 5, 14), (1, 5, 1), (3, 4, 32)])
def test_dimensions(n, c, dim):
    assert free_lie_algebra(n, c).dim == dim


def test_degree_counts():
    assert build_basis(4, 3).degree_counts() == [4, 6, 20]


@pytest.mark.parametrize("n,c", [(2, 4), (3, 3), (3, 5)])
def test_jacobi_and_flag(n, c):
    L = free_lie_algebra(n, c)
    assert not L.jacobi_defects()
    for (i, j), items in L.structure_items():
        assert all(k > j for k, _ in items)
        assert all(L.degrees[k] == L.degrees[i] + L.degrees[j] for k, _ in items)


def _word_lift(alg, i):
    return BchContext(alg).lift_basis(i)


@pytest.mark.parametrize("n,c", [(2, 5), (3, 4)])
def test_structure_constants_match_tensor_commutators(n, c):
    """[e_i, e_j] lifted to the tensor algebra equals the commutator of lifts."""
    L = free_lie_algebra(n, c)
    ctx = BchContext(L)
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            if L.degrees[i] + L.degrees[j] > c:
                continue
            a, b = ctx.lift_basis(i), ctx.lift_basis(j)
            want = tensor_mul(a, b) - tensor_mul(b, a)
            got = ctx.lift(L.bracket(L.basis_element(i), L.basis_element(j)))
            assert got == want, (L.labels[i], L.labels[j])


def test_bracket_example():
    L = free_lie_algebra(2, 3)
    assert L.bracket(L.e("12"), L.x(1)) == -L.e("112")
    assert parse_bracket(L, "[1,2,2]") == L.e("122")
    assert parse_bracket(L, "[x1,[x1,x2]]") == L.e("112")
    assert left_normed(L, [1, 2, 1]) == -L.e("112")


def test_parse_errors():
    L = free_lie_algebra(2, 2)
    for bad in ("[1,", "[1,3]", "[]", "[1,2]]"):
        with pytest.raises(UsageError):
            parse_bracket(L, bad)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_substitution_is_a_homomorphism(seed):
    rng = random.Random(seed)
    L = free_lie_algebra(2, 4)
    T = free_lie_algebra(3, 4)
    images = [random_element(T, rng, density=0.4) for _ in range(2)]
    u, v = random_element(L, rng), random_element(L, rng)
    lhs = substitute(images, L.bracket(u, v))
    rhs = T.bracket(substitute(images, u), substitute(images, v))
    assert lhs == rhs
    assert substitute(images, u + v) == substitute(images, u) + substitute(images, v)


def test_exchange_round_trip():
    L = free_lie_algebra(3, 3)
    u = L.e("123") * Fraction(-2, 3) + L.x(2)
    doc = json.loads(json.dumps(element_to_json(u)))
    assert element_from_json(doc) == u
    assert element_from_json({"n": 3, "c": 3, "terms": [["[1,2]", "1/2"]]}) == L.e("12") / 2


def test_cache_round_trip_and_tamper_detection(tmp_path):
    L = free_lie_algebra(3, 3)
    save_cache(L, tmp_path)
    again = load_cached(3, 3, tmp_path)
    assert again is not None and again.same_structure(L)
    assert certify(again)
    path = cache_path(3, 3, tmp_path)
    doc = json.loads(path.read_text())
    key = next(iter(doc["table"]))
    doc["table"][key][0][1] = "7"
    path.write_text(json.dumps(doc))
    assert load_cached(3, 3, tmp_path) is None
