"""Acceptance criteria, one test each.  Run with ``pytest tests/test_acceptance.py -s``
to see the PASS/FAIL summary lines."""
import itertools
import random
import time

from nilpot.bch import BchContext, bch, gcomm
from nilpot.freelie import free_lie_algebra, parse_bracket, random_element, substitute, witt_dimension
from nilpot.malcev import MGroup, collect, gcommutator, subgroup_closure
from nilpot.quotient import verbal_closure
from nilpot.verify import (
    VarietySpec,
    build_model,
    check_theorem_a,
    check_tower,
    example5_algebra,
    law_from_text,
    run_example_5,
)

METABELIAN = "[[1,2],[3,4]]"


def necklaces(n: int, m: int) -> int:
    seen, count = set(), 0
    for w in itertools.product(range(n), repeat=m):
        if w not in seen:
            rots = {w[i:] + w[:i] for i in range(m)}
            seen |= rots
            count += len(rots) == m
    return count


def run_criterion(number: int, title: str, limit_s: float, fn):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    passed = ok and elapsed < limit_s
    print(f"\n{'PASS' if passed else 'FAIL'} criterion {number}: {title} ({elapsed:.2f}s, limit {limit_s:g}s) {detail}")
    assert ok, detail
    assert elapsed < limit_s, f"took {elapsed:.2f}s"


def _model_algebras():
    out = {}
    for n, c in [(2, 2), (2, 3), (2, 4), (3, 3)]:
        out[f"N{c}({n})"] = build_model(VarietySpec(n, c))[2]
    out["metabelian(2,5)"] = build_model(VarietySpec(2, 5, [law_from_text(METABELIAN, 5)]))[2]
    out["example(4,3)"] = example5_algebra()[2]
    return out


def test_criterion_1_bch_coefficients():
    def body():
        L = free_lie_algebra(2, 3)
        x1, x2 = L.x(1), L.x(2)
        ctx = BchContext(L)
        b = bch(ctx, x1, x2)
        g = gcomm(ctx, x1, x2)
        want_b = x1 + x2 + parse_bracket(L, "[1,2]") / 2 + parse_bracket(L, "[1,2,2]") / 12 - parse_bracket(L, "[1,2,1]") / 12
        want_g = parse_bracket(L, "[1,2]") + parse_bracket(L, "[1,2,1]") / 2 + parse_bracket(L, "[1,2,2]") / 2
        return b == want_b and g == want_g, f"bch={b!r} gcomm={g!r}"

    run_criterion(1, "BCH and group-commutator coefficients", 1, body)


def test_criterion_2_basis_dimensions():
    def body():
        bad = []
        for n in range(1, 5):
            for c in range(1, 6):
                L = free_lie_algebra(n, c)
                want = sum(necklaces(n, m) for m in range(1, c + 1))
                if L.dim != want or [witt_dimension(n, m) for m in range(1, c + 1)] != [necklaces(n, m) for m in range(1, c + 1)]:
                    bad.append((n, c, L.dim, want))
        named = [free_lie_algebra(*nc).dim for nc in ((2, 3), (4, 3), (2, 5))]
        return not bad and named == [5, 30, 14], f"named dims {named} mismatches {bad}"

    run_criterion(2, "Lyndon basis dimensions against necklace counts", 10, body)


def test_criterion_3_golden_example():
    def body():
        rep = run_example_5()
        failed = [s["name"] for s in rep.steps if not s["passed"]]
        return rep.passed, f"steps={len(rep.steps)} failed={failed} dims={rep.witnesses['dims']}"

    run_criterion(3, "explicit non-homogeneous example", 60, body)


def test_criterion_4_graded_ring_isomorphism():
    def body():
        cases = [(2, 2, ()), (2, 3, ()), (2, 4, ()), (3, 3, ()), (2, 5, (METABELIAN,))]
        results = {}
        for n, c, laws in cases:
            rep = check_theorem_a(VarietySpec(n, c, [law_from_text(t, c) for t in laws]))
            results[f"({n},{c})"] = rep.passed
        return all(results.values()), str(results)

    run_criterion(4, "generator map onto the graded Lie ring is an isomorphism", 120, body)


def test_criterion_5_group_and_filtration_properties():
    def body():
        rng = random.Random(20240917)
        summary = {}
        ok = True
        for name, alg in _model_algebras().items():
            G = MGroup(alg)
            top = max(alg.degrees)
            assoc = 0
            for _ in range(100):
                a, b, c = (G.element(random_element(alg, rng, 0.4)) for _ in range(3))
                assoc += (a * b) * c == a * (b * c)
            gens = [G.element(g) for g in alg.generators()]
            H = subgroup_closure(gens, group=G)
            trips = 0
            for _ in range(100):
                acc = G.identity()
                for _ in range(rng.randint(1, 8)):
                    acc = acc * rng.choice(gens) ** rng.choice((-2, -1, 1, 2))
                exps = collect(H, acc)
                trips += exps is not None and H.expand(exps) == acc
            leading = 0
            pairs = [(i, j) for i in range(1, top) for j in range(1, top) if i + j <= top]
            for k in range(50):
                i, j = pairs[k % len(pairs)]
                a = random_element(alg, rng, 0.5, degrees={i})
                b = random_element(alg, rng, 0.5, degrees={j})
                c = gcommutator(G.element(a), G.element(b)).log
                leading += c.truncate_below(i + j) == c and c.degree_component(i + j) == alg.bracket(a, b).degree_component(i + j)
            summary[name] = (assoc, trips, leading)
            ok &= (assoc, trips, leading) == (100, 100, 50)
        return ok, str(summary)

    run_criterion(5, "associativity, collection round-trip and leading-term law", 120, body)


def test_criterion_6_towers():
    def body():
        free = check_tower(VarietySpec(2, 4), 2, 4)
        meta = check_tower(VarietySpec(2, 5, [law_from_text(METABELIAN, 5)]), 4, 5)
        k = free.witnesses["kernel_dims"]
        return free.passed and meta.passed and k == [2, 3], f"free kernels {k} metabelian kernels {meta.witnesses['kernel_dims']}"

    run_criterion(6, "consecutive-class epimorphisms", 30, body)


def test_criterion_7_verbal_closure_robustness():
    def body():
        rng = random.Random(17)
        cases = [
            (free_lie_algebra(2, 5), [law_from_text(METABELIAN, 5)]),
            (free_lie_algebra(2, 4), [law_from_text("[1,2,2]", 4)]),
            (free_lie_algebra(3, 3), [law_from_text("[1,2,3]", 3)]),
            (free_lie_algebra(4, 3), [parse_bracket(free_lie_algebra(4, 3), "[1,2]") + parse_bracket(free_lie_algebra(4, 3), "[3,4,3]")]),
        ]
        escapes, component_failures = 0, 0
        for L, laws in cases:
            V = verbal_closure(L, laws)
            pool = list(laws) + V.rows()
            for _ in range(50):
                f = rng.choice(pool)
                images = [random_element(L, rng, 0.5, bound=4) for _ in range(f.algebra.n)]
                escapes += not V.contains(substitute(images, f))
            rows = V.rows()
            for _ in range(20):
                u = sum((r * rng.randint(-3, 3) for r in rows), L.zero())
                component_failures += sum(not V.contains(u.degree_component(m)) for m in range(1, L.nilpotency_class + 1))
        return escapes == 0 and component_failures == 0, f"escapes={escapes} component_failures={component_failures}"

    run_criterion(7, "endomorphism probes stay inside verbal closures", 60, body)
