"""Structural checks over free and relatively free nilpotent models.

Every check returns a :class:`Report`; a failed step carries the exact
values that disagreed.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .algebra import LieAlgebra, LieElement
from .errors import UsageError
from .freelie import FreeLieAlgebra, free_lie_algebra, parse_bracket, witt_dimension
from .malcev import (
    MGroup,
    gamma_subgroup,
    gcommutator,
    gcommutator_left,
    ginv,
    graded_ring,
    hirsch,
    magnus_check,
    subgroup_closure,
)
from .obstruction import commuting_pair_obstruction, match_reference
from .qlinalg import EchelonBasis, format_rat, kernel_basis, snf
from .quotient import (
    QuotientAlgebra,
    associated_graded,
    graded_identity_defects,
    hom_from_generators,
    ideal_closure,
    is_fully_invariant,
    lcs,
    lcs_dims,
    quotient,
    verbal_closure,
)


# ---------------------------------------------------------------------------
# reports


def _plain(x: Any) -> Any:
    """Exact JSON-able rendering: rationals as 'p/q', elements as term lists."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return format_rat(x)
    if isinstance(x, LieElement):
        labels = x.algebra.labels
        return [[labels[k], format_rat(v)] for k, v in x.items()]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return str(x)


@dataclass
class Report:
    check: str
    passed: bool = True
    witnesses: dict = field(default_factory=dict)
    steps: list[dict] = field(default_factory=list)
    timings_ms: dict[str, float] = field(default_factory=dict)

    def step(self, name: str, ok: bool, **data) -> bool:
        ok = bool(ok)
        self.steps.append({"name": name, "passed": ok, **data})
        if not ok:
            self.passed = False
        return ok

    def timed(self, name: str, fn: Callable[[], Any]) -> Any:
        t = time.perf_counter()
        out = fn()
        self.timings_ms[name] = round((time.perf_counter() - t) * 1000, 3)
        return out

    def to_dict(self, deterministic: bool = False) -> dict:
        doc = {
            "check": self.check,
            "passed": self.passed,
            "witnesses": _plain({**self.witnesses, "steps": self.steps}),
        }
        if not deterministic:
            doc["timings_ms"] = self.timings_ms
        return doc

    def to_json(self, deterministic: bool = False) -> str:
        return json.dumps(self.to_dict(deterministic), sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [f"{self.check}: {'PASS' if self.passed else 'FAIL'}"]
        for s in self.steps:
            extra = {k: v for k, v in s.items() if k not in ("name", "passed")}
            detail = " ".join(f"{k}={json.dumps(_plain(v), sort_keys=True)}" for k, v in extra.items())
            lines.append(f"  [{'ok' if s['passed'] else 'FAIL'}] {s['name']}" + (f"  {detail}" if detail else ""))
        return "\n".join(lines)


@dataclass
class VarietySpec:
    """Relatively free model ``L_{n,c} / V(laws)``; laws may use more variables than ``n``."""

    n: int
    c: int
    laws: list[LieElement] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1 or self.c < 1:
            raise UsageError("rank and class must be positive")
        for f in self.laws:
            if not f:
                raise UsageError("laws must be nonzero")

    def with_class(self, c: int) -> "VarietySpec":
        return VarietySpec(self.n, c, self.laws)


def law_from_text(text: str, c: int) -> LieElement:
    """Parse a bracket expression such as ``[[1,2],[3,4]]`` in the free algebra of
    the smallest rank mentioned, truncated at class ``c``."""
    import re

    letters = [int(t) for t in re.findall(r"\d+", text)]
    if not letters:
        raise UsageError(f"no generators in law {text!r}")
    return parse_bracket(free_lie_algebra(max(letters), c), text)


def build_model(spec: VarietySpec, cache_dir=None) -> tuple[FreeLieAlgebra, Any, QuotientAlgebra]:
    free = free_lie_algebra(spec.n, spec.c, cache_dir=cache_dir)
    V = verbal_closure(free, spec.laws)
    if V.rank == free.dim and free.dim:
        raise UsageError("the laws generate the whole algebra")
    return free, V, quotient(free, V)


def _grad_matches_ring(ring, gr) -> tuple[bool, dict]:
    """Same basis (pure-weight unit vectors in one frame) and identical constants."""
    reps = [r.degree_component(r.min_degree()) for r in gr.reps]
    same_basis = len(reps) == len(ring.basis_vectors) and all(
        a.coeffs == b.coeffs for a, b in zip(reps, ring.basis_vectors)
    )
    same_table = ring.structure_table() == gr.structure_table()
    return same_basis and same_table, {"same_basis": same_basis, "same_structure": same_table}


# ---------------------------------------------------------------------------
# checks


def check_free_model(n: int, c: int, cache_dir=None) -> Report:
    rep = Report(f"free({n},{c})")
    L = rep.timed("build", lambda: free_lie_algebra(n, c, cache_dir=cache_dir))
    group = MGroup(L)
    H = rep.timed("closure", lambda: subgroup_closure([group.element(g) for g in L.generators()], group=group))
    R = rep.timed("graded_ring", lambda: graded_ring(H))
    gr = rep.timed("associated_graded", lambda: associated_graded(L))
    witt = [witt_dimension(n, m) for m in range(1, c + 1)]
    witt = [w for w in witt if w]
    ranks = R.component_ranks()
    rep.witnesses.update(dim=L.dim, hirsch=hirsch(H), ranks=ranks)
    rep.step("hirsch number equals dimension", hirsch(H) == L.dim, hirsch=hirsch(H), dim=L.dim)
    rep.step("graded ranks match necklace counts", ranks == witt, expected=witt, actual=ranks)
    rep.step("graded ring integral", R.integral)
    ok, detail = _grad_matches_ring(R, gr)
    rep.step("graded ring equals associated graded", ok, **detail)
    defects = graded_identity_defects(L)
    rep.step("associated graded equals the algebra", not defects, defects=defects[:5])
    return rep


def check_theorem_a(spec: VarietySpec, cache_dir=None) -> Report:
    rep = Report(f"theorem-a({spec.n},{spec.c})")
    free, V, Q = rep.timed("model", lambda: build_model(spec, cache_dir))
    group = MGroup(Q)
    gens = [group.element(g) for g in Q.generators()]
    H = rep.timed("closure", lambda: subgroup_closure(gens, group=group))
    rep.witnesses.update(
        dim_free=free.dim, verbal_rank=V.rank, dim=Q.dim, lcs=lcs_dims(Q)[:-1], hirsch=hirsch(H)
    )
    rep.step("hirsch number equals dimension", hirsch(H) == Q.dim, hirsch=hirsch(H), dim=Q.dim)
    m = rep.timed("magnus", lambda: magnus_check(H))
    rep.step("magnus", m.torsion_free, factors=m.factors, witness=m.witness)
    R = rep.timed("graded_ring", lambda: graded_ring(H))
    rep.witnesses["graded_ranks"] = R.component_ranks()
    frame = H.frame
    images = [R.from_leading(frame.to_frame(g.log), 1) for g in gens]
    hom = rep.timed("eta", lambda: hom_from_generators(Q, R, images))
    rep.step(
        "generator map is a well-defined isomorphism",
        hom.well_defined and hom.is_isomorphism,
        well_defined=hom.well_defined, rank=hom.rank, dim=Q.dim, witness=hom.witness,
    )
    defects = graded_identity_defects(Q)
    rep.step("associated graded equals the algebra", not defects, defects=defects[:5])
    fi = rep.timed("full_invariance", lambda: is_fully_invariant(V))
    rep.step("verbal ideal is fully invariant", fi)
    return rep


def check_tower(spec: VarietySpec, c_min: int, c_max: int, cache_dir=None) -> Report:
    rep = Report(f"tower({spec.n},{c_min}..{c_max})")
    if c_min < 1 or c_max < c_min:
        raise UsageError("need 1 <= c_min <= c_max")
    models = {c: rep.timed(f"model{c}", lambda c=c: build_model(spec.with_class(c), cache_dir)[2])
              for c in range(c_min, c_max + 1)}
    kernels = []
    for c in range(c_min, c_max):
        big, small = models[c + 1], models[c]
        hom = hom_from_generators(big, small, small.generators())
        if not (hom.well_defined and hom.generates_domain):
            rep.step(f"{c + 1}->{c} well defined", False, witness=hom.witness)
            continue
        matrix = [[img[k] for img in hom.images] for k in range(small.dim)]
        ker = kernel_basis(matrix) if big.dim else []
        ker_span = EchelonBasis(big.dim, ({k: x for k, x in enumerate(v) if x} for v in ker))
        gamma = lcs(big)[c] if c < len(lcs(big)) else EchelonBasis(big.dim)
        kernels.append(len(ker))
        rep.step(
            f"{c + 1}->{c} surjective with kernel gamma_{c + 1}",
            hom.is_surjective and ker_span.same_space(gamma),
            kernel_dim=len(ker), gamma_dim=gamma.rank, rank=hom.rank,
        )
    rep.witnesses["kernel_dims"] = kernels
    rep.witnesses["dims"] = [models[c].dim for c in sorted(models)]
    return rep


def example5_algebra(cache_dir=None) -> tuple[FreeLieAlgebra, LieElement, QuotientAlgebra]:
    free = free_lie_algebra(4, 3, cache_dir=cache_dir)
    v = parse_bracket(free, "[1,2]") + parse_bracket(free, "[3,4,3]")
    return free, v, quotient(free, ideal_closure(free, [v]))


def run_example_5(cache_dir=None) -> Report:
    rep = Report("example5")
    free, v, Q = rep.timed("model", lambda: example5_algebra(cache_dir))
    I = Q.ideal
    expected = EchelonBasis(free.dim, [v.coeffs] + [parse_bracket(free, f"[1,2,{i}]").coeffs for i in range(1, 5)])
    rep.step("ideal is span of v and [x1,x2,xi]", I.rank == 5 and I.span.same_space(expected), rank=I.rank)
    rep.step("dim L", Q.dim == 25, dim=Q.dim)
    rel = Q.bracket(Q.y(1), Q.y(2)) + Q.reduce(parse_bracket(free, "[3,4,3]"))
    rep.step("[y1,y2] = -[y3,y4,y3]", not rel, residue=rel)
    dims = lcs_dims(Q)
    gr = associated_graded(Q)
    gdims = gr.component_dims()
    ybar = gr.bracket(gr.project(Q.y(1), 1), gr.project(Q.y(2), 1))
    rep.step("lower central series", dims == [25, 21, 16, 0], dims=dims)
    rep.step("associated graded", gdims == [4, 5, 16] and not ybar, dims=gdims, bracket_y1_y2=ybar)
    V = rep.timed("verbal", lambda: verbal_closure(free, [v]))
    gamma2 = lcs(free)[1]
    rep.step("verbal closure of v is gamma_2", V.rank == 26 and V.span.same_space(gamma2), rank=V.rank)
    fi = rep.timed("full_invariance", lambda: is_fully_invariant(I))
    rep.step("ideal is not fully invariant", not fi)

    group = MGroup(Q)
    y = [group.element(Q.y(i)) for i in range(1, 5)]
    lhs = gcommutator(y[0], y[1])
    rhs = ginv(gcommutator_left(y[2], y[3], y[2]))
    rep.step("(y1,y2) = (y3,y4,y3)^-1", lhs == rhs, lhs=lhs.log, rhs=rhs.log)
    H = rep.timed("closure", lambda: subgroup_closure(y, group=group))
    rep.step("hirsch number", hirsch(H) == 25, hirsch=hirsch(H))
    m = rep.timed("magnus", lambda: magnus_check(H))
    ab = m.factors.get(2, [])
    rep.step("H/H' free abelian of rank 4", m.abelianization_rank == 4 and all(x == 1 for x in ab),
             rank=m.abelianization_rank, factors=ab)
    # degree-2 leading terms of (y3,y1), (y3,y2), (y4,y1), (y4,y2), (y4,y3)
    leads = [gcommutator(y[a - 1], y[b - 1]).log.degree_component(2)
             for a, b in ((3, 1), (3, 2), (4, 1), (4, 2), (4, 3))]
    cols = sorted({k for u in leads for k in u.coeffs})
    mat = [[int(u[k]) for k in cols] for u in leads]
    inv = snf(mat)
    rep.step("commutators (y3,yi),(y4,yj) independent modulo gamma_3", inv == [1] * 5, invariants=inv)
    rep.step("H is magnus", m.torsion_free, factors=m.factors)
    obs = rep.timed("obstruction", lambda: commuting_pair_obstruction(Q))
    ref = match_reference(obs.system)
    rep.step("commuting-pair system contains the reference relations", not ref["missing"],
             matched=ref["matched"], missing=ref["missing"], extra=len(ref["extra"]))
    rep.step("commuting-pair obstruction", obs.unsat, verdict=obs.verdict, cases=obs.cases, refuted=obs.refuted)
    R = rep.timed("graded_ring", lambda: graded_ring(H))
    ok, detail = _grad_matches_ring(R, gr)
    rep.step("graded ring equals associated graded", ok and R.integral, integral=R.integral, **detail)
    rep.witnesses.update(dims={"L": Q.dim, "gamma": dims[:-1], "grad": gdims}, equations=len(obs.system.equations))
    return rep


CHECKS: dict[str, Callable[..., Report]] = {
    "free": check_free_model,
    "theorem-a": check_theorem_a,
    "tower": check_tower,
    "example5": run_example_5,
}


def default_suite() -> list[tuple[str, tuple]]:
    """Checks run by ``verify all``."""
    metabelian = ("[[1,2],[3,4]]",)
    return [
        ("free", (2, 2)), ("free", (2, 3)), ("free", (1, 3)),
        ("theorem-a", (2, 2, ())), ("theorem-a", (2, 3, ())), ("theorem-a", (2, 4, ())),
        ("theorem-a", (3, 3, ())), ("theorem-a", (2, 5, metabelian)),
        ("tower", (2, (), 2, 4)), ("tower", (2, metabelian, 4, 5)),
        ("example5", ()),
    ]


def run_named(name: str, args: Sequence, cache_dir=None) -> Report:
    """Dispatch helper with picklable arguments (laws as bracket strings)."""
    if name == "free":
        return check_free_model(*args, cache_dir=cache_dir)
    if name == "theorem-a":
        n, c, laws = args
        return check_theorem_a(VarietySpec(n, c, [law_from_text(t, c) for t in laws]), cache_dir=cache_dir)
    if name == "tower":
        n, laws, lo, hi = args
        return check_tower(VarietySpec(n, hi, [law_from_text(t, hi) for t in laws]), lo, hi, cache_dir=cache_dir)
    if name == "example5":
        return run_example_5(cache_dir=cache_dir)
    raise UsageError(f"unknown check {name!r}")
