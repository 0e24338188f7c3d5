"""Ideals, quotients, verbal closures and associated graded algebras.

Ideals are echelonized against the (degree, lex) basis order with pivots on
the earliest index, so a quotient keeps the non-pivot basis vectors as its
adapted basis and the coordinate filtration by degree is exactly the lower
central series of the quotient.  Ideals need not be homogeneous.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import LieAlgebra, LieElement, decompose
from .errors import UsageError
from .freelie import FreeLieAlgebra, substitute
from .qlinalg import EchelonBasis, format_rat


# ---------------------------------------------------------------------------
# ideals


@dataclass
class IdealSubspace:
    ambient: LieAlgebra
    span: EchelonBasis

    @property
    def rank(self) -> int:
        return self.span.rank

    @property
    def pivots(self) -> list[int]:
        return self.span.pivots

    def rows(self) -> list[LieElement]:
        return [LieElement(self.ambient, r) for r in self.span.rows()]

    def contains(self, u: LieElement) -> bool:
        return self.span.contains(u.coeffs)

    def reduce(self, u: LieElement) -> LieElement:
        return LieElement(self.ambient, self.span.reduce(u.coeffs), _trusted=True)

    def same_space(self, other: "IdealSubspace") -> bool:
        return self.span.same_space(other.span)

    def is_homogeneous(self) -> bool:
        return all(r.is_homogeneous() for r in self.rows())


def _span_closure(algebra: LieAlgebra, seeds: Iterable[LieElement], multipliers: Sequence[LieElement]) -> EchelonBasis:
    """Smallest subspace containing ``seeds`` and closed under ``ad(m)`` for
    every ``m`` in ``multipliers``."""
    eb = EchelonBasis(algebra.dim)
    queue = list(seeds)
    while queue:
        v = queue.pop()
        new = eb.add(v.coeffs)
        if new is None:
            continue
        w = LieElement(algebra, dict(new), _trusted=True)
        for m in multipliers:
            b = algebra.bracket(w, m)
            if b:
                queue.append(b)
    return eb


def ideal_closure(ambient: LieAlgebra, generators: Iterable[LieElement]) -> IdealSubspace:
    gens = list(generators)
    for g in gens:
        if g.algebra is not ambient:
            raise UsageError("ideal generators must lie in the ambient algebra")
    return IdealSubspace(ambient, _span_closure(ambient, gens, ambient.basis()))


def zero_ideal(ambient: LieAlgebra) -> IdealSubspace:
    return IdealSubspace(ambient, EchelonBasis(ambient.dim))


# ---------------------------------------------------------------------------
# verbal closure


def multihomogeneous_components(f: LieElement) -> dict[tuple[int, ...], LieElement]:
    """Split an element of a free algebra by multidegree in the generators."""
    alg = f.algebra
    if not isinstance(alg, FreeLieAlgebra):
        raise UsageError("laws must be elements of a free nilpotent Lie algebra")
    parts: dict[tuple[int, ...], dict[int, Fraction]] = defaultdict(dict)
    for i, x in f.coeffs.items():
        word = alg.basis_info.elements[i].word
        md = tuple(word.count(g) for g in range(1, alg.n + 1))
        parts[md][i] = x
    return {md: alg.element(c) for md, c in parts.items()}


def law_values(law: LieElement, target: LieAlgebra) -> list[LieElement]:
    """Elements spanning the values of ``law`` on ``target``.

    Each multihomogeneous component is fully polarized (inclusion-exclusion
    over slot subsets) and evaluated on every tuple of basis elements whose
    degrees fit under the nilpotency class.  Over Q the span of these
    values equals the span of ``law(u_1, ..., u_k)`` over all ``u_i``.
    """
    out = []
    degs = target.degrees
    cap = target.nilpotency_class
    by_index = target.basis()
    zero = target.zero()
    n_vars = law.algebra.n
    for md, comp in multihomogeneous_components(law).items():
        if sum(md) > cap:
            continue
        slot_var = [g for g in range(n_vars) for _ in range(md[g])]

        def tuples(g: int, budget: int):
            if g == n_vars:
                yield ()
                return
            d = md[g]
            if d == 0:
                for rest in tuples(g + 1, budget):
                    yield ((),) + rest
                return
            for combo in itertools.combinations_with_replacement(range(target.dim), d):
                used = sum(degs[i] for i in combo)
                if used > budget - (sum(md[g + 1:])):
                    continue
                for rest in tuples(g + 1, budget - used):
                    yield (combo,) + rest

        for choice in tuples(0, cap):
            slots = [i for combo in choice for i in combo]
            value = zero
            # polarization: sum over subsets S of slots, sign (-1)^(N-|S|)
            for mask in range(1 << len(slots)):
                images = [zero] * n_vars
                size = 0
                for s, i in enumerate(slots):
                    if mask >> s & 1:
                        images[slot_var[s]] = images[slot_var[s]] + by_index[i]
                        size += 1
                if any(md[g] and not images[g] for g in range(n_vars)):
                    continue
                term = substitute(images, comp)
                if not term:
                    continue
                value = value + term if (len(slots) - size) % 2 == 0 else value - term
            if value:
                out.append(value)
    return out


def verbal_closure(ambient: LieAlgebra, laws: Iterable[LieElement]) -> IdealSubspace:
    """Verbal ideal of ``ambient`` generated by ``laws``.

    Laws may come from a free algebra of any rank; their values on
    ``ambient`` are enumerated by :func:`law_values` and closed into an ideal.
    """
    values: list[LieElement] = []
    for f in laws:
        values.extend(law_values(f, ambient))
    return ideal_closure(ambient, values)


def is_fully_invariant(ideal: IdealSubspace) -> bool:
    closure = verbal_closure(ideal.ambient, ideal.rows())
    return closure.rank == ideal.rank


# ---------------------------------------------------------------------------
# quotients


class QuotientAlgebra(LieAlgebra):
    """``ambient / ideal`` on the adapted basis of non-pivot ambient indices.

    Elements are :class:`LieElement` over this algebra (quotient
    coordinates); :meth:`reduce` maps ambient elements in and :meth:`lift`
    returns the canonical representative.
    """

    def __init__(self, ambient: LieAlgebra, ideal: IdealSubspace, name: str = ""):
        if ideal.ambient is not ambient:
            raise UsageError("ideal belongs to a different algebra")
        self.ambient = ambient
        self.ideal = ideal
        piv = set(ideal.pivots)
        self.adapted_basis = [i for i in range(ambient.dim) if i not in piv]
        self._pos = {a: k for k, a in enumerate(self.adapted_basis)}
        table = {}
        reps = [ambient.basis_element(a) for a in self.adapted_basis]
        for p in range(len(reps)):
            for q in range(p + 1, len(reps)):
                w = ambient.bracket(reps[p], reps[q])
                if w:
                    r = self._reduce_coeffs(w)
                    if r:
                        table[(p, q)] = r
        super().__init__(
            degrees=[ambient.degrees[a] for a in self.adapted_basis],
            table=table,
            labels=[ambient.labels[a] for a in self.adapted_basis],
            nilpotency_class=ambient.nilpotency_class,
            name=name or f"{getattr(ambient, 'name', '')}/I",
        )

    def _reduce_coeffs(self, u: LieElement) -> dict[int, Fraction]:
        r = self.ideal.span.reduce(u.coeffs)
        return {self._pos[k]: x for k, x in r.items()}

    def reduce(self, u: LieElement) -> LieElement:
        if u.algebra is not self.ambient:
            raise UsageError("reduce expects an ambient element")
        return LieElement(self, self._reduce_coeffs(u), _trusted=True)

    def lift(self, q: LieElement) -> LieElement:
        if q.algebra is not self:
            raise UsageError("lift expects a quotient element")
        return LieElement(self.ambient, {self.adapted_basis[k]: x for k, x in q.coeffs.items()}, _trusted=True)

    def generators(self) -> list[LieElement]:
        return [self.reduce(g) for g in self.ambient.generators()]

    def y(self, i: int) -> LieElement:
        """Image of the ambient generator ``x_i`` (1-based)."""
        return self.reduce(self.ambient.x(i))

    def words(self) -> list[str]:
        amb = self.ambient
        return [amb.basis_info.word_string(a) for a in self.adapted_basis]

    def relations(self) -> list[tuple[int, LieElement]]:
        """``(pivot, replacement)`` with ``e_pivot == replacement`` modulo the ideal."""
        out = []
        for row in self.ideal.rows():
            p = row.leading_index()
            out.append((p, self.ambient.basis_element(p) - row))
        return out

    def describe(self) -> dict:
        amb = self.ambient
        if not isinstance(amb, FreeLieAlgebra):
            raise UsageError("description export needs a free ambient algebra")
        ws = amb.basis_info.word_string
        return {
            "ambient": {"n": amb.n, "c": amb.c},
            "ideal_rank": self.ideal.rank,
            "adapted_basis": self.words(),
            "relations": [
                [ws(p), [[ws(k), format_rat(x)] for k, x in rep.items()]]
                for p, rep in self.relations()
            ],
        }


def quotient(ambient: LieAlgebra, ideal: IdealSubspace) -> QuotientAlgebra:
    return QuotientAlgebra(ambient, ideal)


# ---------------------------------------------------------------------------
# subalgebras, lower central series, associated graded


def generated_subalgebra(algebra: LieAlgebra, gens: Iterable[LieElement]) -> EchelonBasis:
    gens = list(gens)
    return _span_closure(algebra, gens, gens)


def lcs(algebra: LieAlgebra) -> list[EchelonBasis]:
    """``[gamma_1, gamma_2, ..., 0]`` with ``gamma_{t+1} = [gamma_t, algebra]``."""
    basis = algebra.basis()
    chain = [EchelonBasis(algebra.dim, (b.coeffs for b in basis))]
    while chain[-1].rank:
        nxt = EchelonBasis(algebra.dim)
        for r in chain[-1].rows():
            u = LieElement(algebra, r, _trusted=True)
            for b in basis:
                w = algebra.bracket(u, b)
                if w:
                    nxt.add(w.coeffs)
        if nxt.rank == chain[-1].rank:
            raise UsageError("algebra is not nilpotent")
        chain.append(nxt)
    return chain


def lcs_dims(algebra: LieAlgebra) -> list[int]:
    return [g.rank for g in lcs(algebra)]


class GradedAlgebra(LieAlgebra):
    """``gamma_1/gamma_2 + gamma_2/gamma_3 + ...`` with the induced bracket.

    ``reps[k]`` is a representative in the source algebra for basis vector
    ``k``; component ``t`` uses the rows of ``gamma_t`` whose pivots are not
    pivots of ``gamma_{t+1}``.
    """

    def __init__(self, source: LieAlgebra, chain: list[EchelonBasis]):
        self.source = source
        self.chain = chain
        reps: list[LieElement] = []
        degrees: list[int] = []
        self.component_slices: dict[int, range] = {}
        for t in range(1, len(chain)):
            below = set(chain[t].pivots)
            start = len(reps)
            for r in chain[t - 1].rows():
                if min(r) not in below:
                    reps.append(LieElement(source, r, _trusted=True))
                    degrees.append(t)
            self.component_slices[t] = range(start, len(reps))
        self.reps = reps
        table = {}
        for a in range(len(reps)):
            for b in range(a + 1, len(reps)):
                t = degrees[a] + degrees[b]
                if t not in self.component_slices:
                    continue
                w = source.bracket(reps[a], reps[b])
                coeffs = self._component_coords(w, t)
                if coeffs:
                    table[(a, b)] = coeffs
        super().__init__(
            degrees=degrees,
            table=table,
            labels=[f"{source.labels[r.leading_index()]}~" for r in reps] if reps else [],
            nilpotency_class=max(degrees, default=0),
            name=f"grad({source.name})",
        )

    def _component_coords(self, w: LieElement, t: int) -> dict[int, Fraction]:
        """Coordinates of the class of ``w`` in component ``t`` (``w`` in gamma_t)."""
        sl = self.component_slices.get(t)
        if sl is None or not w:
            return {}
        basis = [self.reps[k] for k in sl]
        basis += [LieElement(self.source, r, _trusted=True) for r in self.chain[t].rows()]
        coeffs = decompose(w, basis)
        if coeffs is None:
            raise UsageError(f"element is not in gamma_{t}")
        return {sl[k]: x for k, x in enumerate(coeffs[: len(sl)]) if x}

    def component_dims(self) -> list[int]:
        return [len(self.component_slices[t]) for t in sorted(self.component_slices)]

    def project(self, w: LieElement, t: int) -> LieElement:
        """Class of ``w`` (an element of gamma_t of the source) in component ``t``."""
        if w.algebra is not self.source:
            raise UsageError("project expects an element of the source algebra")
        return LieElement(self, self._component_coords(w, t), _trusted=True)


def associated_graded(algebra: LieAlgebra) -> GradedAlgebra:
    return GradedAlgebra(algebra, lcs(algebra))


# ---------------------------------------------------------------------------
# homomorphisms defined on generators


@dataclass
class HomResult:
    well_defined: bool
    generates_domain: bool
    images: list[LieElement] = field(default_factory=list)
    rank: int = 0
    is_injective: bool = False
    is_surjective: bool = False
    witness: LieElement | None = None

    @property
    def is_isomorphism(self) -> bool:
        return self.well_defined and self.generates_domain and self.is_injective and self.is_surjective


def hom_from_generators(
    domain: LieAlgebra,
    codomain: LieAlgebra,
    images: Sequence[LieElement],
    domain_generators: Sequence[LieElement] | None = None,
) -> HomResult:
    """Try to extend ``domain_generators[i] -> images[i]`` to a Lie homomorphism.

    Works on the graph: the subalgebra of ``domain + codomain`` generated by
    the pairs.  The map is well defined iff the graph meets ``0 + codomain``
    trivially; ``witness`` is then a nonzero codomain element forced to be
    the image of zero.
    """
    gens = list(domain_generators) if domain_generators is not None else domain.generators()
    images = list(images)
    if len(gens) != len(images):
        raise UsageError(f"{len(gens)} generators but {len(images)} images")
    for g in gens:
        if g.algebra is not domain:
            raise UsageError("generator outside the domain")
    for im in images:
        if im.algebra is not codomain:
            raise UsageError("image outside the codomain")
    da, db = domain.dim, codomain.dim

    def join(a: LieElement, b: LieElement) -> dict[int, Fraction]:
        d = dict(a.coeffs)
        d.update({da + k: x for k, x in b.coeffs.items()})
        return d

    def split(v: dict[int, Fraction]) -> tuple[LieElement, LieElement]:
        a = {k: x for k, x in v.items() if k < da}
        b = {k - da: x for k, x in v.items() if k >= da}
        return LieElement(domain, a, _trusted=True), LieElement(codomain, b, _trusted=True)

    pairs = list(zip(gens, images))
    graph = EchelonBasis(da + db)
    queue = [join(a, b) for a, b in pairs]
    while queue:
        new = graph.add(queue.pop())
        if new is None:
            continue
        a, b = split(new)
        for ga, gb in pairs:
            ba, bb = domain.bracket(a, ga), codomain.bracket(b, gb)
            if ba or bb:
                queue.append(join(ba, bb))
    rows = graph.rows()
    bad = [r for r in rows if min(r) >= da]
    if bad:
        return HomResult(False, False, witness=split(bad[0])[1])
    generates = len(rows) == da
    result = HomResult(True, generates)
    if generates:
        # full RREF: the domain block of each row is a unit vector
        imgs = [None] * da
        for r in rows:
            a, b = split(r)
            imgs[a.leading_index()] = b
        result.images = imgs
        img_span = EchelonBasis(db, (b.coeffs for b in imgs))
        result.rank = img_span.rank
        result.is_injective = result.rank == da
        result.is_surjective = result.rank == db
    return result


def graded_identity_defects(q: LieAlgebra) -> list[tuple[int, int]]:
    """Basis pairs where the associated graded bracket differs from the
    algebra's own (empty iff the identity regrading is an isomorphism)."""
    gr = associated_graded(q)
    if gr.dim != q.dim:
        return [(-1, -1)]
    bad = []
    for a in range(q.dim):
        for b in range(a + 1, q.dim):
            mine = dict(q.bracket_basis(a, b))
            theirs = dict(gr.bracket_basis(a, b))
            # grad reps are unit vectors of the same index when the filtration is graded
            if gr.reps[a].leading_index() != a or gr.reps[b].leading_index() != b or mine != theirs:
                bad.append((a, b))
    return bad
