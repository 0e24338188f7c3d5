"""The BCH group on a nilpotent Lie algebra and its finitely generated subgroups.

Group elements are stored by their logarithms.  A finitely generated
subgroup is held as a :class:`PolycyclicSequence`: rows ``g_1, ..., g_m``
with strictly increasing leading coordinate such that every subgroup
element is uniquely ``g_1^e_1 o ... o g_m^e_m`` with integer exponents.

Isolators, the graded Lie ring and the Magnus test work in a
:class:`MalcevFrame`: the rational span of ``log H`` rebased so that its
coordinate weights follow its own lower central series.  In that frame the
isolator ``tau_i(H)`` is exactly the set of rows whose leading coordinate
has weight ``>= i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import LieAlgebra, LieElement, decompose, structure_constants_in_basis
from .bch import apply_series, series_for
from .errors import ClosureError, UsageError
from .freelie import FreeLieAlgebra
from .qlinalg import EchelonBasis, format_rat, hnf, rational_xgcd, snf
from .quotient import QuotientAlgebra


# ---------------------------------------------------------------------------
# group arithmetic


class MGroup:
    """``(algebra, o)`` with ``u o v = log(exp u exp v)``."""

    def __init__(self, algebra: LieAlgebra):
        self.algebra = algebra
        self._bch, self._comm = series_for(algebra)
        self._top = max(algebra.degrees, default=0)

    def __repr__(self) -> str:
        return f"<MGroup on {self.algebra!r}>"

    def element(self, log: LieElement) -> "MGroupElement":
        if log.algebra is not self.algebra:
            raise UsageError("element does not belong to this group's algebra")
        return MGroupElement(self, log)

    def identity(self) -> "MGroupElement":
        return MGroupElement(self, self.algebra.zero())

    # raw operations on logarithms
    def mul(self, u: LieElement, v: LieElement) -> LieElement:
        if not u:
            return v
        if not v:
            return u
        return apply_series(self._bch, u, v)

    def comm(self, u: LieElement, v: LieElement) -> LieElement:
        if not u or not v:
            return self.algebra.zero()
        if u.min_degree() + v.min_degree() > self._top:
            return self.algebra.zero()
        return apply_series(self._comm, u, v)


@dataclass(frozen=True, eq=False)
class MGroupElement:
    group: MGroup
    log: LieElement

    def _check(self, other: "MGroupElement") -> None:
        if not isinstance(other, MGroupElement) or other.group.algebra is not self.group.algebra:
            raise UsageError("group elements from different algebras")

    def __mul__(self, other: "MGroupElement") -> "MGroupElement":
        return gmul(self, other)

    def __pow__(self, k: int) -> "MGroupElement":
        return gpower(self, k)

    def __invert__(self) -> "MGroupElement":
        return ginv(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, MGroupElement) and other.group.algebra is self.group.algebra and self.log == other.log

    def __hash__(self):
        return hash(self.log)

    def is_identity(self) -> bool:
        return not self.log

    def __repr__(self) -> str:
        return f"exp({self.log!r})"


def gmul(a: MGroupElement, b: MGroupElement) -> MGroupElement:
    a._check(b)
    return MGroupElement(a.group, a.group.mul(a.log, b.log))


def ginv(a: MGroupElement) -> MGroupElement:
    return MGroupElement(a.group, -a.log)


def gcommutator(a: MGroupElement, b: MGroupElement) -> MGroupElement:
    """``(a, b) = a^-1 b^-1 a b``."""
    a._check(b)
    return MGroupElement(a.group, a.group.comm(a.log, b.log))


def gcommutator_left(*elems: MGroupElement) -> MGroupElement:
    """Left-normed ``(a_1, a_2, ..., a_k)``."""
    if len(elems) < 2:
        raise UsageError("a commutator needs at least two entries")
    acc = elems[0]
    for e in elems[1:]:
        acc = gcommutator(acc, e)
    return acc


def gpower(a: MGroupElement, k: int) -> MGroupElement:
    if isinstance(k, bool) or not isinstance(k, int):
        raise UsageError("group powers take integer exponents only")
    return MGroupElement(a.group, a.log * k)


def gproduct(group: MGroup, elems: Iterable[MGroupElement]) -> MGroupElement:
    acc = group.algebra.zero()
    for e in elems:
        acc = group.mul(acc, e.log)
    return MGroupElement(group, acc)


# ---------------------------------------------------------------------------
# polycyclic sequences


class PolycyclicSequence:
    """Rows with strictly increasing pivots and positive leading coefficients."""

    def __init__(self, group: MGroup, rows: Sequence[LieElement]):
        self.group = group
        self.algebra = group.algebra
        self.rows = list(rows)
        self.pivots = [r.leading_index() for r in self.rows]
        self._by_pivot = {p: k for k, p in enumerate(self.pivots)}
        self._frame: MalcevFrame | None = None

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"<PolycyclicSequence of length {len(self.rows)}>"

    def elements(self) -> list[MGroupElement]:
        return [MGroupElement(self.group, r) for r in self.rows]

    def weights(self) -> list[int]:
        return [self.algebra.degrees[p] for p in self.pivots]

    def leading_coefficients(self) -> list[Fraction]:
        return [r[p] for r, p in zip(self.rows, self.pivots)]

    def tail(self, weight: int) -> "PolycyclicSequence":
        """Subsequence of rows whose pivot weight is ``>= weight``."""
        degs = self.algebra.degrees
        return PolycyclicSequence(self.group, [r for r, p in zip(self.rows, self.pivots) if degs[p] >= weight])

    def rows_of_weight(self, weight: int) -> list[LieElement]:
        degs = self.algebra.degrees
        return [r for r, p in zip(self.rows, self.pivots) if degs[p] == weight]

    def sift(self, g: LieElement) -> tuple[list[int], LieElement]:
        """Strip integral leading powers; returns exponents and the remainder."""
        mul = self.group.mul
        exps = [0] * len(self.rows)
        while g:
            p = g.leading_index()
            k = self._by_pivot.get(p)
            if k is None:
                break
            r = self.rows[k]
            q = g[p] / r[p]
            if q.denominator != 1:
                break
            exps[k] = int(q)
            g = mul(r * -q, g)
        return exps, g

    def collect(self, g: MGroupElement | LieElement) -> list[int] | None:
        log = g.log if isinstance(g, MGroupElement) else g
        if log.algebra is not self.algebra:
            raise UsageError("element does not belong to this sequence's algebra")
        exps, rest = self.sift(log)
        return None if rest else exps

    def contains(self, g: MGroupElement | LieElement) -> bool:
        return self.collect(g) is not None

    def expand(self, exps: Sequence[int]) -> MGroupElement:
        """``g_1^e_1 o ... o g_m^e_m``."""
        if len(exps) != len(self.rows):
            raise UsageError("exponent vector has the wrong length")
        acc = self.algebra.zero()
        for r, e in zip(self.rows, exps):
            if e:
                acc = self.group.mul(acc, r * e)
        return MGroupElement(self.group, acc)

    def same_group(self, other: "PolycyclicSequence") -> bool:
        return (len(self) == len(other) and all(other.contains(r) for r in self.rows)
                and all(self.contains(r) for r in other.rows))

    def to_json(self) -> dict:
        labels = self.algebra.labels
        return {
            "pivots": [labels[p] for p in self.pivots],
            "rows": [[[labels[k], format_rat(x)] for k, x in r.items()] for r in self.rows],
        }

    @property
    def frame(self) -> "MalcevFrame":
        if self._frame is None:
            self._frame = MalcevFrame.of(self)
        return self._frame


def subgroup_closure(
    gens: Iterable[MGroupElement | LieElement],
    conjugators: Iterable[LieElement] = (),
    group: MGroup | None = None,
) -> PolycyclicSequence:
    """Polycyclic sequence for the subgroup generated by ``gens``.

    With ``conjugators`` the result is the normal closure under conjugation
    by those elements (and their inverses).
    """
    logs: list[LieElement] = []
    for g in gens:
        if isinstance(g, MGroupElement):
            group = group or g.group
            if g.group.algebra is not group.algebra:
                raise UsageError("generators from different groups")
            logs.append(g.log)
        else:
            logs.append(g)
    if group is None:
        if not logs:
            raise UsageError("cannot infer the group of an empty generating set")
        group = MGroup(logs[0].algebra)
    alg = group.algebra
    for g in logs:
        if g.algebra is not alg:
            raise UsageError("generator outside the group's algebra")
    conj = [c for c in conjugators if c]
    mul, comm = group.mul, group.comm
    top = max(alg.degrees, default=0)
    degs = alg.degrees

    rows: dict[int, tuple[int, LieElement]] = {}  # pivot -> (serial, row)
    serial = 0
    pending = [g for g in logs if g]
    checked: set[tuple[int, int, int]] = set()
    budget = max(1, alg.dim) * 2 ** max(1, top) * 8
    passes = 0

    def reduce(g: LieElement) -> LieElement:
        nonlocal serial
        while g:
            p = g.leading_index()
            got = rows.get(p)
            if got is None:
                if g[p] < 0:
                    g = -g
                serial += 1
                rows[p] = (serial, g)
                return alg.zero()
            r = got[1]
            q = g[p] / r[p]
            if q.denominator == 1:
                g = mul(r * -q, g)
                continue
            d, s, t = rational_xgcd(r[p], g[p])
            new = mul(r * s, g * t)
            serial += 1
            rows[p] = (serial, new)
            pending.extend([r, g])
            return alg.zero()
        return g

    while True:
        passes += 1
        if passes > budget:
            raise ClosureError(f"subgroup closure exceeded {budget} passes")
        while pending:
            reduce(pending.pop())
        order = sorted(rows)
        for a_pos, pa in enumerate(order):
            sa, ra = rows[pa]
            wa = degs[pa]
            partners = [(rows[pb][0], rows[pb][1]) for pb in order[a_pos + 1:]]
            partners += [(-(k + 1), c) for k, c in enumerate(conj)]
            for sb, rb in partners:
                key = (sa, sb, 0)
                if key in checked:
                    continue
                checked.add(key)
                if wa + rb.min_degree() > top:
                    continue
                for sign in (1, -1):
                    # (g_j, g_i^{+-1}) for rows, (g, h^{+-1}) for conjugators
                    c = comm(rb, ra * sign) if sb > 0 else comm(ra, rb * sign)
                    if c:
                        pending.append(c)
        # keep only genuinely new material
        fresh = []
        for g in pending:
            g2 = _sift_rows(rows, g, mul)
            if g2:
                fresh.append(g2)
        pending = fresh
        if not pending:
            break
    return PolycyclicSequence(group, [rows[p][1] for p in sorted(rows)])


def _sift_rows(rows: dict[int, tuple[int, LieElement]], g: LieElement, mul) -> LieElement:
    while g:
        p = g.leading_index()
        got = rows.get(p)
        if got is None:
            return g
        r = got[1]
        q = g[p] / r[p]
        if q.denominator != 1:
            return g
        g = mul(r * -q, g)
    return g


def collect(H: PolycyclicSequence, g: MGroupElement | LieElement) -> list[int] | None:
    """Exponent vector of ``g`` in the normal form of ``H``, or None if ``g`` is not in ``H``."""
    return H.collect(g)


def hirsch(H: PolycyclicSequence) -> int:
    return len(H.rows)


def gamma_subgroup(H: PolycyclicSequence, i: int) -> PolycyclicSequence:
    """``gamma_i(H)``: iterated normal closure of commutators with ``H``."""
    if i < 1:
        raise UsageError("lower central series terms start at 1")
    current = H
    for _ in range(i - 1):
        if not current.rows:
            break
        current = gamma_subgroup_step(H, current)
    return current


def lower_central_series(H: PolycyclicSequence) -> list[PolycyclicSequence]:
    """``[gamma_1(H), gamma_2(H), ..., trivial]``."""
    out = [H]
    top = max(H.algebra.degrees, default=0)
    while out[-1].rows:
        if len(out) > top + 1:
            raise ClosureError("lower central series did not terminate")
        out.append(gamma_subgroup_step(H, out[-1]))
    return out


def gamma_subgroup_step(H: PolycyclicSequence, current: PolycyclicSequence) -> PolycyclicSequence:
    top = max(H.algebra.degrees, default=0)
    seeds = []
    for a in current.rows:
        for b in H.rows:
            if a.min_degree() + b.min_degree() <= top:
                c = H.group.comm(a, b)
                if c:
                    seeds.append(c)
    return subgroup_closure(seeds, conjugators=H.rows, group=H.group)


# ---------------------------------------------------------------------------
# Mal'cev frame


@dataclass
class MalcevFrame:
    """The subalgebra ``W = span_Q log H`` with an LCS-adapted basis.

    ``vectors[k]`` (ambient coordinates) is frame basis vector ``k``;
    ``algebra`` carries the structure constants and weights (LCS levels of
    ``W``); ``H`` is the subgroup re-closed in frame coordinates.
    """

    source: PolycyclicSequence
    algebra: LieAlgebra
    vectors: list[LieElement] | None
    H: PolycyclicSequence

    @property
    def is_identity(self) -> bool:
        return self.vectors is None

    def to_frame(self, u: LieElement) -> LieElement:
        if self.vectors is None:
            return u
        coeffs = decompose(u, self.vectors)
        if coeffs is None:
            raise UsageError("element lies outside span(log H)")
        return LieElement(self.algebra, {k: x for k, x in enumerate(coeffs) if x}, _trusted=True)

    def from_frame(self, u: LieElement) -> LieElement:
        if self.vectors is None:
            return u
        amb = self.source.algebra
        out = amb.zero()
        for k, x in u.coeffs.items():
            out = out + self.vectors[k] * x
        return out

    def sequence_to_frame(self, S: PolycyclicSequence) -> PolycyclicSequence:
        if self.vectors is None:
            return S
        return subgroup_closure([self.to_frame(r) for r in S.rows], group=self.H.group) if S.rows \
            else PolycyclicSequence(self.H.group, [])

    @classmethod
    def of(cls, H: PolycyclicSequence) -> "MalcevFrame":
        alg = H.algebra
        if len(H.rows) == alg.dim and _coordinate_lcs(alg):
            return cls(H, alg, None, H)
        W = EchelonBasis(alg.dim, (r.coeffs for r in H.rows))
        basis_w = [LieElement(alg, r, _trusted=True) for r in W.rows()]
        chain = [W]
        while chain[-1].rank:
            nxt = EchelonBasis(alg.dim)
            for r in chain[-1].rows():
                u = LieElement(alg, r, _trusted=True)
                for b in basis_w:
                    w = alg.bracket(u, b)
                    if w:
                        nxt.add(w.coeffs)
            if nxt.rank == chain[-1].rank:
                raise UsageError("span of log H is not nilpotent")
            chain.append(nxt)
        vectors: list[LieElement] = []
        degrees: list[int] = []
        for t in range(1, len(chain)):
            below = set(chain[t].pivots)
            for r in chain[t - 1].rows():
                if min(r) not in below:
                    vectors.append(LieElement(alg, r, _trusted=True))
                    degrees.append(t)
        table = structure_constants_in_basis(alg, vectors)
        frame_alg = LieAlgebra(
            degrees, table,
            labels=[f"w{k + 1}" for k in range(len(vectors))],
            nilpotency_class=alg.nilpotency_class,
            name=f"frame({alg.name})",
        )
        frame = cls(H, frame_alg, vectors, None)  # type: ignore[arg-type]
        group = MGroup(frame_alg)
        frame.H = subgroup_closure([frame.to_frame(r) for r in H.rows], group=group) if H.rows \
            else PolycyclicSequence(group, [])
        return frame


def _coordinate_lcs(alg: LieAlgebra) -> bool:
    """True when ``gamma_t(alg)`` is the span of coordinates of weight ``>= t``."""
    if isinstance(alg, FreeLieAlgebra):
        return True
    return isinstance(alg, QuotientAlgebra) and isinstance(alg.ambient, FreeLieAlgebra)


def isolator(H: PolycyclicSequence, i: int) -> PolycyclicSequence:
    """``tau_i(H)`` in frame coordinates (see :attr:`PolycyclicSequence.frame`)."""
    if i < 1:
        raise UsageError("isolator index starts at 1")
    return H.frame.H.tail(i)


def isolator_index(H: PolycyclicSequence, i: int) -> list[int]:
    """Invariant factors of ``gamma_i(H)`` inside ``tau_i(H)``, graded piece by graded piece.

    ``[tau_i : gamma_i]`` is their product; all ones iff the two agree.
    """
    frame = H.frame
    gam = frame.sequence_to_frame(gamma_subgroup(H, i))
    tau = frame.H.tail(i)
    return _lattice_index(tau, gam)


def _weight_lattice(S: PolycyclicSequence, w: int) -> list[LieElement]:
    return [r.degree_component(w) for r in S.rows_of_weight(w)]


def _lattice_index(big: PolycyclicSequence, small: PolycyclicSequence) -> list[int]:
    """Invariant factors of ``small`` in ``big`` over all graded pieces.

    Both are polycyclic sequences in one frame with ``small`` a subgroup of
    ``big``.  A zero factor marks a rank drop (infinite index).
    """
    factors: list[int] = []
    weights = sorted(set(big.weights()) | set(small.weights()))
    for w in weights:
        B = _weight_lattice(big, w)
        S = _weight_lattice(small, w)
        if not B:
            if S:
                raise UsageError("sequence is not contained in the larger one")
            continue
        rows = []
        for s in S:
            coeffs = decompose(s, B)
            if coeffs is None or any(x.denominator != 1 for x in coeffs):
                raise UsageError("sequence is not contained in the larger one")
            rows.append([int(x) for x in coeffs])
        if len(S) < len(B):
            factors.extend([0] * (len(B) - len(S)))
        if rows:
            factors.extend(snf(rows))
    return factors


# ---------------------------------------------------------------------------
# graded Lie ring


class GradedLieRing(LieAlgebra):
    """``tau_1/tau_2 + tau_2/tau_3 + ...`` with the commutator-induced bracket.

    Basis vector ``k`` is the class of a weight-``degrees[k]`` frame vector
    ``basis_vectors[k]``; per weight these vectors are the Hermite-reduced
    lattice of leading parts of the subgroup's rows.  Structure constants
    are computed from group commutators and are integers.
    """

    def __init__(self, frame: MalcevFrame, scalars: str = "rationals"):
        if scalars not in ("rationals", "integers"):
            raise UsageError("scalars must be 'rationals' or 'integers'")
        self.frame = frame
        self.scalars = scalars
        seq = frame.H
        fa = frame.algebra
        group = seq.group
        weights = sorted(set(seq.weights()))
        basis_vectors: list[LieElement] = []
        lifts: list[LieElement] = []
        degrees: list[int] = []
        self.slices: dict[int, range] = {}
        for w in weights:
            rows = seq.rows_of_weight(w)
            lead = [r.degree_component(w) for r in rows]
            basis, transform = _hermite_basis(lead)
            start = len(basis_vectors)
            for b, coeffs in zip(basis, transform):
                basis_vectors.append(b)
                acc = fa.zero()
                for r, e in zip(rows, coeffs):
                    if e:
                        acc = group.mul(acc, r * e)
                lifts.append(acc)
                degrees.append(w)
            self.slices[w] = range(start, len(basis_vectors))
        self.basis_vectors = basis_vectors
        self.lifts = lifts
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        self.integral = True
        tails = {w: seq.tail(w) for w in weights}
        for a in range(len(lifts)):
            for b in range(a + 1, len(lifts)):
                t = degrees[a] + degrees[b]
                if t not in self.slices:
                    continue
                c = group.comm(lifts[a], lifts[b])
                if not c:
                    continue
                tail = tails[t]
                exps = tail.collect(c)
                if exps is None:
                    raise ClosureError("commutator escaped the next isolator")
                lead = fa.zero()
                for r, e in zip(tail.rows, exps):
                    if e and fa.degrees[r.leading_index()] == t:
                        lead = lead + r.degree_component(t) * e
                coords = self._coords(lead, t)
                if any(x.denominator != 1 for x in coords.values()):
                    self.integral = False
                if coords:
                    table[(a, b)] = coords
        super().__init__(
            degrees=degrees,
            table=table,
            labels=[f"{fa.labels[v.leading_index()]}^" for v in basis_vectors],
            nilpotency_class=max(degrees, default=0),
            name="L(H)",
        )

    def _coords(self, v: LieElement, w: int) -> dict[int, Fraction]:
        sl = self.slices.get(w)
        if sl is None or not v:
            return {}
        coeffs = decompose(v, [self.basis_vectors[k] for k in sl])
        if coeffs is None:
            raise UsageError(f"vector is outside the weight-{w} component")
        return {sl[k]: x for k, x in enumerate(coeffs) if x}

    def from_leading(self, v: LieElement, weight: int) -> LieElement:
        """Class of a frame vector of pure weight ``weight``."""
        return LieElement(self, self._coords(v.degree_component(weight), weight), _trusted=True)

    def component_ranks(self) -> list[int]:
        return [len(self.slices[w]) for w in sorted(self.slices)]

    def integer_table(self) -> dict[tuple[int, int], dict[int, int]]:
        if not self.integral:
            raise UsageError("structure constants are not integral")
        return {k: {i: int(x) for i, x in v.items()} for k, v in self.structure_table().items()}

    def to_json(self) -> dict:
        return {
            "ranks": self.component_ranks(),
            "structure": {f"{i},{j}": [[k, format_rat(x)] for k, x in sorted(v.items())]
                          for (i, j), v in sorted(self.structure_table().items())},
        }


def _hermite_basis(vectors: list[LieElement]) -> tuple[list[LieElement], list[list[int]]]:
    """Reduced lattice basis of the Z-span of ``vectors`` plus integer
    combinations producing each basis vector."""
    if not vectors:
        return [], []
    alg = vectors[0].algebra
    cols = sorted({k for v in vectors for k in v.coeffs})
    den = 1
    for v in vectors:
        for x in v.coeffs.values():
            den = den * x.denominator // math.gcd(den, x.denominator)
    m = [[int(v[k] * den) for k in cols] for v in vectors]
    h, t = hnf(m)
    basis, combos = [], []
    for hr, tr in zip(h, t):
        if not any(hr):
            continue
        basis.append(LieElement(alg, {cols[j]: Fraction(x, den) for j, x in enumerate(hr) if x}, _trusted=True))
        combos.append(tr)
    return basis, combos


def graded_ring(H: PolycyclicSequence, scalars: str = "rationals") -> GradedLieRing:
    return GradedLieRing(H.frame, scalars)


# ---------------------------------------------------------------------------
# Magnus test


@dataclass
class MagnusResult:
    torsion_free: bool
    factors: dict[int, list[int]] = field(default_factory=dict)
    abelianization_rank: int = 0
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.torsion_free


def magnus_check(H: PolycyclicSequence) -> MagnusResult:
    """Decide whether every ``gamma_i(H)/gamma_{i+1}(H)`` is torsion-free.

    For each ``i`` the Smith invariants of ``gamma_i(H)`` inside its isolator
    ``tau_i(H)`` are computed piece by piece; the quotients are torsion-free
    for all ``i`` exactly when every isolator index is 1.
    """
    frame = H.frame
    top = max(frame.algebra.degrees, default=0)
    factors: dict[int, list[int]] = {}
    ok = True
    witness = None
    for i in range(2, top + 1):
        gam = frame.sequence_to_frame(gamma_subgroup(H, i))
        tau = frame.H.tail(i)
        f = _lattice_index(tau, gam)
        factors[i] = f
        if any(x != 1 for x in f) and ok:
            ok = False
            bad = next(r for r in tau.rows if not gam.contains(r))
            witness = {"i": i, "element": frame.from_frame(bad)}
    return MagnusResult(ok, factors, len(frame.H.rows_of_weight(1)), witness)
