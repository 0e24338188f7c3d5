"""Finite-dimensional nilpotent Lie algebras given by structure constants.

Every algebra in the package (free nilpotent, quotients, associated graded
algebras, graded Lie rings, Mal'cev frames) is a :class:`LieAlgebra`.  The
basis is ordered so that the coordinate flags are compatible with the
bracket: if ``S_p`` is the span of basis vectors with index ``>= p`` then
``[S_p, S_p]`` lies in ``S_{p+1}``.  Each basis vector carries a weight
(``degrees``) with ``[weight a, weight b]`` landing in weight ``>= a + b``;
weights are nondecreasing along the basis.  Group arithmetic and
collection in :mod:`nilpot.malcev` rely on both properties.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import UsageError
from .qlinalg import EchelonBasis, SparseVec, format_rat, sparse_axpy


class LieAlgebra:
    """Structure-constant Lie algebra over Q.

    ``table[(i, j)]`` for ``i < j`` is the sparse expansion of ``[e_i, e_j]``;
    missing pairs bracket to zero.
    """

    def __init__(
        self,
        degrees: list[int],
        table: Mapping[tuple[int, int], SparseVec],
        labels: list[str] | None = None,
        nilpotency_class: int | None = None,
        name: str = "",
    ):
        self.dim = len(degrees)
        self.degrees = list(degrees)
        if any(a > b for a, b in zip(self.degrees, self.degrees[1:])):
            raise UsageError("basis weights must be nondecreasing")
        self._table: dict[tuple[int, int], tuple[tuple[int, Fraction], ...]] = {}
        for (i, j), vec in table.items():
            if i == j:
                continue
            items = tuple(sorted((k, Fraction(v)) for k, v in vec.items() if v))
            if not items:
                continue
            if i > j:
                i, j = j, i
                items = tuple((k, -v) for k, v in items)
            self._table[(i, j)] = items
        self.labels = labels if labels is not None else [f"e{i + 1}" for i in range(self.dim)]
        self.nilpotency_class = nilpotency_class if nilpotency_class is not None else max(self.degrees, default=0)
        self.name = name

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name or ''} dim={self.dim}>"

    # -- elements -----------------------------------------------------------

    def element(self, coeffs: Mapping[int, object] | None = None) -> "LieElement":
        return LieElement(self, coeffs or {})

    def zero(self) -> "LieElement":
        return LieElement(self, {})

    def basis_element(self, i: int) -> "LieElement":
        return LieElement(self, {i: Fraction(1)})

    def basis(self) -> list["LieElement"]:
        return [self.basis_element(i) for i in range(self.dim)]

    def from_coords(self, vec: Iterable) -> "LieElement":
        return LieElement(self, {i: Fraction(x) for i, x in enumerate(vec) if x})

    def generators(self) -> list["LieElement"]:
        """Weight-one basis vectors (a generating set when the algebra is
        generated in weight one)."""
        return [self.basis_element(i) for i in range(self.dim) if self.degrees[i] == 1]

    # -- structure ----------------------------------------------------------

    def bracket_basis(self, i: int, j: int) -> tuple[tuple[int, Fraction], ...]:
        if i < j:
            return self._table.get((i, j), ())
        if i > j:
            return tuple((k, -v) for k, v in self._table.get((j, i), ()))
        return ()

    def structure_items(self):
        """Iterate ``((i, j), items)`` over nonzero brackets with ``i < j``."""
        return self._table.items()

    def bracket(self, u: "LieElement", v: "LieElement") -> "LieElement":
        if u.algebra is not self or v.algebra is not self:
            raise UsageError("bracket of elements from different algebras")
        out: SparseVec = {}
        table = self._table
        for i, a in u.coeffs.items():
            for j, b in v.coeffs.items():
                if i == j:
                    continue
                if i < j:
                    items = table.get((i, j))
                    ab = a * b
                else:
                    items = table.get((j, i))
                    ab = -a * b
                if not items:
                    continue
                for k, c in items:
                    nv = out.get(k, 0) + ab * c
                    if nv:
                        out[k] = nv
                    else:
                        del out[k]
        return LieElement(self, out, _trusted=True)

    def structure_table(self) -> dict[tuple[int, int], dict[int, Fraction]]:
        return {k: dict(v) for k, v in self._table.items()}

    def same_structure(self, other: "LieAlgebra") -> bool:
        return self.dim == other.dim and self.structure_table() == other.structure_table()

    def jacobi_defects(self, triples: Iterable[tuple[int, int, int]] | None = None) -> list[tuple[int, int, int]]:
        """Basis triples violating the Jacobi identity (empty when consistent)."""
        if triples is None:
            triples = ((i, j, k) for i in range(self.dim) for j in range(i + 1, self.dim) for k in range(j + 1, self.dim))
        bad = []
        for i, j, k in triples:
            ei, ej, ek = self.basis_element(i), self.basis_element(j), self.basis_element(k)
            s = self.bracket(self.bracket(ei, ej), ek) + self.bracket(self.bracket(ej, ek), ei) + self.bracket(self.bracket(ek, ei), ej)
            if s:
                bad.append((i, j, k))
        return bad

    def table_to_json(self) -> dict:
        return {
            f"{i},{j}": [[k, format_rat(c)] for k, c in items]
            for (i, j), items in sorted(self._table.items())
        }


class LieElement:
    """Sparse vector over the basis of a :class:`LieAlgebra`."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: LieAlgebra, coeffs: Mapping[int, object], _trusted: bool = False):
        self.algebra = algebra
        if _trusted:
            self.coeffs = coeffs
        else:
            d = {}
            for k, v in coeffs.items():
                if not 0 <= k < algebra.dim:
                    raise UsageError(f"basis index {k} out of range for dimension {algebra.dim}")
                v = Fraction(v)
                if v:
                    d[k] = v
            self.coeffs = d

    # arithmetic
    def _check(self, other: "LieElement") -> None:
        if not isinstance(other, LieElement) or other.algebra is not self.algebra:
            raise UsageError("elements belong to different algebras")

    def __add__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        out = dict(self.coeffs)
        sparse_axpy(out, 1, other.coeffs)
        return LieElement(self.algebra, out, _trusted=True)

    def __sub__(self, other: "LieElement") -> "LieElement":
        self._check(other)
        out = dict(self.coeffs)
        sparse_axpy(out, -1, other.coeffs)
        return LieElement(self.algebra, out, _trusted=True)

    def __neg__(self) -> "LieElement":
        return LieElement(self.algebra, {k: -v for k, v in self.coeffs.items()}, _trusted=True)

    def __mul__(self, scalar) -> "LieElement":
        s = Fraction(scalar)
        if not s:
            return LieElement(self.algebra, {}, _trusted=True)
        return LieElement(self.algebra, {k: v * s for k, v in self.coeffs.items()}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "LieElement":
        return self * (1 / Fraction(scalar))

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.coeffs
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.algebra is other.algebra and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.algebra), frozenset(self.coeffs.items())))

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs.get(i, Fraction(0))

    def bracket(self, other: "LieElement") -> "LieElement":
        return self.algebra.bracket(self, other)

    # structure
    def leading_index(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def min_degree(self) -> int | None:
        degs = self.algebra.degrees
        return min((degs[i] for i in self.coeffs), default=None)

    def degree_component(self, m: int) -> "LieElement":
        degs = self.algebra.degrees
        return LieElement(self.algebra, {k: v for k, v in self.coeffs.items() if degs[k] == m}, _trusted=True)

    def truncate_below(self, m: int) -> "LieElement":
        """Drop every coordinate of weight ``< m``."""
        degs = self.algebra.degrees
        return LieElement(self.algebra, {k: v for k, v in self.coeffs.items() if degs[k] >= m}, _trusted=True)

    def is_homogeneous(self) -> bool:
        return len({self.algebra.degrees[k] for k in self.coeffs}) <= 1

    def coords(self) -> list[Fraction]:
        return [self.coeffs.get(i, Fraction(0)) for i in range(self.algebra.dim)]

    def items(self):
        return sorted(self.coeffs.items())

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, v in sorted(self.coeffs.items()):
            lab = self.algebra.labels[k]
            if v == 1:
                parts.append(lab)
            elif v == -1:
                parts.append(f"-{lab}")
            else:
                parts.append(f"{format_rat(v)}*{lab}")
        return " + ".join(parts).replace("+ -", "- ")


def lie_sum(algebra: LieAlgebra, terms: Iterable[tuple[object, LieElement]]) -> LieElement:
    out: SparseVec = {}
    for c, e in terms:
        sparse_axpy(out, Fraction(c), e.coeffs)
    return LieElement(algebra, out, _trusted=True)


def span(algebra: LieAlgebra, elements: Iterable[LieElement]) -> EchelonBasis:
    eb = EchelonBasis(algebra.dim)
    for e in elements:
        eb.add(e.coeffs)
    return eb


def decompose(w: LieElement, basis: list[LieElement]) -> list[Fraction] | None:
    """Coefficients of ``w`` over ``basis`` by leading-term elimination.

    ``basis`` must have pairwise distinct leading indices.  Returns None
    when ``w`` is outside their span.
    """
    by_lead = {}
    for idx, b in enumerate(basis):
        p = b.leading_index()
        if p is None or p in by_lead:
            raise UsageError("decomposition basis needs distinct nonzero leading indices")
        by_lead[p] = idx
    coeffs = [Fraction(0)] * len(basis)
    rest = dict(w.coeffs)
    while rest:
        p = min(rest)
        idx = by_lead.get(p)
        if idx is None:
            return None
        b = basis[idx]
        c = rest[p] / b.coeffs[p]
        coeffs[idx] += c
        sparse_axpy(rest, -c, b.coeffs)
    return coeffs


def structure_constants_in_basis(algebra: LieAlgebra, vectors: list[LieElement]) -> dict[tuple[int, int], dict[int, Fraction]]:
    """Structure constants of ``algebra`` rewritten over ``vectors`` (a basis
    with distinct leading indices)."""
    out = {}
    for a in range(len(vectors)):
        for b in range(a + 1, len(vectors)):
            w = algebra.bracket(vectors[a], vectors[b])
            if not w:
                continue
            coeffs = decompose(w, vectors)
            if coeffs is None:
                raise UsageError("vectors do not span a subalgebra containing their brackets")
            nz = {k: c for k, c in enumerate(coeffs) if c}
            if nz:
                out[(a, b)] = nz
    return out
