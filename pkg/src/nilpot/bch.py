"""Baker-Campbell-Hausdorff product via the truncated free associative algebra.

``u o v = pi(log(exp(u) exp(v)))`` where ``exp``/``log`` are the truncated
series in the tensor algebra of words of length <= c and ``pi`` is the
Dynkin projection back to the Lyndon basis.  Nothing here uses a table of
BCH coefficients; the universal series returned by :func:`bch_series` is
itself computed through this route and then substituted into arbitrary
structure-constant algebras by :func:`apply_series`.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

from .algebra import LieAlgebra, LieElement
from .errors import UsageError
from .freelie import FreeLieAlgebra, free_lie_algebra, substitute

Word = tuple[int, ...]


class TensorElement:
    """Sparse element of the tensor algebra on ``n`` letters truncated at degree ``c``."""

    __slots__ = ("n", "c", "terms")

    def __init__(self, n: int, c: int, terms: dict[Word, Fraction] | None = None):
        self.n = n
        self.c = c
        self.terms = {w: Fraction(x) for w, x in (terms or {}).items() if x and len(w) <= c}

    @classmethod
    def unit(cls, n: int, c: int) -> "TensorElement":
        return cls(n, c, {(): Fraction(1)})

    @classmethod
    def word(cls, n: int, c: int, w) -> "TensorElement":
        w = tuple(int(ch) for ch in w) if isinstance(w, str) else tuple(w)
        return cls(n, c, {w: Fraction(1)})

    def _check(self, other: "TensorElement") -> None:
        if (self.n, self.c) != (other.n, other.c):
            raise UsageError("tensor elements from different contexts")

    def __add__(self, other: "TensorElement") -> "TensorElement":
        self._check(other)
        t = dict(self.terms)
        for w, x in other.terms.items():
            t[w] = t.get(w, 0) + x
        return TensorElement(self.n, self.c, t)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + other * -1

    def __mul__(self, other) -> "TensorElement":
        if isinstance(other, TensorElement):
            return tensor_mul(self, other)
        s = Fraction(other)
        return TensorElement(self.n, self.c, {w: x * s for w, x in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, TensorElement) and (self.n, self.c, self.terms) == (other.n, other.c, other.terms)

    def scalar_part(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{x}*{''.join(map(str, w)) or '1'}" for w, x in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])))


def tensor_mul(a: TensorElement, b: TensorElement) -> TensorElement:
    """Concatenation product, words longer than ``c`` dropped."""
    a._check(b)
    c = a.c
    out: dict[Word, Fraction] = {}
    by_len: dict[int, list[tuple[Word, Fraction]]] = {}
    for w, y in b.terms.items():
        by_len.setdefault(len(w), []).append((w, y))
    for u, x in a.terms.items():
        room = c - len(u)
        for ln, items in by_len.items():
            if ln > room:
                continue
            for v, y in items:
                w = u + v
                out[w] = out.get(w, 0) + x * y
    return TensorElement(a.n, c, out)


def texp(a: TensorElement) -> TensorElement:
    if a.scalar_part():
        raise UsageError("texp needs zero scalar part")
    result = TensorElement.unit(a.n, a.c)
    power = TensorElement.unit(a.n, a.c)
    for k in range(1, a.c + 1):
        power = tensor_mul(power, a)
        if not power.terms:
            break
        result = result + power * Fraction(1, factorial(k))
    return result


def tlog(b: TensorElement) -> TensorElement:
    if b.scalar_part() != 1:
        raise UsageError("tlog needs scalar part 1")
    x = b - TensorElement.unit(b.n, b.c)
    result = TensorElement(b.n, b.c)
    power = TensorElement.unit(b.n, b.c)
    for k in range(1, b.c + 1):
        power = tensor_mul(power, x)
        if not power.terms:
            break
        result = result + power * Fraction((-1) ** (k + 1), k)
    return result


class BchContext:
    """Lift of ``L_{n,c}`` into the truncated tensor algebra plus the Dynkin
    projection back."""

    def __init__(self, algebra: FreeLieAlgebra):
        if not isinstance(algebra, FreeLieAlgebra):
            raise UsageError("BchContext needs a free nilpotent Lie algebra")
        self.algebra = algebra
        self.n = algebra.n
        self.c = algebra.c
        self._lift: dict[int, TensorElement] = {}
        self._dynkin: dict[Word, LieElement] = {}

    def _check(self, *elems: LieElement) -> None:
        for e in elems:
            if e.algebra is not self.algebra:
                raise UsageError("element is not in this context's algebra")

    def lift_basis(self, i: int) -> TensorElement:
        got = self._lift.get(i)
        if got is None:
            e = self.algebra.basis_info.elements[i]
            if e.bracketing is None:
                got = TensorElement.word(self.n, self.c, e.word)
            else:
                a = self.lift_basis(e.bracketing[0])
                b = self.lift_basis(e.bracketing[1])
                got = tensor_mul(a, b) - tensor_mul(b, a)
            self._lift[i] = got
        return got

    def lift(self, u: LieElement) -> TensorElement:
        self._check(u)
        acc: dict[Word, Fraction] = {}
        for i, x in u.coeffs.items():
            for w, y in self.lift_basis(i).terms.items():
                acc[w] = acc.get(w, 0) + x * y
        return TensorElement(self.n, self.c, acc)

    def _dynkin_word(self, w: Word) -> LieElement:
        got = self._dynkin.get(w)
        if got is None:
            alg = self.algebra
            acc = alg.x(w[0])
            for g in w[1:]:
                acc = alg.bracket(acc, alg.x(g))
            got = acc * Fraction(1, len(w))
            self._dynkin[w] = got
        return got

    def dynkin_to_lie(self, t: TensorElement) -> LieElement:
        if t.scalar_part():
            raise UsageError("Dynkin projection needs zero scalar part")
        out: dict[int, Fraction] = {}
        for w, x in t.terms.items():
            for k, y in self._dynkin_word(w).coeffs.items():
                out[k] = out.get(k, 0) + x * y
        return self.algebra.element(out)


def dynkin_to_lie(ctx: BchContext, t: TensorElement) -> LieElement:
    return ctx.dynkin_to_lie(t)


def bch(ctx: BchContext, u: LieElement, v: LieElement) -> LieElement:
    ctx._check(u, v)
    return ctx.dynkin_to_lie(tlog(tensor_mul(texp(ctx.lift(u)), texp(ctx.lift(v)))))


def gcomm(ctx: BchContext, u: LieElement, v: LieElement) -> LieElement:
    """Group commutator ``(u, v) = (-u) o (-v) o u o v``."""
    return bch(ctx, bch(ctx, bch(ctx, -u, -v), u), v)


def gpow(ctx: BchContext, u: LieElement, k: int) -> LieElement:
    ctx._check(u)
    return u * int(k)


# ---------------------------------------------------------------------------
# universal series in two variables


@lru_cache(maxsize=None)
def bch_series(c: int) -> LieElement:
    """``x1 o x2`` in ``L_{2,c}``, computed through exp/log."""
    alg = free_lie_algebra(2, c)
    return bch(BchContext(alg), alg.x(1), alg.x(2))


@lru_cache(maxsize=None)
def commutator_series(c: int) -> LieElement:
    """``(x1, x2)`` in ``L_{2,c}``, composed from three BCH products."""
    alg = free_lie_algebra(2, c)
    return gcomm(BchContext(alg), alg.x(1), alg.x(2))


def apply_series(series: LieElement, u: LieElement, v: LieElement) -> LieElement:
    """Evaluate a two-variable Lie polynomial at ``(u, v)`` in any algebra."""
    return substitute([u, v], series)


def series_for(algebra: LieAlgebra) -> tuple[LieElement, LieElement]:
    c = max(1, algebra.nilpotency_class)
    return bch_series(c), commutator_series(c)
