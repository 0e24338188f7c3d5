"""Exact rational and integer linear algebra.

Dense matrices are plain lists of rows.  Rational entries are
:class:`fractions.Fraction`, integer entries are Python ``int``; both are
arbitrary precision, which matters because BCH denominators grow
factorially with the nilpotency class.

Sparse vectors (``dict[int, Fraction]`` with no zero values) are used by
:class:`EchelonBasis`, the incremental row reducer that every subspace
computation downstream goes through.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

QMatrix = list[list[Fraction]]
ZMatrix = list[list[int]]
SparseVec = dict[int, Fraction]


# ---------------------------------------------------------------------------
# serialization


def format_rat(x) -> str:
    """Render a rational as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rat(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise ValueError("floating point values are not accepted; use 'p/q' strings")
    return Fraction(str(s).strip())


# ---------------------------------------------------------------------------
# dense rational algebra


def _shape(m: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    for r in m:
        if len(r) != cols:
            raise ValueError("ragged matrix")
    return rows, cols


def rref(m: Sequence[Sequence]) -> tuple[QMatrix, list[int]]:
    """Reduced row echelon form and pivot columns (strictly increasing).

    Zero rows are kept at the bottom so the result has the input shape.
    """
    rows, cols = _shape(m)
    a = [[Fraction(x) for x in r] for r in m]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def kernel_basis(m: Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis of the right null space; each vector has first nonzero entry 1."""
    rows, cols = _shape(m)
    if rows == 0:
        return [[Fraction(int(i == j)) for j in range(cols)] for i in range(cols)]
    red, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        lead = next(x for x in v if x != 0)
        basis.append([x / lead for x in v])
    return basis


def solve(m: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One exact solution of ``m x = b`` (free variables set to 0), or None."""
    rows, cols = _shape(m)
    aug = [list(r) + [b[i]] for i, r in enumerate(m)]
    if rows == 0:
        return [Fraction(0)] * cols
    red, pivots = rref(aug)
    if pivots and pivots[-1] == cols:
        return None
    x = [Fraction(0)] * cols
    for i, p in enumerate(pivots):
        x[p] = red[i][cols]
    return x


# ---------------------------------------------------------------------------
# integer normal forms


def _identity(n: int) -> ZMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def hnf(m: Sequence[Sequence[int]]) -> tuple[ZMatrix, ZMatrix]:
    """Row-style Hermite normal form.

    Returns ``(h, t)`` with ``h == t @ m``, ``t`` unimodular, pivots of ``h``
    positive and entries above each pivot reduced into ``[0, pivot)``.
    Zero rows sit at the bottom.
    """
    rows, cols = _shape(m)
    h = [[int(x) for x in r] for r in m]
    t = _identity(rows)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # Euclid down the column until a single nonzero entry remains at row r
        while True:
            nz = [i for i in range(r, rows) if h[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[piv] = h[piv], h[r]
            t[r], t[piv] = t[piv], t[r]
            done = True
            for i in range(r + 1, rows):
                if h[i][c] != 0:
                    q = h[i][c] // h[r][c]
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    t[i] = [x - q * y for x, y in zip(t[i], t[r])]
                    if h[i][c] != 0:
                        done = False
            if done:
                break
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            t[r] = [-x for x in t[r]]
        for i in range(r):
            q = h[i][c] // h[r][c]
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                t[i] = [x - q * y for x, y in zip(t[i], t[r])]
        r += 1
    return h, t


def snf(m: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors ``d_1 | d_2 | ...`` (length ``min(rows, cols)``).

    Nonzero factors come first, zeros last.
    """
    rows, cols = _shape(m)
    a = [[int(x) for x in r] for r in m]
    k = min(rows, cols)
    diag: list[int] = []
    for s in range(k):
        nz = [(abs(a[i][j]), i, j) for i in range(s, rows) for j in range(s, cols) if a[i][j]]
        if not nz:
            diag.extend([0] * (k - s))
            break
        while True:
            _, pi, pj = min(nz)
            a[s], a[pi] = a[pi], a[s]
            for row in a:
                row[s], row[pj] = row[pj], row[s]
            p = a[s][s]
            clean = True
            for i in range(s + 1, rows):
                q = a[i][s] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[s])]
                if a[i][s]:
                    clean = False
            for j in range(s + 1, cols):
                q = a[s][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[s]
                if a[s][j]:
                    clean = False
            if clean:
                break
            nz = [(abs(a[i][j]), i, j) for i in range(s, rows) for j in range(s, cols) if a[i][j]]
        diag.append(abs(a[s][s]))
    nonzero = [d for d in diag if d]
    zeros = [d for d in diag if not d]
    # diag(a, b) ~ diag(gcd, lcm) restores the divisibility chain
    for i in range(len(nonzero)):
        for j in range(i + 1, len(nonzero)):
            g = math.gcd(nonzero[i], nonzero[j])
            nonzero[i], nonzero[j] = g, nonzero[i] * nonzero[j] // g
    return nonzero + zeros


def lattice_membership(basis_rows: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """True iff ``v`` is an integer combination of ``basis_rows``."""
    if not basis_rows:
        return all(x == 0 for x in v)
    h, _ = hnf(basis_rows)
    w = [int(x) for x in v]
    for row in h:
        c = next((j for j, x in enumerate(row) if x), None)
        if c is None:
            break
        if any(w[j] for j in range(c)):
            return False
        if w[c] % row[c]:
            return False
        q = w[c] // row[c]
        w = [x - q * y for x, y in zip(w, row)]
    return not any(w)


def rational_xgcd(a: Fraction, b: Fraction) -> tuple[Fraction, int, int]:
    """Return ``(d, s, t)`` with ``d = s*a + t*b > 0`` generating ``Z a + Z b``."""
    a, b = Fraction(a), Fraction(b)
    den = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
    p, q = int(a * den), int(b * den)
    g, s, t = _xgcd(p, q)
    if g < 0:
        g, s, t = -g, -s, -t
    return Fraction(g, den), s, t


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


# ---------------------------------------------------------------------------
# sparse incremental echelon form


def sparse_axpy(y: SparseVec, a, x: SparseVec) -> None:
    """In place ``y += a * x``, dropping zeros."""
    for k, v in x.items():
        nv = y.get(k, 0) + a * v
        if nv:
            y[k] = nv
        else:
            y.pop(k, None)


class EchelonBasis:
    """Subspace of Q^dim held as a fully reduced row echelon basis.

    Pivots sit on the earliest nonzero coordinate of each row and are
    normalized to 1; every row is zero at every other row's pivot.
    """

    def __init__(self, dim: int, vectors: Iterable[SparseVec] = ()):
        self.dim = dim
        self._rows: dict[int, SparseVec] = {}
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._rows)

    def rows(self) -> list[SparseVec]:
        return [dict(self._rows[p]) for p in sorted(self._rows)]

    def row(self, pivot: int) -> SparseVec:
        return self._rows[pivot]

    def reduce(self, v: SparseVec) -> SparseVec:
        w = {k: Fraction(x) for k, x in v.items() if x}
        for p in [p for p in w if p in self._rows]:
            c = w.get(p)
            if c:
                sparse_axpy(w, -c, self._rows[p])
        return w

    def contains(self, v: SparseVec) -> bool:
        return not self.reduce(v)

    def add(self, v: SparseVec) -> SparseVec | None:
        """Insert ``v``; returns the new reduced row, or None if ``v`` was dependent."""
        w = self.reduce(v)
        if not w:
            return None
        p = min(w)
        inv = 1 / w[p]
        w = {k: x * inv for k, x in w.items()}
        for q, row in self._rows.items():
            c = row.get(p)
            if c:
                sparse_axpy(row, -c, w)
        self._rows[p] = w
        return w

    def same_space(self, other: "EchelonBasis") -> bool:
        return self.rank == other.rank and all(other.contains(r) for r in self._rows.values())

    def contains_space(self, other: "EchelonBasis") -> bool:
        return all(self.contains(r) for r in other._rows.values())

    def copy(self) -> "EchelonBasis":
        e = EchelonBasis(self.dim)
        e._rows = {p: dict(r) for p, r in self._rows.items()}
        return e

    def to_dense(self) -> QMatrix:
        return [[r.get(j, Fraction(0)) for j in range(self.dim)] for r in self.rows()]
