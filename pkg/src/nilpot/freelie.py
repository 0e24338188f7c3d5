"""Free nilpotent Lie algebras ``L_{n,c}`` on a Lyndon basis.

Basis elements are Lyndon words over ``1 < 2 < ... < n`` of length at most
``c``, ordered by (length, lexicographic), each bracketed by its standard
factorization.  Brackets of basis elements are expanded by the classical
Lyndon rewriting recursion and truncated above degree ``c``.
"""
from __future__ import annotations

import json
import logging
import os
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping

from .algebra import LieAlgebra, LieElement
from .errors import ResourceLimitError, UsageError
from .qlinalg import format_rat, parse_rat

log = logging.getLogger(__name__)

MAX_BASIS_SIZE = 10**6
CACHE_FORMAT = 1

Word = tuple[int, ...]


# ---------------------------------------------------------------------------
# Lyndon words


def mobius(k: int) -> int:
    result, p = 1, 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            result = -result
        p += 1
    return -result if k > 1 else result


def witt_dimension(n: int, m: int) -> int:
    """Number of Lyndon words of length ``m`` over ``n`` letters."""
    total = sum(mobius(d) * n ** (m // d) for d in range(1, m + 1) if m % d == 0)
    return total // m


def lyndon_words(n: int, c: int) -> list[Word]:
    """All Lyndon words of length <= c over 1..n in lexicographic order (Duval)."""
    out: list[Word] = []
    w = [0]
    while w:
        w[-1] += 1
        out.append(tuple(w))
        m = len(w)
        while len(w) < c:
            w.append(w[len(w) - m])
        while w and w[-1] == n:
            w.pop()
    return out


def is_lyndon(w: Word) -> bool:
    return len(w) > 0 and all(w < w[i:] + w[:i] for i in range(1, len(w)))


def standard_factorization(w: Word, lyndon: set[Word] | None = None) -> tuple[Word, Word]:
    """Split a Lyndon word of length >= 2 as ``u v`` with ``v`` its longest
    proper Lyndon suffix."""
    for i in range(1, len(w)):
        v = w[i:]
        if (v in lyndon) if lyndon is not None else is_lyndon(v):
            return w[:i], v
    raise UsageError(f"{w} is not a Lyndon word of length >= 2")


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True)
class BasisElement:
    index: int
    word: Word
    bracketing: tuple[int, int] | None

    @property
    def degree(self) -> int:
        return len(self.word)


@dataclass
class HallBasis:
    n: int
    c: int
    elements: list[BasisElement]
    degree_offsets: list[int]
    index_of: dict[Word, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def degree_counts(self) -> list[int]:
        return [self.degree_offsets[d + 1] - self.degree_offsets[d] for d in range(1, self.c + 1)]

    def indices_of_degree(self, m: int) -> range:
        return range(self.degree_offsets[m], self.degree_offsets[m + 1])

    def label(self, i: int) -> str:
        e = self.elements[i]
        if e.bracketing is None:
            return f"x{e.word[0]}"
        a, b = e.bracketing
        return f"[{self.label(a)},{self.label(b)}]"

    def word_string(self, i: int) -> str:
        return "".join(str(x) for x in self.elements[i].word)


def build_basis(n: int, c: int) -> HallBasis:
    if n < 1 or c < 1:
        raise UsageError("rank and class must be >= 1")
    size = sum(witt_dimension(n, m) for m in range(1, c + 1))
    if size > MAX_BASIS_SIZE:
        raise ResourceLimitError(f"L_{{{n},{c}}} has {size} basis elements (guard {MAX_BASIS_SIZE})")
    words = sorted(lyndon_words(n, c), key=lambda w: (len(w), w))
    lyn = set(words)
    index_of = {w: i for i, w in enumerate(words)}
    elements = []
    for i, w in enumerate(words):
        br = None
        if len(w) > 1:
            u, v = standard_factorization(w, lyn)
            br = (index_of[u], index_of[v])
        elements.append(BasisElement(i, w, br))
    offsets = [0] * (c + 2)
    for d in range(1, c + 2):
        offsets[d] = sum(1 for w in words if len(w) < d)
    return HallBasis(n, c, elements, offsets, index_of)


# ---------------------------------------------------------------------------
# structure constants


@dataclass
class StructureTable:
    basis: HallBasis
    table: dict[tuple[int, int], dict[int, Fraction]]


def _lyndon_bracket_fn(c: int, lyn: set[Word]) -> Callable[[Word, Word], dict[Word, Fraction]]:
    fact: dict[Word, tuple[Word, Word]] = {}

    def std(w: Word) -> tuple[Word, Word]:
        if w not in fact:
            fact[w] = standard_factorization(w, lyn)
        return fact[w]

    @lru_cache(maxsize=None)
    def br(u: Word, v: Word) -> tuple[tuple[Word, Fraction], ...]:
        if u == v or len(u) + len(v) > c:
            return ()
        if u > v:
            return tuple((w, -x) for w, x in br(v, u))
        if len(u) == 1 or std(u)[1] >= v:
            return ((u + v, Fraction(1)),)
        u1, u2 = std(u)
        # [[u1,u2],v] = [[u1,v],u2] + [u1,[u2,v]]
        acc: dict[Word, Fraction] = {}
        for w1, a in br(u1, v):
            for w, b in br(w1, u2):
                acc[w] = acc.get(w, 0) + a * b
        for w2, a in br(u2, v):
            for w, b in br(u1, w2):
                acc[w] = acc.get(w, 0) + a * b
        return tuple(sorted((w, x) for w, x in acc.items() if x))

    return br


def build_structure_table(basis: HallBasis) -> StructureTable:
    lyn = set(basis.index_of)
    br = _lyndon_bracket_fn(basis.c, lyn)
    els = basis.elements
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i, ei in enumerate(els):
        for j in range(i + 1, len(els)):
            ej = els[j]
            if ei.degree + ej.degree > basis.c:
                # degrees are sorted, so every later j is also too heavy
                break
            res = br(ei.word, ej.word)
            if res:
                table[(i, j)] = {basis.index_of[w]: x for w, x in res}
    return StructureTable(basis, table)


# ---------------------------------------------------------------------------
# the algebra


class FreeLieAlgebra(LieAlgebra):
    """``L_{n,c}``: free nilpotent Lie algebra of rank ``n`` and class ``c``."""

    def __init__(self, basis: HallBasis, table: StructureTable):
        self.basis_info = basis
        self.n = basis.n
        self.c = basis.c
        super().__init__(
            degrees=[e.degree for e in basis.elements],
            table=table.table,
            labels=[basis.label(i) for i in range(len(basis))],
            nilpotency_class=basis.c,
            name=f"L_{{{basis.n},{basis.c}}}",
        )

    def generators(self) -> list[LieElement]:
        return [self.basis_element(i) for i in range(self.n)]

    def x(self, i: int) -> LieElement:
        """Generator ``x_i`` (1-based, matching the word alphabet)."""
        if not 1 <= i <= self.n:
            raise UsageError(f"generator index {i} outside 1..{self.n}")
        return self.basis_element(i - 1)

    def word_index(self, word) -> int:
        w = _as_word(word)
        if w not in self.basis_info.index_of:
            raise UsageError(f"{word!r} is not a basis word of {self.name}")
        return self.basis_info.index_of[w]

    def e(self, word) -> LieElement:
        """Basis element indexed by a Lyndon word such as ``"112"``."""
        return self.basis_element(self.word_index(word))

    def words(self) -> list[str]:
        return [self.basis_info.word_string(i) for i in range(self.dim)]


def _as_word(word) -> Word:
    if isinstance(word, str):
        return tuple(int(ch) for ch in word)
    return tuple(int(x) for x in word)


_memo: dict[tuple[int, int], FreeLieAlgebra] = {}


def free_lie_algebra(n: int, c: int, cache_dir: str | os.PathLike | None = None) -> FreeLieAlgebra:
    """Build (or fetch) ``L_{n,c}``.

    With ``cache_dir`` (or ``NILPOT_CACHE`` set) structure tables are
    persisted as JSON and certified by a Jacobi re-check when loaded.
    Within a process the algebra object is shared.
    """
    key = (n, c)
    if key in _memo:
        return _memo[key]
    if cache_dir is None and os.environ.get("NILPOT_CACHE"):
        cache_dir = os.environ["NILPOT_CACHE"]
    alg = None
    if cache_dir is not None:
        alg = load_cached(n, c, cache_dir)
    if alg is None:
        basis = build_basis(n, c)
        alg = FreeLieAlgebra(basis, build_structure_table(basis))
        if cache_dir is not None:
            save_cache(alg, cache_dir)
    _memo[key] = alg
    return alg


# ---------------------------------------------------------------------------
# elements


def bracket(u: LieElement, v: LieElement) -> LieElement:
    return u.algebra.bracket(u, v)


def degree_component(u: LieElement, m: int) -> LieElement:
    return u.degree_component(m)


def left_normed(alg: FreeLieAlgebra, gens) -> LieElement:
    """``[x_{g1}, x_{g2}, ..., x_{gk}] = [[...[x_{g1}, x_{g2}], ...], x_{gk}]``."""
    gens = list(gens)
    acc = alg.x(gens[0])
    for g in gens[1:]:
        acc = alg.bracket(acc, alg.x(g))
    return acc


_TOKEN = re.compile(r"\s*(\[|\]|,|x?\d+)")


def parse_bracket(alg: FreeLieAlgebra, text: str) -> LieElement:
    """Parse nested brackets of generators, e.g. ``"[[1,2],[3,4]]"`` or
    ``"[x1,x2,x2]"`` (three or more entries are left-normed)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise UsageError(f"cannot parse bracket expression {text!r}")
        tokens.append(m.group(1))
        pos = m.end()

    def expr(i: int) -> tuple[LieElement, int]:
        t = tokens[i]
        if t == "[":
            items = []
            i += 1
            while True:
                e, i = expr(i)
                items.append(e)
                if tokens[i] == ",":
                    i += 1
                elif tokens[i] == "]":
                    i += 1
                    break
                else:
                    raise UsageError(f"unexpected token {tokens[i]!r}")
            acc = items[0]
            for e in items[1:]:
                acc = alg.bracket(acc, e)
            return acc, i
        if t in ",]":
            raise UsageError(f"unexpected token {t!r}")
        return alg.x(int(t.lstrip("x"))), i + 1

    try:
        e, i = expr(0)
    except IndexError:
        raise UsageError(f"unterminated bracket expression {text!r}") from None
    if i != len(tokens):
        raise UsageError(f"trailing input in {text!r}")
    return e


def substitute(images: Mapping[int, LieElement] | list, u: LieElement) -> LieElement:
    """Apply the homomorphism ``x_i -> images[i]`` (1-based keys, or a list
    indexed from 0) to ``u``.

    Images may live in any :class:`LieAlgebra`; the result lives there too.
    """
    alg = u.algebra
    if not isinstance(alg, FreeLieAlgebra):
        raise UsageError("substitute needs an element of a free nilpotent Lie algebra")
    if isinstance(images, Mapping):
        missing = [i for i in range(1, alg.n + 1) if i not in images]
        if missing:
            raise UsageError(f"missing images for generators {missing}")
        imgs = [images[i] for i in range(1, alg.n + 1)]
    else:
        imgs = list(images)
        if len(imgs) != alg.n:
            raise UsageError(f"expected {alg.n} images, got {len(imgs)}")
    target = imgs[0].algebra
    if any(im.algebra is not target for im in imgs):
        raise UsageError("images must lie in a single algebra")
    els = alg.basis_info.elements
    values: dict[int, LieElement] = {}

    def value(i: int) -> LieElement:
        got = values.get(i)
        if got is None:
            e = els[i]
            if e.bracketing is None:
                got = imgs[e.word[0] - 1]
            else:
                a = value(e.bracketing[0])
                got = target.bracket(a, value(e.bracketing[1])) if a else a
            values[i] = got
        return got

    out: dict[int, Fraction] = {}
    for i, coef in u.coeffs.items():
        for k, x in value(i).coeffs.items():
            nv = out.get(k, 0) + coef * x
            if nv:
                out[k] = nv
            else:
                del out[k]
    return LieElement(target, out, _trusted=True)


def random_element(alg: LieAlgebra, rng: random.Random, density: float = 0.5, bound: int = 3,
                   degrees: set[int] | None = None) -> LieElement:
    coeffs = {}
    for i in range(alg.dim):
        if degrees is not None and alg.degrees[i] not in degrees:
            continue
        if rng.random() < density:
            coeffs[i] = Fraction(rng.randint(-bound, bound), rng.choice((1, 1, 2, 3)))
    return alg.element(coeffs)


# ---------------------------------------------------------------------------
# exchange formats


def element_to_json(u: LieElement) -> dict:
    alg = u.algebra
    if not isinstance(alg, FreeLieAlgebra):
        raise UsageError("exchange format is defined for free nilpotent algebras")
    return {
        "n": alg.n,
        "c": alg.c,
        "terms": [[alg.basis_info.word_string(i), format_rat(x)] for i, x in u.items()],
    }


def element_from_json(doc: Mapping, alg: FreeLieAlgebra | None = None) -> LieElement:
    """Inverse of :func:`element_to_json`.  A term key starting with ``[`` is
    read as a bracket expression instead of a Lyndon word."""
    if alg is None:
        alg = free_lie_algebra(int(doc["n"]), int(doc["c"]))
    elif "n" in doc and (int(doc["n"]) != alg.n or int(doc["c"]) != alg.c):
        raise UsageError(f"element is over L_{{{doc['n']},{doc['c']}}}, expected {alg.name}")
    acc = alg.zero()
    for key, coef in doc.get("terms", []):
        key = str(key)
        base = parse_bracket(alg, key) if key.lstrip().startswith("[") or key.startswith("x") else alg.e(key)
        acc = acc + base * parse_rat(coef)
    return acc


# ---------------------------------------------------------------------------
# cache


def default_cache_dir() -> Path:
    if os.environ.get("NILPOT_CACHE"):
        return Path(os.environ["NILPOT_CACHE"])
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "nilpot"


def cache_path(n: int, c: int, cache_dir) -> Path:
    return Path(cache_dir) / f"lie_{n}_{c}.json"


def table_to_json(alg: FreeLieAlgebra) -> dict:
    b = alg.basis_info
    return {
        "format": CACHE_FORMAT,
        "n": alg.n,
        "c": alg.c,
        "basis": [
            {"word": b.word_string(e.index), "bracketing": list(e.bracketing) if e.bracketing else None}
            for e in b.elements
        ],
        "table": alg.table_to_json(),
    }


def save_cache(alg: FreeLieAlgebra, cache_dir) -> Path:
    path = cache_path(alg.n, alg.c, cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(table_to_json(alg), separators=(",", ":")))
    tmp.replace(path)
    return path


def load_cached(n: int, c: int, cache_dir) -> FreeLieAlgebra | None:
    path = cache_path(n, c, cache_dir)
    if not path.exists():
        return None
    try:
        doc = json.loads(path.read_text())
        alg = _algebra_from_json(doc, n, c)
    except (ValueError, KeyError, TypeError, UsageError) as exc:
        log.warning("discarding unreadable cache %s: %s", path, exc)
        return None
    if not certify(alg):
        log.warning("cache %s failed the Jacobi certificate; rebuilding", path)
        return None
    return alg


def _algebra_from_json(doc: Mapping, n: int, c: int) -> FreeLieAlgebra:
    if doc.get("format") != CACHE_FORMAT or doc["n"] != n or doc["c"] != c:
        raise ValueError("cache header mismatch")
    basis = build_basis(n, c)
    words = [e["word"] for e in doc["basis"]]
    if words != [basis.word_string(i) for i in range(len(basis))]:
        raise ValueError("cached basis differs from the Lyndon basis")
    table = {}
    for key, terms in doc["table"].items():
        i, j = (int(x) for x in key.split(","))
        table[(i, j)] = {int(k): parse_rat(x) for k, x in terms}
    return FreeLieAlgebra(basis, StructureTable(basis, table))


def certify(alg: FreeLieAlgebra, sample_fraction: float = 0.01, seed: int = 0) -> bool:
    """Jacobi on every basis triple of total degree <= 3 plus a pseudorandom
    sample of the remaining admissible triples."""
    degs = alg.degrees
    small, rest = [], []
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            if degs[i] + degs[j] >= alg.c:
                continue
            for k in range(j + 1, alg.dim):
                total = degs[i] + degs[j] + degs[k]
                if total > alg.c:
                    continue
                (small if total <= 3 else rest).append((i, j, k))
    rng = random.Random(seed)
    sample = [t for t in rest if rng.random() < sample_fraction]
    return not alg.jacobi_defects(small + sample)
