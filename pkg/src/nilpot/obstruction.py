"""Can two commuting elements of a rank-4 class-3 algebra have independent linear parts?

For ``z_i = sum_j a_ji y_j + sum b_kli [y_k, y_l]`` (``i = 1, 2``) the
coordinates of ``[z1, z2]`` give a polynomial system in the ``a``/``b``
unknowns.  Weight-3 parts of ``z_i`` are omitted: they bracket into weight
4, which vanishes.  The degree-2 pairs ``(k, l)`` are those with
``[y_k, y_l]`` outside ``gamma_3``.

The decision is an exhaustive split over which ``a`` vanish and which 2x2
minor of the ``a``-matrix is required to be nonzero.  Inside a case,
nonzero ``a``-rows ``(a_j1, a_j2)`` are tracked by their ratios; a vanishing
minor between two full rows identifies their ratios, a one-term equation in
nonzero unknowns is a contradiction, and a one-term equation ``m * b = 0``
forces ``b = 0``.  Surviving cases are instantiated with concrete ``a``
values, the ``b`` system is solved exactly and the witness is checked by
computing ``[z1, z2]`` directly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .algebra import LieAlgebra, LieElement
from .errors import UsageError
from .qlinalg import solve

Monomial = tuple[str, ...]
Poly = dict[Monomial, Fraction]

ALPHAS = [f"a{j}{i}" for i in (1, 2) for j in (1, 2, 3, 4)]
ALPHA_ORDER = ["a11", "a12", "a21", "a22", "a31", "a32", "a41", "a42"]

# Relations expected for [y1, y2] = -[y3, y4, y3] in the free class-3 algebra of rank 4.
REFERENCE_SYSTEM = [
    "a11*a22 - a12*a21 - (-a32*b431 + a31*b432)",
    "a11*a32 - a12*a31",
    "a11*a42 - a12*a41",
    "a21*a32 - a22*a31",
    "a21*a42 - a22*a41",
    "a31*a42 - a32*a41",
    "a41*b432 - a42*b431",
]


@dataclass
class PairSystem:
    algebra: LieAlgebra
    generators: list[LieElement]
    pairs: list[tuple[int, int]]
    equations: list[sympy.Expr]
    symbols: dict[str, sympy.Symbol]

    def as_strings(self) -> list[str]:
        return [str(e) for e in self.equations]


@dataclass
class ObstructionResult:
    verdict: str
    system: PairSystem
    cases: int = 0
    refuted: dict[str, int] = field(default_factory=dict)
    witness: dict | None = None
    undecided: list[dict] = field(default_factory=list)

    @property
    def unsat(self) -> bool:
        return self.verdict == "UNSAT"


def _alpha(j: int, i: int) -> str:
    return f"a{j}{i}"


def _beta(k: int, l: int, i: int) -> str:
    return f"b{k}{l}{i}"


def commuting_pair_system(L: LieAlgebra) -> PairSystem:
    """Polynomial system expressing ``[z1, z2] = 0`` in the coordinates of ``L``."""
    gens = L.generators()
    if len(gens) != 4 or L.nilpotency_class != 3 or max(L.degrees, default=0) > 3:
        raise UsageError("commuting-pair analysis needs a rank-4 algebra of class 3")
    pairs = []
    for k in range(2, 5):
        for l in range(1, k):
            w = L.bracket(gens[k - 1], gens[l - 1])
            if w and w.min_degree() == 2:
                pairs.append((k, l))
    atoms: list[tuple[str, LieElement]] = []
    for j in range(1, 5):
        atoms.append((f"y{j}", gens[j - 1]))
    for k, l in pairs:
        atoms.append((f"[y{k},y{l}]", L.bracket(gens[k - 1], gens[l - 1])))
    names = {}
    for i in (1, 2):
        names[i] = [_alpha(j, i) for j in range(1, 5)] + [_beta(k, l, i) for k, l in pairs]
    symbols = {n: sympy.Symbol(n) for i in (1, 2) for n in names[i]}
    coords: dict[int, sympy.Expr] = {}
    for a, (_, ua) in enumerate(atoms):
        for b, (_, ub) in enumerate(atoms):
            w = L.bracket(ua, ub)
            if not w:
                continue
            prod = symbols[names[1][a]] * symbols[names[2][b]]
            for k, x in w.coeffs.items():
                coords[k] = coords.get(k, 0) + sympy.Rational(x.numerator, x.denominator) * prod
    equations = []
    for k in sorted(coords):
        e = sympy.expand(coords[k])
        if e != 0:
            equations.append(e)
    return PairSystem(L, gens, pairs, equations, symbols)


def match_reference(system: PairSystem, reference: list[str] = REFERENCE_SYSTEM) -> dict:
    """Match each reference relation to an extracted equation up to a nonzero scalar."""
    matched, missing = {}, []
    extracted = [sympy.expand(e) for e in system.equations]
    locals_ = dict(system.symbols)
    for r in reference:
        target = sympy.expand(sympy.sympify(r, locals=locals_))
        hit = None
        for idx, e in enumerate(extracted):
            ratio = sympy.simplify(e / target)
            if ratio.is_number and ratio != 0:
                hit = idx
                break
        if hit is None:
            missing.append(r)
        else:
            matched[r] = hit
    extra = [str(e) for idx, e in enumerate(extracted) if idx not in set(matched.values())]
    return {"matched": len(matched), "missing": missing, "extra": extra}


# ---------------------------------------------------------------------------
# case analysis


def _to_poly(expr: sympy.Expr, names: list[str]) -> Poly:
    syms = [sympy.Symbol(n) for n in names]
    p = sympy.Poly(expr, *syms)
    out: Poly = {}
    for exps, c in p.terms():
        mono = tuple(sorted(n for n, e in zip(names, exps) for _ in range(e)))
        out[mono] = Fraction(int(c.p), int(c.q))
    return out


class _Ratios:
    """Union-find over rows ``j`` whose two ``a`` entries are both nonzero."""

    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, j: int) -> int:
        self.parent.setdefault(j, j)
        while self.parent[j] != j:
            self.parent[j] = self.parent[self.parent[j]]
            j = self.parent[j]
        return j

    def union(self, a: int, b: int) -> None:
        self.parent[self.find(a)] = self.find(b)


def _minor_rows(poly: Poly) -> tuple[int, int] | None:
    """Rows ``(m, n)`` if ``poly`` is a nonzero multiple of ``a_m1 a_n2 - a_n1 a_m2``."""
    if len(poly) != 2:
        return None
    (m1, c1), (m2, c2) = poly.items()
    if c1 != -c2 or len(m1) != 2 or len(m2) != 2:
        return None
    if not all(v.startswith("a") for v in m1 + m2):
        return None

    def rows(mono):
        return {(int(v[1]), int(v[2])) for v in mono}

    r1, r2 = rows(m1), rows(m2)
    js1 = {j for j, _ in r1}
    if len(js1) != 2 or {i for _, i in r1} != {1, 2}:
        return None
    m, n = sorted(js1)
    want = [{(m, 1), (n, 2)}, {(n, 1), (m, 2)}]
    if sorted(map(sorted, (r1, r2))) == sorted(map(sorted, want)):
        return (m, n)
    return None


def _substitute_zero(poly: Poly, zeros: set[str]) -> Poly:
    return {m: c for m, c in poly.items() if not zeros.intersection(m)}


def _analyse_case(polys: list[Poly], zero_a: set[str], mu: int, nu: int):
    """Returns ("refuted", reason) or ("open", (ratios, zero_b, residual))."""
    minor = _substitute_zero({(_alpha(mu, 1), _alpha(nu, 2)): Fraction(1), (_alpha(nu, 1), _alpha(mu, 2)): Fraction(-1)}, zero_a)
    if not minor:
        return "refuted", "minor_vanishes"
    ratios = _Ratios()
    zeros = set(zero_a)
    residual: list[Poly] = []
    changed = True
    while changed:
        changed = False
        residual = []
        for p in polys:
            q = _substitute_zero(p, zeros)
            if not q:
                continue
            has_b = any(v.startswith("b") for m in q for v in m)
            if len(q) == 1:
                (mono,) = q
                bs = [v for v in mono if v.startswith("b")]
                if not bs:
                    return "refuted", "monomial"
                if len(bs) == 1:
                    zeros.add(bs[0])
                    changed = True
                    continue
                residual.append(q)
                continue
            if not has_b:
                rows = _minor_rows(q)
                if rows is None:
                    residual.append(q)
                    continue
                ratios.union(*rows)
                continue
            residual.append(q)
    # the chosen minor must stay nonzero
    if len(minor) == 2 and ratios.find(mu) == ratios.find(nu):
        return "refuted", "ratio"
    return "open", (ratios, zeros, residual)


def _instantiate(system: PairSystem, zero_a: set[str], ratios: _Ratios, mu: int, nu: int, attempt: int):
    """Concrete values for the case, or None if the ``b`` system is inconsistent."""
    vals: dict[str, Fraction] = {}
    classes: dict[int, Fraction] = {}
    for j in range(1, 5):
        a1, a2 = _alpha(j, 1), _alpha(j, 2)
        z1, z2 = a1 in zero_a, a2 in zero_a
        if not z1 and not z2:
            root = ratios.find(j)
            if root not in classes:
                classes[root] = Fraction(len(classes) + 1 + attempt * 7, 1 + attempt)
            vals[a1], vals[a2] = classes[root], Fraction(1)
        else:
            vals[a1] = Fraction(0) if z1 else Fraction(1 + attempt)
            vals[a2] = Fraction(0) if z2 else Fraction(1 + attempt)
    betas = sorted(n for n in system.symbols if n.startswith("b"))
    subs = {system.symbols[k]: sympy.Rational(v.numerator, v.denominator) for k, v in vals.items()}
    rows, rhs = [], []
    for e in system.equations:
        lin = sympy.expand(e.subs(subs))
        if lin == 0:
            continue
        p = sympy.Poly(lin, *[system.symbols[b] for b in betas])
        if p.total_degree() > 1:
            return None
        row = [Fraction(0)] * len(betas)
        const = Fraction(0)
        for exps, c in p.terms():
            c = Fraction(int(c.p), int(c.q))
            if sum(exps) == 0:
                const += c
            else:
                row[exps.index(1)] += c
        rows.append(row)
        rhs.append(-const)
    sol = solve(rows, rhs) if rows else [Fraction(0)] * len(betas)
    if sol is None:
        return None
    vals.update(zip(betas, sol))
    return vals


def _build_pair(system: PairSystem, vals: dict[str, Fraction]) -> tuple[LieElement, LieElement]:
    L = system.algebra
    out = []
    for i in (1, 2):
        z = L.zero()
        for j in range(1, 5):
            z = z + system.generators[j - 1] * vals.get(_alpha(j, i), 0)
        for k, l in system.pairs:
            x = vals.get(_beta(k, l, i), 0)
            if x:
                z = z + L.bracket(system.generators[k - 1], system.generators[l - 1]) * x
        out.append(z)
    return out[0], out[1]


def commuting_pair_obstruction(L: LieAlgebra) -> ObstructionResult:
    """Decide whether ``[z1, z2] = 0`` admits a solution with independent linear parts."""
    system = commuting_pair_system(L)
    names = sorted(system.symbols)
    polys = [_to_poly(e, names) for e in system.equations]
    result = ObstructionResult("UNSAT", system)
    patterns = sorted(
        itertools.product((False, True), repeat=len(ALPHA_ORDER)),
        key=lambda bits: (sum(bits), [not b for b in bits]),
    )
    minors = list(itertools.combinations(range(1, 5), 2))
    for bits in patterns:
        zero_a = {n for n, nz in zip(ALPHA_ORDER, bits) if not nz}
        for mu, nu in minors:
            result.cases += 1
            status, info = _analyse_case(polys, zero_a, mu, nu)
            if status == "refuted":
                result.refuted[info] = result.refuted.get(info, 0) + 1
                continue
            ratios, zeros, _ = info
            for attempt in range(4):
                vals = _instantiate(system, zeros, ratios, mu, nu, attempt)
                if vals is None:
                    continue
                z1, z2 = _build_pair(system, vals)
                lin = [[z.coeffs.get(k, Fraction(0)) for k in range(L.dim) if L.degrees[k] == 1] for z in (z1, z2)]
                independent = any(lin[0][a] * lin[1][b] - lin[0][b] * lin[1][a] for a in range(4) for b in range(a + 1, 4))
                if independent and not L.bracket(z1, z2):
                    result.verdict = "SAT"
                    result.witness = {"values": {k: v for k, v in vals.items() if v}, "z1": z1, "z2": z2}
                    return result
            result.undecided.append({"zero": sorted(zero_a), "minor": (mu, nu)})
    if result.undecided:
        result.verdict = "UNKNOWN"
    return result
