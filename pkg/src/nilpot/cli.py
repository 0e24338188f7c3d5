"""Command line front end.

Exit status: 0 when every check passes, 1 when a check fails (the report is
still printed), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import NilpotError, UsageError
from .freelie import (
    cache_path,
    default_cache_dir,
    element_from_json,
    element_to_json,
    free_lie_algebra,
    load_cached,
    save_cache,
)
from .qlinalg import format_rat

log = logging.getLogger("nilpot")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg})") from exc


def _elements(doc, alg) -> list:
    items = doc if isinstance(doc, list) else doc.get("elements", [doc])
    return [element_from_json(d, alg) for d in items]


def _emit(doc, out: str, text: str) -> None:
    if out == "json":
        print(json.dumps(doc, sort_keys=True, indent=2))
    else:
        print(text)


def _resolve_cache(args) -> Path | None:
    if getattr(args, "no_cache", False):
        return None
    return Path(args.cache_dir) if args.cache_dir else default_cache_dir()


# ---------------------------------------------------------------------------
# subcommands


def cmd_basis(args) -> int:
    alg = free_lie_algebra(args.n, args.c, cache_dir=_resolve_cache(args))
    b = alg.basis_info
    rows = []
    for e in b.elements:
        rows.append({"index": e.index + 1, "degree": e.degree, "word": b.word_string(e.index), "bracket": alg.labels[e.index]})
    text = "\n".join(f"{r['index']:>4}  {r['degree']}  {r['word']:<8} {r['bracket']}" for r in rows)
    _emit({"n": args.n, "c": args.c, "dim": alg.dim, "basis": rows}, args.out, text)
    return 0


def cmd_bch(args) -> int:
    from .bch import BchContext, bch

    alg = free_lie_algebra(args.n, args.c, cache_dir=_resolve_cache(args))
    (u,) = _elements(_load_json(args.u), alg)
    (v,) = _elements(_load_json(args.v), alg)
    w = bch(BchContext(alg), u, v)
    _emit(element_to_json(w), args.out, repr(w))
    return 0


def _algebra_from_spec(spec: str, cache_dir):
    """``N,C`` or ``N,C:IDEAL.json`` (quotient by the ideal generated by the file's elements)."""
    from .quotient import ideal_closure, quotient

    head, _, ideal_file = spec.partition(":")
    try:
        n, c = (int(x) for x in head.split(","))
    except ValueError:
        raise UsageError(f"algebra spec must look like N,C or N,C:FILE, got {spec!r}") from None
    alg = free_lie_algebra(n, c, cache_dir=cache_dir)
    if not ideal_file:
        return alg, alg
    gens = _elements(_load_json(ideal_file), alg)
    return alg, quotient(alg, ideal_closure(alg, gens))


def cmd_collect(args) -> int:
    from .malcev import MGroup, subgroup_closure

    free, target = _algebra_from_spec(args.algebra, _resolve_cache(args))
    to_target = target.reduce if target is not free else (lambda x: x)
    gens = [to_target(g) for g in _elements(_load_json(args.gens), free)]
    (elem,) = [to_target(g) for g in _elements(_load_json(args.elem), free)]
    group = MGroup(target)
    H = subgroup_closure([group.element(g) for g in gens if g], group=group)
    exps = H.collect(elem)
    doc = {"hirsch": len(H), "sequence": H.to_json(), "member": exps is not None, "exponents": exps}
    text = f"hirsch {len(H)}\n" + ("not a member" if exps is None else "exponents " + " ".join(map(str, exps)))
    _emit(doc, args.out, text)
    return 0


def cmd_quotient(args) -> int:
    from .quotient import associated_graded, ideal_closure, lcs_dims, quotient

    alg = free_lie_algebra(args.n, args.c, cache_dir=_resolve_cache(args))
    gens = _elements(_load_json(args.ideal), alg)
    Q = quotient(alg, ideal_closure(alg, gens))
    doc = Q.describe()
    doc["dim"] = Q.dim
    if args.graded:
        doc["lcs_dims"] = lcs_dims(Q)[:-1]
        doc["graded_dims"] = associated_graded(Q).component_dims()
    lines = [f"dim {Q.dim} (ideal rank {Q.ideal.rank})", "basis " + " ".join(doc["adapted_basis"])]
    for piv, terms in doc["relations"]:
        rhs = " + ".join(f"{x}*{w}" for w, x in terms) or "0"
        lines.append(f"  {piv} = {rhs}")
    if args.graded:
        lines.append(f"lcs {doc['lcs_dims']}  graded {doc['graded_dims']}")
    _emit(doc, args.out, "\n".join(lines))
    return 0


def _run_check(job):
    from .verify import run_named

    name, params, cache_dir = job
    return run_named(name, params, cache_dir=cache_dir)


def cmd_verify(args) -> int:
    from .verify import default_suite

    cache = _resolve_cache(args)
    laws: tuple[str, ...] = ()
    if args.laws:
        doc = _load_json(args.laws)
        if not isinstance(doc, list) or not all(isinstance(s, str) for s in doc):
            raise UsageError("--laws expects a JSON list of bracket strings such as \"[[1,2],[3,4]]\"")
        laws = tuple(doc)
    if args.check == "all":
        jobs = default_suite()
    elif args.check == "example5":
        jobs = [("example5", ())]
    else:
        if args.n is None or args.c is None:
            raise UsageError(f"verify {args.check} needs --n and --c")
        if args.check == "free":
            jobs = [("free", (args.n, args.c))]
        elif args.check == "theorem-a":
            jobs = [("theorem-a", (args.n, args.c, laws))]
        else:
            lo = args.c_min if args.c_min is not None else 1
            jobs = [("tower", (args.n, laws, lo, args.c))]
    payload = [(name, params, cache) for name, params in jobs]
    if args.parallel and len(payload) > 1:
        with ProcessPoolExecutor() as pool:
            reports = list(pool.map(_run_check, payload))
    else:
        reports = [_run_check(j) for j in payload]

    det = args.deterministic
    if args.out == "json":
        docs = [r.to_dict(det) for r in reports]
        print(json.dumps(docs[0] if len(docs) == 1 else docs, sort_keys=True, indent=2))
    else:
        print("\n".join(r.to_text() for r in reports))
    if args.figures:
        from .plotting import render_report

        for r in reports:
            for path in render_report(r, args.figures):
                log.info("wrote %s", path)
    return 0 if all(r.passed for r in reports) else 1


def cmd_cache(args) -> int:
    directory = Path(args.dir) if args.dir else (Path(args.cache_dir) if args.cache_dir else default_cache_dir())
    if args.build:
        n, c = args.build
        path = cache_path(n, c, directory)
        alg = load_cached(n, c, directory)
        if alg is None:
            alg = free_lie_algebra(n, c)
            save_cache(alg, directory)
        print(f"{path}  dim {alg.dim}")
        return 0
    entries = sorted(directory.glob("lie_*_*.json")) if directory.exists() else []
    doc = {"dir": str(directory), "entries": [p.name for p in entries]}
    _emit(doc, args.out, "\n".join([str(directory)] + [f"  {p.name}" for p in entries]))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nilpot", description="Free nilpotent Lie algebras, BCH groups and their checks.")
    p.add_argument("--cache-dir", help="structure-table cache (default: $NILPOT_CACHE or the user cache dir)")
    p.add_argument("--no-cache", action="store_true", help="do not read or write cached tables")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", choices=("text", "json"), default="text")
        return sp

    sp = common(sub.add_parser("basis", help="list the Lyndon basis of L_{n,c}"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--c", type=int, required=True)
    sp.set_defaults(func=cmd_basis)

    sp = common(sub.add_parser("bch", help="BCH product of two elements"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--c", type=int, required=True)
    sp.add_argument("--u", required=True, help="JSON element file")
    sp.add_argument("--v", required=True, help="JSON element file")
    sp.set_defaults(func=cmd_bch)

    sp = common(sub.add_parser("collect", help="collect an element against a generated subgroup"))
    sp.add_argument("--algebra", required=True, help="N,C or N,C:IDEAL.json")
    sp.add_argument("--gens", required=True, help="JSON list of generator elements")
    sp.add_argument("--elem", required=True, help="JSON element file")
    sp.set_defaults(func=cmd_collect)

    sp = common(sub.add_parser("quotient", help="quotient by the ideal generated by elements"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--c", type=int, required=True)
    sp.add_argument("--ideal", required=True, help="JSON list of ideal generators")
    sp.add_argument("--graded", action="store_true", help="also report lower central series and graded dims")
    sp.set_defaults(func=cmd_quotient)

    sp = common(sub.add_parser("verify", help="run structural checks"))
    sp.add_argument("check", choices=("free", "theorem-a", "tower", "example5", "all"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--c", type=int, help="class (upper class for tower)")
    sp.add_argument("--c-min", type=int, help="lower class for tower (default 1)")
    sp.add_argument("--laws", help="JSON list of law bracket strings")
    sp.add_argument("--deterministic", action="store_true", help="omit timings so output is byte-stable")
    sp.add_argument("--parallel", action="store_true", help="run independent checks in worker processes")
    sp.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("cache", help="inspect or fill the structure-table cache"))
    sp.add_argument("--dir", help="cache directory to use")
    sp.add_argument("--build", type=int, nargs=2, metavar=("N", "C"), help="build and store L_{N,C}")
    sp.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("missing subcommand (basis, bch, collect, quotient, verify, cache)")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"nilpot: error: {exc}", file=sys.stderr)
        return 2
    except NilpotError as exc:
        print(f"nilpot: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
