"""Command-line front end."""

from __future__ import annotations

import argparse
import json
import sys
import time

from ..core_complex import Chain, ContractError, InternalConsistencyError, InvalidComplexError
from ..dvf import LoopWitness, build_reduction_gauss, check_admissible, greedy_field
from ..matrix_reduce import (HomologyGroup, IntegerMatrix, MatrixLoop, check_matrix_vf_admissible, homology_of_finite_complex,
                             order_by_height, order_graph, reduce_matrix, vf_by_predefined_order, vf_incremental)
from ..reduction import Reduction, compose_reductions
from .images import ParseError, build_cubical, geometric_vf, load_image

SCHEMA = 1


class CommandFailed(Exception):
    """A check run by a command did not pass."""


# ---------------------------------------------------------------------------
# file formats

def parse_matrix(text: str) -> IntegerMatrix:
    """First line ``rows cols``, then one ``r c v`` triple per line (1-based indices)."""
    header = None
    entries = {}
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        toks = body.split()
        if not toks:
            continue
        cols = _columns(body)
        vals = []
        for tok, col in zip(toks, cols):
            try:
                vals.append(int(tok))
            except ValueError:
                raise ParseError(f"expected an integer, got {tok!r}", ln, col) from None
        if header is None:
            if len(vals) != 2 or min(vals) < 0:
                raise ParseError("header must be 'rows cols'", ln, cols[0])
            header = vals
            continue
        if len(vals) != 3:
            raise ParseError(f"expected 'r c v', got {len(vals)} fields", ln, cols[0])
        r, c, v = vals
        if not 1 <= r <= header[0]:
            raise ParseError(f"row index {r} out of range 1..{header[0]}", ln, cols[0])
        if not 1 <= c <= header[1]:
            raise ParseError(f"column index {c} out of range 1..{header[1]}", ln, cols[1])
        if (r, c) in entries:
            raise ParseError(f"duplicate entry ({r},{c})", ln, cols[0])
        entries[(r, c)] = v
    if header is None:
        raise ParseError("missing 'rows cols' header", 1, 1)
    return IntegerMatrix(range(1, header[0] + 1), range(1, header[1] + 1), entries)


def _columns(body: str) -> list[int]:
    out, inside = [], False
    for i, ch in enumerate(body, 1):
        if not ch.isspace() and not inside:
            out.append(i)
        inside = not ch.isspace()
    return out


def parse_chain(text: str) -> Chain:
    """Chain of a cubical complex, one item per line:

    ``vertex x y [c]``, ``edge x1 y1 x2 y2 [c]``, ``square x y [c]`` or
    ``path x0 y0 x1 y1 ... xn yn`` (horizontal or vertical segments, edges
    oriented along the path).
    All items must have the same degree.
    """
    acc: dict = {}
    degree = None
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        toks = body.split()
        if not toks:
            continue
        cols = _columns(body)
        kind = toks[0]
        try:
            nums = [int(t) for t in toks[1:]]
        except ValueError:
            bad = next(i for i, t in enumerate(toks[1:], 1) if not t.lstrip("-").isdigit())
            raise ParseError(f"expected an integer, got {toks[bad]!r}", ln, cols[bad]) from None
        if kind == "path":
            if len(nums) < 4 or len(nums) % 2:
                raise ParseError("path needs an even number (>= 4) of coordinates", ln, cols[0])
            pts = list(zip(nums[::2], nums[1::2]))
            terms = {}
            for a, b in zip(pts, pts[1:]):
                if (a[0] != b[0]) == (a[1] != b[1]):
                    raise ParseError(f"path segment {a} -> {b} is not horizontal or vertical", ln, cols[0])
                n = abs(b[0] - a[0]) + abs(b[1] - a[1])
                dx, dy = (b[0] - a[0]) // n, (b[1] - a[1]) // n
                for i in range(n):
                    u = (a[0] + i * dx, a[1] + i * dy)
                    v = (u[0] + dx, u[1] + dy)
                    e, s = ((u, v), 1) if u < v else ((v, u), -1)
                    terms[e] = terms.get(e, 0) + s
            deg = 1
        elif kind in ("vertex", "square"):
            if len(nums) not in (2, 3):
                raise ParseError(f"{kind} needs x y [coeff]", ln, cols[0])
            terms = {tuple(nums[:2]): nums[2] if len(nums) == 3 else 1}
            deg = 0 if kind == "vertex" else 2
        elif kind == "edge":
            if len(nums) not in (4, 5):
                raise ParseError("edge needs x1 y1 x2 y2 [coeff]", ln, cols[0])
            a, b = tuple(nums[:2]), tuple(nums[2:4])
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ParseError("edge endpoints must be adjacent", ln, cols[1])
            c = nums[4] if len(nums) == 5 else 1
            terms = {(a, b): c} if a < b else {(b, a): -c}
            deg = 1
        else:
            raise ParseError(f"unknown item {kind!r}", ln, cols[0])
        if degree is not None and deg != degree:
            raise ParseError("all items must have the same degree", ln, cols[0])
        degree = deg
        for k, v in terms.items():
            acc[k] = acc.get(k, 0) + v
    if degree is None:
        raise ParseError("empty chain file", 1, 1)
    return Chain(degree, acc)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# output helpers

def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    return x


def chain_json(c: Chain) -> list:
    return [{"cell": _jsonable(k), "coeff": v} for k, v in sorted(c.items(), key=lambda kv: repr(kv[0]))]


def _fmt_cell(k) -> str:
    if isinstance(k, tuple) and len(k) == 2 and isinstance(k[0], tuple):
        return f"{k[0]}-{k[1]}"
    return str(k)


def chain_text(c: Chain) -> str:
    if not c:
        return "0"
    parts = []
    for k, v in sorted(c.items(), key=lambda kv: repr(kv[0])):
        parts.append(("+ " if v > 0 else "- ") + (f"{abs(v)}*" if abs(v) != 1 else "") + _fmt_cell(k))
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def emit(args, payload: dict, text_lines: list[str]) -> None:
    if getattr(args, "format", "text") == "json":
        print(json.dumps(dict({"schema": SCHEMA}, **payload), sort_keys=True))
    else:
        print("\n".join(text_lines))


# ---------------------------------------------------------------------------
# homology of images

def reduce_image(img) -> tuple:
    """Cubical complex, geometric field and a reduction onto a complex with no
    unit entries left in its differential."""
    C = build_cubical(img)
    V = geometric_vf(C)
    cert = check_admissible(C, V)
    if isinstance(cert, LoopWitness):
        raise InternalConsistencyError("geometric field has a loop")
    rho = build_reduction_gauss(C, V, cert)
    while True:
        S = rho.small
        W = greedy_field(S)
        if not len(W):
            break
        rho = compose_reductions(rho, build_reduction_gauss(S, W, check_admissible(S, W)))
    return C, V, rho


def generators(rho: Reduction) -> dict:
    """Lifted cycles of the small generators in degrees where the small differential vanishes."""
    S = rho.small
    out = {}
    for p in S.degree_range():
        cells = S.cells(p)
        if any(S.boundary_raw(p, c.key) for c in cells):
            continue
        if any(S.boundary_raw(p + 1, c.key) for c in S.cells(p + 1)):
            continue
        out[p] = [rho.g.on_cell(c) for c in cells]
    return out


def cmd_homology(args) -> int:
    img = load_image(args.image)
    C, V, rho = reduce_image(img)
    H = homology_of_finite_complex(rho.small)
    H = {p: H.get(p, HomologyGroup(0, [])) for p in range(3)}
    sizes = {p: len(C.basis(p)) for p in range(3)}
    payload = {"command": "homology", "cells": {str(p): n for p, n in sizes.items()},
               "critical": len(C.cells()) - 2 * len(V),
               "homology": {str(p): {"betti": h.betti, "torsion": h.torsion} for p, h in H.items()}}
    lines = [f"cells: {sizes[0]} vertices, {sizes[1]} edges, {sizes[2]} squares",
             f"critical cells: {payload['critical']}"]
    lines += [f"H{p} = {h}" for p, h in sorted(H.items())]
    if args.generators:
        gens = generators(rho)
        payload["generators"] = {str(p): [chain_json(g) for g in gs] for p, gs in gens.items()}
        for p, gs in sorted(gens.items()):
            for i, g in enumerate(gs):
                lines.append(f"generator H{p}[{i}]: {chain_text(g)}")
    if args.cycle:
        z = parse_chain(_read(args.cycle))
        for k in z.keys():
            if not C.contains(z.degree, k):
                raise ContractError(f"cell {_fmt_cell(k)} is not in the cubical complex")
        if C.d(z):
            raise ContractError("the given chain is not a cycle")
        cls = rho.f(z)
        info = {"class": chain_json(cls)}
        lines.append(f"class of cycle: {chain_text(cls)}")
        if not cls:
            w = rho.h(z)
            if C.d(w) != z:
                raise InternalConsistencyError("boundary preimage check failed")
            info["boundary_preimage"] = chain_json(w)
            lines.append(f"boundary preimage: {chain_text(w)}")
        payload["cycle"] = info
    emit(args, payload, lines)
    return 0


# ---------------------------------------------------------------------------
# other commands

def _dense(M: IntegerMatrix) -> list:
    return M.to_dense()


def cmd_reduce_matrix(args) -> int:
    M = parse_matrix(_read(args.matrix))
    if args.heuristic == "order":
        V = vf_by_predefined_order(M)
        graph = order_graph(M, V)
    else:
        V, graph = vf_incremental(M, with_graph=True)
    cert = check_matrix_vf_admissible(M, V) if args.heuristic == "order" else order_by_height(M, V)
    if isinstance(cert, MatrixLoop):
        raise InternalConsistencyError(f"heuristic produced a loop through rows {cert.rows}")
    red = reduce_matrix(M, V, cert)
    R = red.residual
    payload = {"command": "reduce-matrix", "heuristic": args.heuristic,
               "vector_field": [list(v) for v in V.vectors],
               "order_graph": sorted([list(e) for e in graph.edges]),
               "row_order": list(red.row_order), "col_order": list(red.col_order),
               "residual": {"rows": list(R.rows), "cols": list(R.cols), "entries": _dense(R)}}
    lines = ["vector field: " + " ".join(f"({a},{b})" for a, b in V.vectors),
             "order graph: " + " ".join(f"{a}>{b}" for a, b in sorted(graph.edges)),
             f"row order: {red.row_order}", f"column order: {red.col_order}",
             f"reduced matrix (rows {list(R.rows)}, columns {list(R.cols)}):"]
    lines += ["  " + " ".join(f"{v:3d}" for v in row) for row in _dense(R)]
    emit(args, payload, lines)
    return 0


def cmd_filling_sequence(args) -> int:
    from ..ez import filling_count, filling_sequence, format_spath
    if args.p < 0 or args.q < 0:
        raise ContractError("p and q must be non-negative")
    if args.count_only:
        n = filling_count(args.p, args.q)
        emit(args, {"command": "filling-sequence", "p": args.p, "q": args.q, "count": n}, [str(n)])
        return 0
    seq = filling_sequence(args.p, args.q)
    emit(args, {"command": "filling-sequence", "p": args.p, "q": args.q, "count": len(seq),
                "paths": [[list(pt) for pt in path] for path in seq]},
         [format_spath(path) for path in seq])
    return 0


def cmd_ez_check(args) -> int:
    from ..ez import compare_with_classical
    from ..simplicial import StandardSimplex
    if args.p < 0 or args.q < 0:
        raise ContractError("p and q must be non-negative")
    t0 = time.perf_counter()
    res = compare_with_classical(StandardSimplex(args.p), StandardSimplex(args.q), args.p + args.q)
    checks = {"small differential = tensor differential": True,
              "reduction identities": res["identities"].ok,
              "f = AW": not res["f=AW"], "g = EML": not res["g=EML"], "h = SHI": not res["h=SHI"]}
    ok = all(checks.values())
    payload = {"command": "ez-check", "p": args.p, "q": args.q, "checks": checks, "ok": ok,
               "seconds": round(time.perf_counter() - t0, 3)}
    lines = [f"{'PASS' if v else 'FAIL'}  {k}" for k, v in checks.items()]
    emit(args, payload, lines)
    if not ok:
        raise CommandFailed("some Eilenberg-Zilber checks failed")
    return 0


def cmd_twisted_demo(args) -> int:
    from ..ez import lens_space_pipeline
    if args.k < 1:
        raise ContractError("k must be positive")
    L = lens_space_pipeline(args.k)
    S = L.total.small
    H = homology_of_finite_complex(S)
    gens = [c for p in S.degree_range() for c in S.cells(p)]
    diff = {f"{c.degree}:{c.key!r}": {repr(k): v for k, v in S.boundary_raw(c.degree, c.key).items()}
            for c in gens}
    want = {0: (1, []), 1: (0, [args.k] if args.k > 1 else []), 2: (0, []), 3: (1, [])}
    ok = all((H[p].betti, H[p].torsion) == want[p] for p in want)
    payload = {"command": "twisted-demo", "k": args.k, "generators": len(gens), "differential": diff,
               "homology": {str(p): {"betti": h.betti, "torsion": h.torsion} for p, h in H.items()},
               "matches_lens_space": ok}
    lines = [f"generators: {len(gens)}"]
    for c in gens:
        lines.append(f"  d {c.key!r} = {dict(S.boundary_raw(c.degree, c.key)) or 0}")
    lines += [f"H{p} = {h}" for p, h in sorted(H.items())]
    lines.append("matches lens space L(k,1): " + ("yes" if ok else "no"))
    emit(args, payload, lines)
    if not ok:
        raise CommandFailed("homology differs from the lens-space complex")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="effhom", description="Effective homology with discrete vector fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fmt(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("homology", help="homology of a binary image")
    p.add_argument("image")
    fmt(p)
    p.add_argument("--generators", action="store_true", help="print lifted representative cycles")
    p.add_argument("--cycle", metavar="FILE", help="chain file: report its class or a boundary preimage")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("reduce-matrix", help="reduce a matrix along a heuristic vector field")
    p.add_argument("matrix")
    p.add_argument("--heuristic", choices=("order", "incremental"), default="order")
    fmt(p)
    p.set_defaults(func=cmd_reduce_matrix)

    p = sub.add_parser("filling-sequence", help="filling sequence of the (p,q) prism")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("--count-only", action="store_true")
    fmt(p)
    p.set_defaults(func=cmd_filling_sequence)

    p = sub.add_parser("ez-check", help="check the Eilenberg-Zilber reduction on Delta^p x Delta^q")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    fmt(p)
    p.set_defaults(func=cmd_ez_check)

    p = sub.add_parser("twisted-demo", help="lens-space pipeline for tau(s) = k")
    p.add_argument("--k", type=int, required=True)
    fmt(p)
    p.set_defaults(func=cmd_twisted_demo)
    return ap


def _fail(kind: str, exc: Exception, code: int, **extra) -> int:
    err = {"type": kind, "message": getattr(exc, "message", None) or str(exc)}
    err.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps({"schema": SCHEMA, "error": err}, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        return _fail("parse_error", exc, 2, line=exc.line, column=exc.column)
    except OSError as exc:
        return _fail("io_error", exc, 2)
    except (ContractError, InvalidComplexError) as exc:
        return _fail("invalid_input", exc, 2)
    except CommandFailed as exc:
        return _fail("check_failed", exc, 1)
    except InternalConsistencyError as exc:
        return _fail("internal_error", exc, 3)
