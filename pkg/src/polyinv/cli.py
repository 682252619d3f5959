"""Command-line interface: ``polyinv <command> [options]``.

Exit codes: 0 exact result, 1 input or parse error, 2 lower-bound or
inconclusive result (the document is still written), 3 unsupported instance.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import tempfile
import time
from typing import Sequence

from . import __version__
from .affinefront import location_invariants, mos_invariants, parse_program
from .constructible import matrix_space
from .errors import ComponentSplitIncomplete, InputError, NoRationalWitness, UnsupportedEigenvalues
from .family import Family, Piece
from .idealkit import Ideal
from .matgeom import QMatrix
from .polycore import Q, format_polynomial, qstr
from .semiclosure import SemiClosure, certify, is_finite, semigroup_closure

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL, EXIT_UNSUPPORTED = 0, 1, 2, 3


# ---------------------------------------------------------------- documents


def read_matrices(path: str) -> tuple[int, list[QMatrix]]:
    """Read {"dim": n, "matrices": [[["p/q", ...], ...], ...]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix document {path}: {exc}") from None
    return parse_matrix_document(doc)


def parse_matrix_document(doc) -> tuple[int, list[QMatrix]]:
    if not isinstance(doc, dict) or "dim" not in doc or "matrices" not in doc:
        raise InputError('matrix document needs "dim" and "matrices"')
    n = doc["dim"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError('"dim" must be a positive integer')
    mats = []
    for k, rows in enumerate(doc["matrices"]):
        if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
            raise InputError(f"matrix {k} is not {n}x{n}")
        mats.append(QMatrix([[Q(v) for v in r] for r in rows]))
    return n, mats


def _ideal_text(I: Ideal) -> list[str]:
    return [format_polynomial(g) for g in I.gb()]


def _family_doc(F: Family) -> dict:
    r, c = F.shape
    terms = []
    for m in sorted(F.terms):
        flat = F.terms[m]
        terms.append({"exponents": list(m), "matrix": [[qstr(flat[i * c + j]) for j in range(c)] for i in range(r)]})
    return {"k": F.k, "terms": terms}


def _family_from_doc(doc, n: int) -> Family:
    k = doc["k"]
    terms = {}
    for t in doc["terms"]:
        exps = tuple(int(e) for e in t["exponents"])
        if len(exps) != k:
            raise InputError("parametrization exponent length does not match k")
        terms[exps] = tuple(Q(v) for row in t["matrix"] for v in row)
    return Family((n, n), k, terms)


def closure_document(H: SemiClosure, with_params: bool = True) -> dict:
    space = matrix_space(H.n) if H.n else None
    pieces = []
    for P in H.pieces:
        entry = {"dimension": P.dim, "ideal": _ideal_text(P.global_ideal(space))}
        if with_params and P.family is not None:
            entry["parametrization"] = _family_doc(P.family)
        pieces.append(entry)
    combined = _ideal_text(H.combined_ideal()) if space else ["1"]
    return {
        "variables": {"scheme": "x_<row>_<col>", "names": list(space.names) if space else []},
        "dim": H.n,
        "pieces": pieces,
        "combined_ideal": combined,
        "notes": list(H.notes),
    }


def pieces_from_document(doc: dict, n: int) -> list[Piece]:
    """Rebuild pieces; a stored parametrization is accepted only if it reproduces the stated ideal."""
    space = matrix_space(n)
    rng = random.Random(0)
    pieces = []
    for entry in doc.get("pieces", []):
        ideal = Ideal.parse(space, entry["ideal"])
        P = None
        if "parametrization" in entry:
            F = _family_from_doc(entry["parametrization"], n)
            cand = Piece.point(F.evaluate([])) if F.k == 0 else Piece.from_family(F, rng)
            if cand.global_ideal(space) == ideal:
                P = cand
        if P is None:
            P = Piece.from_ideal(ideal, (n, n))
        pieces.append(P)
    return pieces


def write_document(doc: dict, path: str | None):
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".polyinv-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------- commands


def _read_program(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read program {path}: {exc}") from None
    return parse_program(text)


def cmd_closure(args) -> tuple[dict, str]:
    n, mats = read_matrices(args.input)
    H = semigroup_closure(mats, seed=args.seed, max_group_iter=args.max_group_iter, max_enrich=args.max_enrich, n=n)
    H.n = n
    return closure_document(H), H.status


def cmd_invariants(args) -> tuple[dict, str]:
    p = _read_program(args.program)
    R = location_invariants(p, seed=args.seed, max_group_iter=args.max_group_iter, max_enrich=args.max_enrich)
    locs = [
        {"name": q, "ideal": _ideal_text(R.ideals[q]), "status": R.status[q], "reachable": R.reachable[q]}
        for q in p.locations
    ]
    status = "exact" if R.exact else "lower-bound"
    return {"variables": list(p.variables.names), "encoding_dimension": R.dimension, "locations": locs}, status


def cmd_oracle(args) -> tuple[dict, str]:
    if args.degree is None:
        raise InputError("oracle needs --degree")
    p = _read_program(args.program)
    rel = mos_invariants(p, args.degree)
    locs = [{"name": q, "relations": [format_polynomial(f) for f in rel[q]]} for q in p.locations]
    return {"variables": list(p.variables.names), "degree": args.degree, "locations": locs}, "exact"


def cmd_finite(args) -> tuple[dict, str]:
    _, mats = read_matrices(args.input)
    res = is_finite(mats, seed=args.seed)
    status = "exact" if res.finite is not None else "inconclusive"
    return {"finite": res.finite, "count_bound": res.count_bound}, status


def cmd_certify(args) -> tuple[dict, str]:
    if not args.closure:
        raise InputError("certify needs --closure with a closure document")
    n, mats = read_matrices(args.input)
    try:
        with open(args.closure, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read closure document {args.closure}: {exc}") from None
    if doc.get("dim") != n:
        raise InputError("closure document dimension does not match the matrices")
    H = SemiClosure(n, pieces_from_document(doc, n), "exact")
    ok = certify(H, mats)
    return {"certified": ok}, "exact" if ok else "inconclusive"


COMMANDS = {
    "closure": cmd_closure,
    "invariants": cmd_invariants,
    "oracle": cmd_oracle,
    "finite": cmd_finite,
    "certify": cmd_certify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyinv", description="Zariski closures of matrix semigroups and polynomial invariants of affine programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def positive(text):
        v = int(text)
        if v < 1:
            raise argparse.ArgumentTypeError("must be a positive integer")
        return v

    for name, needs in [("closure", "input"), ("invariants", "program"), ("oracle", "program"), ("finite", "input"), ("certify", "input")]:
        p = sub.add_parser(name)
        if needs == "input":
            p.add_argument("--input", required=True, help="matrix document (JSON)")
        else:
            p.add_argument("--program", required=True, help="affine program text")
        if name == "oracle":
            p.add_argument("--degree", type=positive, required=True)
        if name == "certify":
            p.add_argument("--closure", required=True, help="closure document produced by 'closure'")
        p.add_argument("--field", choices=["real", "complex"], default="complex")
        p.add_argument("--max-group-iter", type=positive, default=50)
        p.add_argument("--max-enrich", type=positive, default=25)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", default=None, help="output path (default: stdout)")
        p.add_argument("--timing", action="store_true", help="record wall-clock time in the provenance block")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    start = time.perf_counter()
    try:
        body, status = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"polyinv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnsupportedEigenvalues, NoRationalWitness, ComponentSplitIncomplete) as exc:
        print(f"polyinv: unsupported instance: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    provenance = {
        "tool": "polyinv",
        "version": __version__,
        "seed": args.seed,
        "field": args.field,
        "bounds": {"max_group_iter": args.max_group_iter, "max_enrich": args.max_enrich},
    }
    if args.timing:
        provenance["seconds"] = round(time.perf_counter() - start, 3)
    doc = {"command": args.command, "status": status, **body, "provenance": provenance}
    try:
        write_document(doc, args.output)
    except OSError as exc:
        print(f"polyinv: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if status == "exact" else EXIT_PARTIAL


def main() -> None:
    sys.exit(run())
