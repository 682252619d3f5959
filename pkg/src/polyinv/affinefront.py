"""Affine programs: parsing, the matrix encoding, and location invariants.

A program with m locations and n variables is encoded by one
m(n+1)×m(n+1) matrix per edge: the edge p → q with f(x) = Ax + b puts the
block [[A, b], [0, 1]] at block position (q, p).  The reachable states at
location q are then read off M·v_init for M in the monoid generated by the
edge matrices.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from . import linalg
from .errors import InputError, ProgramSyntaxError
from .family import Piece
from .idealkit import Ideal, eliminate, intersect, monomials_up_to
from .matgeom import QMatrix
from .polycore import GREVLEX, Polynomial, Q, VarSpace
from .semiclosure import SemiClosure, semigroup_closure

# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class AffineMap:
    """x ↦ A·x + b."""

    A: QMatrix
    b: tuple

    def __post_init__(self):
        if self.A.shape != (len(self.b), len(self.b)):
            raise InputError("affine map dimensions do not match")

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(QMatrix.identity(n), tuple(Q(0) for _ in range(n)))

    def __call__(self, x: Sequence) -> tuple:
        return tuple(a + c for a, c in zip(self.A.apply(x), self.b))

    def after(self, other: "AffineMap") -> "AffineMap":
        """self ∘ other."""
        return AffineMap(self.A @ other.A, self(other.b))

    def block(self) -> QMatrix:
        n = len(self.b)
        rows = [list(self.A.rows[i]) + [self.b[i]] for i in range(n)]
        rows.append([Q(0)] * n + [Q(1)])
        return QMatrix(rows)


@dataclass
class AffineProgram:
    variables: VarSpace
    locations: list[str]
    init: str
    edges: list[tuple[str, AffineMap, str]]

    def __post_init__(self):
        if self.init not in self.locations:
            raise InputError(f"init location {self.init!r} is not declared")
        n = len(self.variables)
        for src, f, tgt in self.edges:
            if src not in self.locations or tgt not in self.locations:
                raise InputError(f"edge {src} -> {tgt} uses an undeclared location")
            if len(f.b) != n:
                raise InputError("edge map does not match the variable count")

    @property
    def n(self) -> int:
        return len(self.variables)

    def reachable(self) -> set[str]:
        seen = {self.init}
        queue = deque([self.init])
        while queue:
            p = queue.popleft()
            for src, _, tgt in self.edges:
                if src == p and tgt not in seen:
                    seen.add(tgt)
                    queue.append(tgt)
        return seen


@dataclass
class InvariantReport:
    ideals: dict[str, Ideal]
    status: dict[str, str]
    dimension: int
    reachable: dict[str, bool] = field(default_factory=dict)
    closure: SemiClosure | None = field(default=None, repr=False)

    @property
    def exact(self) -> bool:
        return all(s == "exact" for s in self.status.values())


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<num>\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>:=|->|[{}(),;+\-*/])"
)
_KEYWORDS = {"vars", "locations", "init", "edge"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProgramSyntaxError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - start + 1))
    return toks


class _ProgramParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.names: list[str] = []

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ProgramSyntaxError(message, tok.line, tok.col)

    def take(self, text: str | None = None, kind: str | None = None) -> _Tok:
        tok = self.peek()
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind):
            want = repr(text) if text is not None else kind
            got = repr(tok.text) if tok.kind != "eof" else "end of input"
            self.fail(f"expected {want}, found {got}")
        self.i += 1
        return tok

    def ident(self) -> str:
        tok = self.take(kind="ident")
        if tok.text in _KEYWORDS:
            self.fail(f"keyword {tok.text!r} cannot be used as a name", tok)
        return tok.text

    def ident_list(self) -> list[tuple[str, _Tok]]:
        out = [(self.ident(), self.toks[self.i - 1])]
        while self.peek().kind == "ident" and self.peek().text not in _KEYWORDS:
            out.append((self.ident(), self.toks[self.i - 1]))
        return out

    def program(self) -> AffineProgram:
        self.take("vars")
        names = []
        for name, tok in self.ident_list():
            if name in names:
                self.fail(f"variable {name!r} declared twice", tok)
            names.append(name)
        self.take(";")
        self.names = names
        self.take("locations")
        locs = []
        for name, tok in self.ident_list():
            if name in locs:
                self.fail(f"location {name!r} declared twice", tok)
            locs.append(name)
        self.take(";")
        self.take("init")
        tok = self.peek()
        init = self.ident()
        if init not in locs:
            self.fail(f"unknown location {init!r}", tok)
        self.take(";")
        edges = []
        while self.peek().kind != "eof":
            edges.append(self.edge(locs))
        return AffineProgram(VarSpace(names), locs, init, edges)

    def location(self, locs: list[str]) -> str:
        tok = self.peek()
        name = self.ident()
        if name not in locs:
            self.fail(f"unknown location {name!r}", tok)
        return name

    def edge(self, locs: list[str]):
        self.take("edge")
        src = self.location(locs)
        self.take("->")
        tgt = self.location(locs)
        self.take("{")
        f = self.assignments()
        # `;` inside a body sequences simultaneous groups
        while self.peek().text == ";":
            self.take(";")
            f = self.assignments().after(f)
        self.take("}")
        self.take(";")
        return (src, f, tgt)

    def assignments(self) -> AffineMap:
        n = len(self.names)
        rows = {}
        if self.peek().text not in ("}", ";"):
            while True:
                tok = self.peek()
                var = self.ident()
                if var not in self.names:
                    self.fail(f"unknown variable {var!r}", tok)
                if var in rows:
                    self.fail(f"variable {var!r} assigned twice in one group", tok)
                self.take(":=")
                rows[var] = self.affexpr()
                if self.peek().text != ",":
                    break
                self.take(",")
        A, b = [], []
        for i, name in enumerate(self.names):
            if name in rows:
                lin, const = rows[name]
                A.append([lin.get(j, Q(0)) for j in range(n)])
                b.append(const)
            else:
                A.append([Q(1) if j == i else Q(0) for j in range(n)])
                b.append(Q(0))
        return AffineMap(QMatrix(A), tuple(b))

    # affine expressions are (linear part as index → coefficient, constant)
    def affexpr(self):
        sign = Q(1)
        if self.peek().text in "+-" and self.peek().kind == "op":
            sign = Q(-1) if self.take().text == "-" else Q(1)
        lin, const = _scale(self.term(), sign)
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            s = Q(-1) if self.take().text == "-" else Q(1)
            l2, c2 = _scale(self.term(), s)
            for j, v in l2.items():
                lin[j] = lin.get(j, Q(0)) + v
            const += c2
        return {j: v for j, v in lin.items() if v}, const

    def term(self):
        start = self.peek()
        lin, const = self.factor()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.take().text
            tok = self.peek()
            l2, c2 = self.factor()
            if op == "/":
                if l2 or not c2:
                    self.fail("division by a non-constant or zero", tok)
                lin, const = _scale((lin, const), 1 / c2)
            elif not l2:
                lin, const = _scale((lin, const), c2)
            elif not lin:
                lin, const = _scale((l2, c2), const)
            else:
                self.fail("non-affine expression", start)
        return lin, const

    def factor(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return {}, Q(int(tok.text))
        if tok.text == "(":
            self.take("(")
            val = self.affexpr()
            self.take(")")
            return val
        if tok.text == "-":
            self.take()
            return _scale(self.factor(), Q(-1))
        if tok.kind == "ident":
            name = self.ident()
            if name not in self.names:
                self.fail(f"unknown identifier {name!r}", tok)
            return {self.names.index(name): Q(1)}, Q(0)
        self.fail(f"unexpected {tok.text!r}" if tok.kind != "eof" else "unexpected end of input")


def _scale(val, c):
    lin, const = val
    return {j: v * c for j, v in lin.items() if v * c}, const * c


def parse_program(text: str) -> AffineProgram:
    """Parse the affine-program language (see README for the grammar)."""
    return _ProgramParser(text).program()


def format_program(p: AffineProgram) -> str:
    from .polycore import qstr

    lines = [f"vars {' '.join(p.variables)};", f"locations {' '.join(p.locations)};", f"init {p.init};"]
    for src, f, tgt in p.edges:
        assigns = []
        for i, name in enumerate(p.variables):
            terms = [f"{qstr(c)}*{p.variables.names[j]}" for j, c in enumerate(f.A.rows[i]) if c]
            if f.b[i] or not terms:
                terms.append(qstr(f.b[i]))
            assigns.append(f"{name} := {' + '.join(terms)}")
        lines.append(f"edge {src} -> {tgt} {{ {', '.join(assigns)} }};")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- encoding


def encode(p: AffineProgram) -> tuple[list[QMatrix], tuple]:
    """Edge matrices and the initial vector v_init (state 0 at the init location)."""
    n, m = p.n, len(p.locations)
    size = m * (n + 1)
    pos = {q: i for i, q in enumerate(p.locations)}
    mats = []
    for src, f, tgt in p.edges:
        rows = [[Q(0)] * size for _ in range(size)]
        blk = f.block()
        r0, c0 = pos[tgt] * (n + 1), pos[src] * (n + 1)
        for i in range(n + 1):
            for j in range(n + 1):
                rows[r0 + i][c0 + j] = blk.rows[i][j]
        mats.append(QMatrix(rows))
    v = [Q(0)] * size
    v[pos[p.init] * (n + 1) + n] = Q(1)
    return mats, tuple(v)


# ---------------------------------------------------------------- invariants


def _chart_names(h: int, taken: Sequence[str]) -> list[str]:
    prefix = "z"
    while any(t.startswith(prefix) for t in taken):
        prefix += "z"
    return [f"{prefix}{j}" for j in range(h)]


def _location_image(P: Piece, rows: Sequence[int], col: int, one_row: int, size: int, space: VarSpace) -> Ideal:
    """Zcl{ (M[rows, col]) : M ∈ P, M[one_row, col] = 1 } as an ideal over ``space``."""
    def index(r):
        return r * size + col

    h = P.hull_dim
    if h == 0:
        M = P.origin
        if M[index(one_row)] != 1:
            return Ideal.unit(space)
        return Ideal.point(space, [M[index(r)] for r in rows])
    names = _chart_names(h, space.names)
    big = VarSpace(names + list(space.names))
    g = big.gens()

    def entry(e):
        poly = big.const(P.origin[e])
        for j, dvec in enumerate(P.dirs):
            if dvec[e]:
                poly = poly + g[j] * dvec[e]
        return poly

    gens = []
    if P.J is not None:
        gens += [q.rename(big, list(range(h))) for q in P.J.generators]
    gens.append(entry(index(one_row)) - 1)
    gens += [g[h + k] - entry(index(r)) for k, r in enumerate(rows)]
    return eliminate(Ideal(big, gens), names)


def location_invariants(
    p: AffineProgram, seed: int = 0, max_group_iter: int = 50, max_enrich: int = 25
) -> InvariantReport:
    """The strongest polynomial invariant (ideal of the closure of reachable states) per location."""
    mats, v = encode(p)
    n, m = p.n, len(p.locations)
    size = m * (n + 1)
    H = semigroup_closure(mats, seed=seed, max_group_iter=max_group_iter, max_enrich=max_enrich, monoid=True, n=size)
    col = v.index(Q(1))
    reach = p.reachable()
    ideals, status, flags = {}, {}, {}
    for i, q in enumerate(p.locations):
        rows = [i * (n + 1) + k for k in range(n)]
        one = i * (n + 1) + n
        ideal = Ideal.unit(p.variables)
        for P in H.pieces:
            ideal = intersect(ideal, _location_image(P, rows, col, one, size, p.variables))
        ideals[q] = ideal
        status[q] = H.status
        flags[q] = q in reach
    return InvariantReport(ideals, status, size, flags, H)


# ---------------------------------------------------------------- fixed-degree oracle


def _substitution_matrix(f: AffineMap, monos: list[tuple], space: VarSpace) -> list[list]:
    """L with moments(f(x)) = L · moments(x) on monomials of degree ≤ d."""
    n = len(space)
    g = space.gens()
    images = [sum((g[j] * f.A.rows[i][j] for j in range(n) if f.A.rows[i][j]), space.const(f.b[i])) for i in range(n)]
    col = {mono: k for k, mono in enumerate(monos)}
    L = []
    for mono in monos:
        poly = space.one()
        for i, e in enumerate(mono):
            if e:
                poly = poly * images[i] ** e
        row = [Q(0)] * len(monos)
        for mm, c in poly.terms.items():
            row[col[mm]] = c
        L.append(row)
    return L


def mos_invariants(p: AffineProgram, d: int) -> dict[str, list[Polynomial]]:
    """All polynomial relations of degree ≤ d holding at each location, from forward moment spans."""
    if d < 1:
        raise InputError("degree must be at least 1")
    space = p.variables
    monos = monomials_up_to(len(space), d)
    N = len(monos)
    Ls = [(src, _substitution_matrix(f, monos, space), tgt) for src, f, tgt in p.edges]
    spans: dict[str, list] = {q: [] for q in p.locations}
    spans[p.init] = [[Q(1) if all(e == 0 for e in mono) else Q(0) for mono in monos]]
    work = deque([p.init])
    while work:
        src = work.popleft()
        for s, L, tgt in Ls:
            if s != src or not spans[src]:
                continue
            images = [[sum((L[r][c] * w[c] for c in range(N) if w[c]), Q(0)) for r in range(N)] for w in spans[src]]
            old = len(spans[tgt])
            new, _ = linalg.rref(spans[tgt] + images, N)
            if len(new) > old:
                spans[tgt] = new
                if tgt not in work:
                    work.append(tgt)
    out = {}
    for q in p.locations:
        kernel = linalg.nullspace(spans[q], N) if spans[q] else [
            [Q(1) if j == i else Q(0) for j in range(N)] for i in range(N)
        ]
        polys = [Polynomial(space, {monos[j]: c for j, c in enumerate(vec) if c}) for vec in kernel]
        out[q] = sorted((f.monic() for f in polys), key=lambda f: GREVLEX.key(f.leading_monomial()))
    return out
