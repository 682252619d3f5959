"""Constructible sets as finite unions of locally closed cells V(P) ∖ V(Q)."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from .errors import InputError, NoRationalWitness
from .idealkit import Ideal, dimension, eliminate, intersect, saturate
from .polycore import LEX, Polynomial, Q, VarSpace, groebner


@dataclass(frozen=True)
class Cell:
    """The locally closed set V(positive) ∖ V(negative)."""

    positive: Ideal
    negative: Ideal

    def __post_init__(self):
        if self.positive.space != self.negative.space:
            raise InputError("cell ideals live in different variable spaces")

    @property
    def space(self) -> VarSpace:
        return self.positive.space

    @classmethod
    def closed(cls, ideal: Ideal) -> "Cell":
        return cls(ideal, Ideal.unit(ideal.space))


@dataclass(frozen=True)
class ConstructibleSet:
    space: VarSpace
    cells: tuple[Cell, ...] = ()

    def __post_init__(self):
        for c in self.cells:
            if c.space != self.space:
                raise InputError("cell lives in a different variable space")

    @classmethod
    def of(cls, cells: Sequence[Cell], space: VarSpace | None = None) -> "ConstructibleSet":
        cells = tuple(cells)
        if space is None:
            if not cells:
                raise InputError("an empty constructible set needs an explicit space")
            space = cells[0].space
        return cls(space, cells)

    @classmethod
    def points(cls, space: VarSpace, pts: Sequence[Sequence]) -> "ConstructibleSet":
        return cls(space, tuple(Cell.closed(Ideal.point(space, p)) for p in pts))

    @classmethod
    def full(cls, space: VarSpace) -> "ConstructibleSet":
        return cls(space, (Cell.closed(Ideal.zero(space)),))

    @classmethod
    def empty(cls, space: VarSpace) -> "ConstructibleSet":
        return cls(space, ())


@dataclass(frozen=True)
class PolyMap:
    source: VarSpace
    target: VarSpace
    components: tuple[Polynomial, ...] = field(default=())

    def __post_init__(self):
        if len(self.components) != len(self.target):
            raise InputError("a polynomial map needs one component per target variable")
        for p in self.components:
            if p.space != self.source:
                raise InputError("map component lives in the wrong space")

    def __call__(self, point: Sequence) -> list:
        return [p.evaluate(point) for p in self.components]


# ---------------------------------------------------------------- closures


def cell_closure(c: Cell) -> Ideal:
    return saturate(c.positive, c.negative)


def closure(S: ConstructibleSet) -> Ideal:
    result = Ideal.unit(S.space)
    for c in S.cells:
        result = intersect(result, cell_closure(c))
    return result


def _check_same(Sa: ConstructibleSet, Sb: ConstructibleSet):
    if Sa.space != Sb.space:
        raise InputError("constructible sets live in different variable spaces")


def _product_ideal(I: Ideal, J: Ideal) -> Ideal:
    return Ideal(I.space, [f * g for f in I.generators for g in J.generators])


def _intersect_cells(a: Cell, b: Cell) -> Cell:
    pos = Ideal(a.space, a.positive.generators + b.positive.generators)
    return Cell(pos, _product_ideal(a.negative, b.negative))


def _complement(c: Cell) -> list[Cell]:
    # (V(P) ∖ V(Q))ᶜ = V(Q) ∪ (everything ∖ V(P))
    space = c.space
    return [Cell.closed(c.negative), Cell(Ideal.zero(space), c.positive)]


def boolean(Sa: ConstructibleSet, Sb: ConstructibleSet, op: str) -> ConstructibleSet:
    _check_same(Sa, Sb)
    if op == "union":
        return ConstructibleSet(Sa.space, Sa.cells + Sb.cells)
    if op == "intersect":
        cells = tuple(_intersect_cells(a, b) for a in Sa.cells for b in Sb.cells)
        return ConstructibleSet(Sa.space, _prune(cells))
    if op == "minus":
        # complement of Sb is the intersection of the complements of its cells
        comp = [Cell.closed(Ideal.zero(Sa.space))]
        for c in Sb.cells:
            comp = [_intersect_cells(x, y) for x in comp for y in _complement(c)]
            comp = list(_prune(tuple(comp)))
        cells = tuple(_intersect_cells(a, b) for a in Sa.cells for b in comp)
        return ConstructibleSet(Sa.space, _prune(cells))
    raise InputError(f"unknown boolean operation {op!r}")


def _prune(cells: tuple[Cell, ...]) -> tuple[Cell, ...]:
    """Drop cells whose negative part is the zero ideal or whose positive part is the unit ideal."""
    return tuple(c for c in cells if not c.negative.is_zero() and not c.positive.is_unit())


def member(pt: Sequence, S: ConstructibleSet) -> bool:
    pt = [Q(v) for v in pt]
    if len(pt) != len(S.space):
        raise InputError("point arity does not match the variable space")
    for c in S.cells:
        if c.positive.vanishes_at(pt) and not c.negative.vanishes_at(pt):
            return True
    return False


def image_closure(S: ConstructibleSet, f: PolyMap) -> Ideal:
    """Ideal of Zcl(f(S)) by graph ideals, saturation and elimination."""
    if f.source != S.space:
        raise InputError("map source does not match the constructible set")
    src, tgt = f.source, f.target
    src_names = list(src.names)
    taken = set(tgt.names)
    renamed = []
    for name in src_names:
        new = name
        k = 0
        while new in taken:
            new = f"{name}_s{k}"
            k += 1
        taken.add(new)
        renamed.append(new)
    big = VarSpace(renamed + list(tgt.names))
    k = len(src)
    embed_src = list(range(k))
    graph = [big.gens()[k + i] - comp.rename(big, embed_src) for i, comp in enumerate(f.components)]
    result = Ideal.unit(tgt)
    for c in S.cells:
        pos = Ideal(big, [g.rename(big, embed_src) for g in c.positive.generators] + graph)
        neg = Ideal(big, [g.rename(big, embed_src) for g in c.negative.generators])
        sat = saturate(pos, neg) if not neg.is_unit() else pos
        img = eliminate(sat, list(range(k)))
        img = Ideal(tgt, [Polynomial(tgt, g.terms, _trusted=True) for g in img.generators])
        result = intersect(result, img)
    return result


# ---------------------------------------------------------------- witnesses


def _rational_roots(p: Polynomial, var: int) -> list:
    """Rational roots of a univariate polynomial, in the deterministic search order."""
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * x ** m[var] for m, c in p.terms.items())
    roots = set()
    for fac, _ in sympy.factor_list(expr, x)[1]:
        fp = sympy.Poly(fac, x)
        if fp.degree() == 1:
            a, b = fp.all_coeffs()
            r = -sympy.Rational(b) / sympy.Rational(a)
            roots.add(mpq(int(r.p), int(r.q)))
    return sorted(roots, key=search_key)


def search_key(q) -> tuple:
    """Order rationals by max(|num|, den), negatives before positives, then by value."""
    q = Q(q)
    return (max(abs(q.numerator), q.denominator), 0 if q < 0 else 1, abs(q))


def _zero_dim_points(I: Ideal) -> list[list]:
    """All rational points of a zero-dimensional ideal, via a triangular lex basis."""
    space = I.space
    n = len(space)
    basis = groebner(list(I.generators), LEX)
    if basis and basis[0].is_constant():
        return []
    partial = [[]]  # assignments to variables n-1, n-2, ... (suffix)
    for var in range(n - 1, -1, -1):
        nxt = []
        for suffix in partial:
            fixed = {n - 1 - i: v for i, v in enumerate(suffix)}
            # polynomials involving only variables >= var
            univ = []
            for g in basis:
                vs = g.variables()
                if vs and min(vs) == var:
                    univ.append(_partial_eval(g, fixed, var))
                elif vs and min(vs) > var:
                    pass
            univ = [u for u in univ if u]
            if not univ:
                continue
            u = univ[0]
            for cand in _rational_roots(u, var):
                if all(not w.evaluate(_pad(w, var, cand, fixed)) for w in univ):
                    nxt.append(suffix + [cand])
        partial = nxt
    points = [list(reversed(s)) for s in partial]
    return [p for p in points if I.vanishes_at(p)]


def _partial_eval(g: Polynomial, fixed: dict, var: int) -> Polynomial:
    terms: dict = {}
    n = len(g.space)
    for m, c in g.terms.items():
        v = c
        for i, e in enumerate(m):
            if e and i in fixed:
                v *= fixed[i] ** e
        key = tuple(m[i] if i == var else 0 for i in range(n))
        terms[key] = terms.get(key, mpq(0)) + v
    return Polynomial(g.space, {k: v for k, v in terms.items() if v}, _trusted=True)


def _pad(w: Polynomial, var: int, value, fixed: dict) -> list:
    point = [mpq(0)] * len(w.space)
    point[var] = value
    return point


def _independent_set(I: Ideal) -> list[int]:
    basis = I.gb()
    n = len(I.space)
    supports = [frozenset(i for i, e in enumerate(g.leading_monomial()) if e) for g in basis]
    for size in range(n, -1, -1):
        for subset in combinations(range(n), size):
            s = set(subset)
            if all(not sup <= s for sup in supports):
                return list(subset)
    return []


def _slice_values(rng: random.Random, attempt: int, k: int) -> list:
    if attempt == 0:
        return [mpq(0)] * k
    if attempt == 1:
        return [mpq(1)] * k
    pool = [mpq(a, b) for b in (1, 2, 3) for a in range(-4, 5)]
    return [rng.choice(pool) for _ in range(k)]


def witness_point(S: ConstructibleSet, seed: int = 0, retries: int = 30) -> list:
    """A rational point of S, or raise :class:`NoRationalWitness`.

    Zero-dimensional cell closures are solved exactly; positive-dimensional
    ones are sliced by fixing an independent set of coordinates to small
    rationals drawn from a generator seeded with ``seed``.
    """
    rng = random.Random(seed)
    for c in S.cells:
        I = cell_closure(c)
        if I.is_unit():
            continue
        d = dimension(I)
        if d == 0:
            for pt in _zero_dim_points(I):
                if member(pt, ConstructibleSet(S.space, (c,))):
                    return pt
            continue
        free = _independent_set(I)
        gens = list(S.space.gens())
        for attempt in range(retries):
            values = _slice_values(rng, attempt, len(free))
            sliced = Ideal(S.space, list(I.generators) + [gens[i] - v for i, v in zip(free, values)])
            if sliced.is_unit() or dimension(sliced) != 0:
                continue
            for pt in _zero_dim_points(sliced):
                if member(pt, ConstructibleSet(S.space, (c,))):
                    return pt
    raise NoRationalWitness(f"no rational point found (seed {seed}, {retries} slices per cell)")


# ---------------------------------------------------------------- rank strata


def matrix_space(n: int, with_y: bool = False) -> VarSpace:
    names = [f"x_{i}_{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
    if with_y:
        names.append("y")
    return VarSpace(names)


def minors(entries: Sequence[Sequence[Polynomial]], r: int) -> list[Polynomial]:
    n = len(entries)
    out = []
    for rows in combinations(range(n), r):
        for cols in combinations(range(len(entries[0])), r):
            out.append(_det([[entries[i][j] for j in cols] for i in rows]))
    return [m for m in out if m]


def _det(m: list[list[Polynomial]]) -> Polynomial:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = None
    for j in range(n):
        sub = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(sub)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def matrix_entries(space: VarSpace, n: int) -> list[list[Polynomial]]:
    gens = space.gens()
    return [[gens[i * n + j] for j in range(n)] for i in range(n)]


def determinant(space: VarSpace, n: int) -> Polynomial:
    return _det(matrix_entries(space, n))


def rank_stratum(n: int, r: int, space: VarSpace | None = None) -> ConstructibleSet:
    """The matrices of rank exactly r, as one cell."""
    if not 0 <= r <= n:
        raise InputError("rank must lie between 0 and n")
    space = space or matrix_space(n)
    ent = matrix_entries(space, n)
    pos = Ideal(space, minors(ent, r + 1)) if r < n else Ideal.zero(space)
    neg = Ideal(space, minors(ent, r)) if r > 0 else Ideal.unit(space)
    return ConstructibleSet(space, (Cell(pos, neg),))


def rank_below(n: int, r: int, space: VarSpace | None = None) -> ConstructibleSet:
    """The closed set of matrices of rank < r."""
    space = space or matrix_space(n)
    ent = matrix_entries(space, n)
    pos = Ideal(space, minors(ent, r)) if r > 0 else Ideal.unit(space)
    return ConstructibleSet(space, (Cell.closed(pos),))
