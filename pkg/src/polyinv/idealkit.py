"""Ideal operations on top of the Groebner engine.

Sum, product, intersection (auxiliary-variable method), saturation,
elimination, containment, Krull dimension, standard-monomial bases of
zero-dimensional ideals, degree truncation and radical membership.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

from .errors import InputError
from .polycore import GREVLEX, MonomialOrder, Polynomial, VarSpace, block, groebner, reduce


class Infinite:
    """Marker returned by :func:`quotient_basis` when the staircase is infinite."""

    def __repr__(self):
        return "Infinite"

    def __bool__(self):
        return False


INFINITE = Infinite()


class Ideal:
    """An ideal of Q[space] given by generators, with cached reduced bases."""

    __slots__ = ("space", "generators", "_gb")

    def __init__(self, space: VarSpace, generators: Iterable[Polynomial] = ()):
        gens = []
        for g in generators:
            if g.space != space:
                raise InputError("generator lives in a different variable space")
            if g:
                gens.append(g)
        self.space = space
        self.generators = tuple(gens)
        self._gb: dict[MonomialOrder, tuple[Polynomial, ...]] = {}

    @classmethod
    def unit(cls, space: VarSpace) -> "Ideal":
        return cls(space, [space.one()])

    @classmethod
    def zero(cls, space: VarSpace) -> "Ideal":
        return cls(space, [])

    @classmethod
    def parse(cls, space: VarSpace, texts: Iterable[str]) -> "Ideal":
        return cls(space, [space.parse(t) for t in texts])

    @classmethod
    def point(cls, space: VarSpace, coords: Sequence) -> "Ideal":
        gens = [v - c for v, c in zip(space.gens(), coords)]
        ideal = cls(space, gens)
        ideal._gb[GREVLEX] = tuple(sorted((g for g in gens if g), key=lambda p: GREVLEX.key(p.leading_monomial())))
        return ideal

    def gb(self, order: MonomialOrder = GREVLEX) -> tuple[Polynomial, ...]:
        basis = self._gb.get(order)
        if basis is None:
            basis = tuple(groebner(list(self.generators), order))
            self._gb[order] = basis
        return basis

    def reduce(self, p: Polynomial, order: MonomialOrder = GREVLEX) -> Polynomial:
        return reduce(p, self.gb(order), order)

    def contains_poly(self, p: Polynomial) -> bool:
        return not self.reduce(p)

    def is_unit(self) -> bool:
        basis = self.gb()
        return len(basis) == 1 and basis[0].is_constant()

    def is_zero(self) -> bool:
        return not self.generators

    def vanishes_at(self, point: Sequence) -> bool:
        return all(not g.evaluate(point) for g in self.generators)

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        return self.space == other.space and self.gb() == other.gb()

    def __hash__(self):
        return hash((self.space, self.gb()))

    def __repr__(self):
        return "Ideal(" + ", ".join(str(g) for g in self.gb()) + ")"

    def __str__(self):
        return "(" + ", ".join(str(g) for g in self.gb()) + ")" if self.generators else "(0)"

    def rename(self, target: VarSpace, mapping: Sequence[int] | None = None) -> "Ideal":
        return Ideal(target, [g.rename(target, mapping) for g in self.generators])

    def with_generators(self, extra: Iterable[Polynomial]) -> "Ideal":
        return Ideal(self.space, list(self.generators) + list(extra))


def _same(I: Ideal, J: Ideal) -> VarSpace:
    if I.space != J.space:
        raise InputError("ideals live in different variable spaces")
    return I.space


def combine(I: Ideal, J: Ideal, mode: str = "sum") -> Ideal:
    space = _same(I, J)
    if mode == "sum":
        return Ideal(space, I.generators + J.generators)
    if mode == "product":
        return Ideal(space, [f * g for f in I.generators for g in J.generators])
    raise InputError(f"unknown combine mode {mode!r}")


def _with_aux(space: VarSpace, stem: str = "t") -> tuple[VarSpace, int]:
    """A space with one fresh variable prepended, and the shift for embedding."""
    name = space.fresh(stem)
    return space.extend([name], front=True), 1


def _embed(p: Polynomial, big: VarSpace, shift: int) -> Polynomial:
    return p.rename(big, list(range(shift, shift + len(p.space))))


def _drop_front(basis: Sequence[Polynomial], k: int, space: VarSpace) -> list[Polynomial]:
    out = []
    for g in basis:
        if any(any(m[:k]) for m in g.terms):
            continue
        out.append(Polynomial(space, {m[k:]: c for m, c in g.terms.items()}, _trusted=True))
    return out


def intersect(I: Ideal, J: Ideal) -> Ideal:
    """I ∩ J = (t·I + (1 − t)·J) ∩ Q[x]."""
    space = _same(I, J)
    if I.is_zero() or J.is_zero():
        return Ideal.zero(space)
    if I.is_unit():
        return J
    if J.is_unit():
        return I
    big, shift = _with_aux(space)
    t = big.gens()[0]
    gens = [t * _embed(f, big, shift) for f in I.generators]
    gens += [(1 - t) * _embed(g, big, shift) for g in J.generators]
    basis = groebner(gens, block(1))
    return Ideal(space, _drop_front(basis, 1, space))


def intersect_all(ideals: Sequence[Ideal], space: VarSpace) -> Ideal:
    result = Ideal.unit(space)
    for I in ideals:
        result = intersect(result, I)
    return result


def saturate_single(I: Ideal, g: Polynomial) -> Ideal:
    """I : g^∞ via the auxiliary equation t·g − 1."""
    space = I.space
    if g.is_constant():
        return I
    big, shift = _with_aux(space)
    t = big.gens()[0]
    gens = [_embed(f, big, shift) for f in I.generators] + [t * _embed(g, big, shift) - 1]
    basis = groebner(gens, block(1))
    return Ideal(space, _drop_front(basis, 1, space))


def saturate(I: Ideal, J: Ideal) -> Ideal:
    """I : J^∞.

    For J = (g_1, ..., g_s) this equals the intersection of the I : g_i^∞:
    if f·g_i^{e_i} ∈ I for every i then f·J^N ⊆ I once N ≥ Σ e_i, since each
    monomial in the g_i of degree N has some exponent at least e_i.
    """
    _same(I, J)
    if J.is_zero():
        raise InputError("cannot saturate by the zero ideal")
    if J.is_unit():
        return I
    if I.is_unit():
        return I
    parts = [saturate_single(I, g) for g in J.gb()]
    result = parts[0]
    for part in parts[1:]:
        result = intersect(result, part)
    return result


def eliminate(I: Ideal, drop: Iterable[str | int]) -> Ideal:
    """I ∩ Q[remaining variables], as an ideal in the smaller space.

    Variables in ``drop`` may be given by name or index.  When nothing is
    dropped the ideal itself is returned.
    """
    space = I.space
    idx = sorted({space.index(v) if isinstance(v, str) else int(v) for v in drop})
    if not idx:
        return I
    keep = [i for i in range(len(space)) if i not in idx]
    if not keep:
        raise InputError("cannot eliminate every variable")
    perm = idx + keep
    big = VarSpace([space.names[i] for i in perm])
    position = {old: new for new, old in enumerate(perm)}
    moved = [g.rename(big, [position[i] for i in range(len(space))]) for g in I.generators]
    basis = groebner(moved, block(len(idx)))
    small = VarSpace([space.names[i] for i in keep])
    return Ideal(small, _drop_front(basis, len(idx), small))


def contains(I: Ideal, J: Ideal) -> bool:
    """True iff J ⊆ I."""
    _same(I, J)
    basis = I.gb()
    return all(not reduce(g, basis) for g in J.generators)


def equal(I: Ideal, J: Ideal) -> bool:
    _same(I, J)
    return I.gb() == J.gb()


def dimension(I: Ideal) -> int:
    """Krull dimension from the largest set of variables free of leading monomials."""
    basis = I.gb()
    if not basis:
        return len(I.space)
    if basis[0].is_constant():
        return -1
    n = len(I.space)
    lms = [g.leading_monomial() for g in basis]
    supports = [frozenset(i for i, e in enumerate(m) if e) for m in lms]
    for size in range(n, -1, -1):
        for subset in combinations(range(n), size):
            s = set(subset)
            if all(not sup <= s for sup in supports):
                return size
    return 0


def quotient_basis(I: Ideal, order: MonomialOrder = GREVLEX):
    """Standard monomials of Q[x]/I if finitely many, else :data:`INFINITE`."""
    basis = I.gb(order)
    n = len(I.space)
    lms = [g.leading_monomial(order) for g in basis]
    if lms and not any(lms[0]) and len(lms) == 1:
        return []
    bounds = []
    for i in range(n):
        pure = [m[i] for m in lms if all(e == 0 for j, e in enumerate(m) if j != i) and m[i] > 0]
        if not pure:
            return INFINITE
        bounds.append(min(pure))
    out = []

    def walk(prefix):
        i = len(prefix)
        if i == n:
            out.append(tuple(prefix))
            return
        for e in range(bounds[i]):
            cand = prefix + [e]
            # prune: if a leading monomial already divides the padded monomial, skip
            padded = tuple(cand + [0] * (n - i - 1))
            if any(all(a <= b for a, b in zip(m, padded)) for m in lms):
                break
            walk(cand)

    walk([])
    out.sort(key=order.key)
    return out


def monomials_up_to(n: int, d: int) -> list[tuple]:
    """All exponent tuples of total degree ≤ d, by degree then lex."""
    out = []

    def rec(prefix, left):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for e in range(left, -1, -1):
            rec(prefix + [e], left - e)

    rec([], d)
    out.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    return out


def degree_truncate(I: Ideal, d: int) -> list[Polynomial]:
    """Basis of {p ∈ I : deg p ≤ d}.

    The normal form map is linear, so the members of degree ≤ d are the
    kernel of the matrix whose columns are normal forms of the monomials.
    The kernel is returned in reduced echelon form (unique).
    """
    from .linalg import nullspace

    if d < 0:
        raise InputError("degree must be non-negative")
    space = I.space
    monos = monomials_up_to(len(space), d)
    forms = [I.reduce(Polynomial(space, {m: 1}, _trusted=False)) for m in monos]
    rows_index: dict = {}
    for f in forms:
        for m in f.terms:
            rows_index.setdefault(m, len(rows_index))
    matrix = [[0] * len(monos) for _ in rows_index]
    for j, f in enumerate(forms):
        for m, c in f.terms.items():
            matrix[rows_index[m]][j] = c
    kernel = nullspace(matrix, len(monos))
    polys = [Polynomial(space, {monos[j]: v for j, v in enumerate(vec) if v}) for vec in kernel]
    return sorted((p.monic() for p in polys), key=lambda p: GREVLEX.key(p.leading_monomial()))


def radical_member(I: Ideal, p: Polynomial) -> bool:
    """Rabinowitsch: p ∈ √I iff 1 ∈ I + (t·p − 1)."""
    if not p:
        return True
    big, shift = _with_aux(I.space)
    t = big.gens()[0]
    gens = [_embed(f, big, shift) for f in I.generators] + [t * _embed(p, big, shift) - 1]
    basis = groebner(gens)
    return len(basis) == 1 and basis[0].is_constant()


def same_variety(I: Ideal, J: Ideal) -> bool:
    """V(I) = V(J), by radical membership in both directions."""
    _same(I, J)
    return all(radical_member(I, g) for g in J.generators) and all(radical_member(J, g) for g in I.generators)
