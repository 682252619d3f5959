"""Zariski closures of finitely generated rational matrix groups.

The identity component of Zcl⟨g_1, …, g_k⟩ is built from below as the
smallest irreducible closed subgroup that contains the identity components
of the cyclic closures and is normalized by the generators.  The finitely
many cosets are then enumerated by a breadth-first search over words in the
generators.  When the search closes up, the union of cosets is a closed
subsemigroup containing the generators, hence the whole closure.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from functools import reduce as _fold
from math import gcd
from typing import Sequence

from gmpy2 import mpq
from sympy import factorint

from . import linalg
from .constructible import (
    Cell,
    ConstructibleSet,
    PolyMap,
    boolean,
    cell_closure,
    determinant,
    image_closure,
    matrix_space,
    witness_point,
)
from .errors import ComponentSplitIncomplete, InputError, UnsupportedEigenvalues
from .family import Family, FamilyChain, Piece, generic_rank, random_point
from .idealkit import Ideal, contains, dimension, intersect, radical_member, same_variety
from .matgeom import (
    QMatrix,
    charpoly,
    exp_series,
    finite_order,
    jordan_chevalley,
    nilpotent_log,
    order_bound,
    rational_roots,
)
from .polycore import GREVLEX, Polynomial, VarSpace, reduce

# ---------------------------------------------------------------- integer lattices


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hermite_rows(rows: Sequence[Sequence[int]], ncols: int | None = None) -> list[list[int]]:
    """Row Hermite normal form of the lattice spanned by ``rows`` (zero rows dropped)."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return []
    ncols = len(m[0]) if ncols is None else ncols
    r = 0
    for c in range(ncols):
        # gather a gcd pivot into row r
        for i in range(r + 1, len(m)):
            if m[i][c]:
                a, b = m[r][c], m[i][c]
                g, x, y = _ext_gcd(a, b)
                if a == 0:
                    m[r], m[i] = m[i], m[r]
                    continue
                u, v = a // g, b // g
                row_r = [x * p + y * q for p, q in zip(m[r], m[i])]
                row_i = [-v * p + u * q for p, q in zip(m[r], m[i])]
                m[r], m[i] = row_r, row_i
        if r < len(m) and m[r][c]:
            if m[r][c] < 0:
                m[r] = [-v for v in m[r]]
            for i in range(r):
                q = m[i][c] // m[r][c]
                if q:
                    m[i] = [p - q * s for p, s in zip(m[i], m[r])]
            r += 1
            if r == len(m):
                break
    return [row for row in m[:r] if any(row)]


def integer_kernel(M: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Hermite basis of {k ∈ Z^ncols : M·k = 0}."""
    nrows = len(M)
    if nrows == 0:
        return [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    aug = [[int(M[r][i]) for r in range(nrows)] + [1 if j == i else 0 for j in range(ncols)] for i in range(ncols)]
    # unimodular row reduction on the first nrows columns
    m = aug
    r = 0
    for c in range(nrows):
        for i in range(r + 1, len(m)):
            if m[i][c]:
                a, b = m[r][c], m[i][c]
                if a == 0:
                    m[r], m[i] = m[i], m[r]
                    continue
                g, x, y = _ext_gcd(a, b)
                u, v = a // g, b // g
                row_r = [x * p + y * q for p, q in zip(m[r], m[i])]
                row_i = [-v * p + u * q for p, q in zip(m[r], m[i])]
                m[r], m[i] = row_r, row_i
        if r < len(m) and m[r][c]:
            r += 1
    kernel = [row[nrows:] for row in m if not any(row[:nrows])]
    return hermite_rows(kernel, ncols)


@dataclass(frozen=True)
class RelationLattice:
    """Integer vectors k with Π λ_i^{k_i} = 1, given by a Hermite basis."""

    eigenvalues: tuple
    basis: tuple[tuple[int, ...], ...]

    def check(self) -> bool:
        for k in self.basis:
            v = mpq(1)
            for lam, e in zip(self.eigenvalues, k):
                v *= lam ** e
            if v != 1:
                return False
        return True


def eigen_relations(eigs: Sequence) -> RelationLattice:
    """Multiplicative relations among nonzero rationals, from prime exponents and sign parity."""
    eigs = tuple(mpq(e) for e in eigs)
    if any(e == 0 for e in eigs):
        raise InputError("zero eigenvalue has no multiplicative relations")
    m = len(eigs)
    factored = []
    primes: set = set()
    for lam in eigs:
        f = dict(factorint(int(abs(lam.numerator))))
        for p, e in factorint(int(lam.denominator)).items():
            f[p] = f.get(p, 0) - e
        f.pop(1, None)
        factored.append(f)
        primes |= set(f)
    M = [[factored[i].get(p, 0) for i in range(m)] for p in sorted(primes)]
    K = integer_kernel(M, m)
    neg = [i for i, lam in enumerate(eigs) if lam < 0]

    def parity(k):
        return sum(k[i] for i in neg) % 2

    odd = [k for k in K if parity(k)]
    if not odd:
        basis = K
    else:
        j = odd[0]
        basis = [k for k in K if not parity(k)]
        basis += [[a + b for a, b in zip(k, j)] for k in odd[1:]]
        basis.append([2 * a for a in j])
    basis = hermite_rows(basis, m) if basis else []
    return RelationLattice(eigs, tuple(tuple(k) for k in basis))


def saturate_lattice(basis: Sequence[Sequence[int]], m: int) -> list[list[int]]:
    """(Q·L) ∩ Z^m."""
    return integer_kernel(integer_kernel(basis, m), m) if basis else []


def orthogonal_lattice(basis: Sequence[Sequence[int]], m: int) -> list[list[int]]:
    return integer_kernel(basis, m)


# ---------------------------------------------------------------- cyclic closures


@dataclass
class CyclicData:
    """Identity component family of Zcl⟨a⟩ and the index of that component."""

    a: QMatrix
    identity: Family
    index: int
    order: int | None


def rational_eigenbasis(s: QMatrix) -> tuple[QMatrix, list] | None:
    """P and eigenvalues with s = P·diag·P⁻¹, when s is diagonalizable over Q."""
    n = s.n
    roots = rational_roots(charpoly(s))
    if sum(mult for _, mult in roots) != n:
        return None
    cols, eigs = [], []
    for lam, _ in sorted(roots, key=lambda t: t[0]):
        shifted = s - QMatrix.identity(n) * lam
        for v in linalg.nullspace(shifted.rows, n):
            cols.append(v)
            eigs.append(lam)
    if len(cols) != n:
        return None
    return QMatrix.from_columns(cols), eigs


def _torus_family(s: QMatrix) -> tuple[Family, list, list] | None:
    data = rational_eigenbasis(s)
    if data is None:
        return None
    P, eigs = data
    m = len(eigs)
    L = eigen_relations(eigs)
    perp = orthogonal_lattice([list(k) for k in L.basis], m) if L.basis else [
        [1 if i == j else 0 for j in range(m)] for i in range(m)
    ]
    d = len(perp)
    exps = [[perp[j][i] for j in range(d)] for i in range(m)]
    fam = Family.diagonal_torus(P, exps, d)
    sat = saturate_lattice([list(k) for k in L.basis], m)
    return fam, eigs, sat


def cyclic_data(a: QMatrix, rng: random.Random | None = None) -> CyclicData:
    """Identity component of Zcl⟨a⟩ as a family, with the number of components."""
    n = a.n
    if not a.is_invertible():
        raise InputError("cyclic closure needs an invertible matrix")
    order = finite_order(a)
    ident = Family.constant(QMatrix.identity(n))
    if order is not None:
        return CyclicData(a, ident, order, order)
    rng = rng or random.Random(0)
    L = order_bound(n)
    divisors = [d for d in range(1, L + 1) if L % d == 0]
    for m in divisors:
        b = a ** m
        s, u = jordan_chevalley(b)
        torus = _torus_family(s)
        if torus is None:
            continue
        fam, _, _ = torus
        if not u.is_identity():
            fam = fam @ Family.unipotent_line(exp_series(nilpotent_log(u)))
        piece = Piece.from_family(fam, rng)
        index = None
        power = QMatrix.identity(n)
        for j in range(1, 64 * m + 1):
            power = power @ a
            if piece.contains_point(power):
                index = j
                break
        if index is None:
            raise UnsupportedEigenvalues("could not determine the component index of a cyclic closure")
        return CyclicData(a, fam, index, None)
    raise UnsupportedEigenvalues("semisimple part has eigenvalues outside the supported scope")


# ---------------------------------------------------------------- results


@dataclass
class GLVariety:
    """A subvariety of GL_n given by an ideal over the n² entries and y = 1/det."""

    n: int
    ideal: Ideal

    @classmethod
    def from_matrix_ideal(cls, n: int, I: Ideal) -> "GLVariety":
        space = matrix_space(n, with_y=True)
        gens = [g.rename(space, list(range(n * n))) for g in I.generators]
        y = space.gens()[-1]
        gens.append(determinant(space, n) * y - 1)
        return cls(n, Ideal(space, gens))

    def matrix_ideal(self) -> Ideal:
        from .idealkit import eliminate

        small = eliminate(self.ideal, ["y"])
        return Ideal(matrix_space(self.n), [Polynomial(matrix_space(self.n), g.terms, _trusted=True) for g in small.generators])

    def contains_point(self, M: QMatrix) -> bool:
        d = M.det()
        if not d:
            return False
        return self.ideal.vanishes_at(list(M.flat()) + [1 / d])

    def contains_identity(self) -> bool:
        return self.contains_point(QMatrix.identity(self.n))


@dataclass
class ClosureResult:
    """Zcl⟨gens⟩ as cosets r_i·H of an irreducible normal subgroup H."""

    n: int
    status: str
    iterations: int
    identity_component: Piece
    cosets: list[Piece]
    representatives: list[QMatrix]
    _ideal: Ideal | None = field(default=None, repr=False)

    def matrix_ideal(self) -> Ideal:
        if self._ideal is None:
            space = matrix_space(self.n)
            ideals = [c.global_ideal(space) for c in self.cosets]
            result = ideals[0]
            for I in ideals[1:]:
                result = intersect(result, I)
            self._ideal = result
        return self._ideal

    @property
    def variety(self) -> GLVariety:
        return GLVariety.from_matrix_ideal(self.n, self.matrix_ideal())

    def contains_point(self, M: QMatrix) -> bool:
        return any(c.contains_point(M) for c in self.cosets)

    @property
    def exact(self) -> bool:
        return self.status == "exact"


def cyclic_closure(a: QMatrix, rng: random.Random | None = None) -> GLVariety:
    """Zcl⟨a⟩ as the union of the cosets a^j·C° for j below the component index."""
    rng = rng or random.Random(0)
    data = cyclic_data(a, rng)
    n = a.n
    space = matrix_space(n)
    result = None
    power = QMatrix.identity(n)
    for _ in range(data.index):
        F = data.identity.left(power)
        piece = Piece.point(power) if F.k == 0 else Piece.from_family(F, rng)
        I = piece.global_ideal(space)
        result = I if result is None else intersect(result, I)
        power = power @ a
    return GLVariety.from_matrix_ideal(n, result)


# ---------------------------------------------------------------- group closure


def _piece(F: Family, rng: random.Random) -> Piece:
    if F.k == 0:
        return Piece.point(F.evaluate([]))
    return Piece.from_family(F, rng)


def normal_irreducible_closure(gens: Sequence[QMatrix], Y, rng: random.Random, trace: list | None = None) -> Piece:
    """Smallest irreducible closed subgroup containing Zcl(Y) and normalized by ``gens``.

    ``Y`` is a family, or a list of families whose product is meant, and
    must pass through the identity.  Repeats H := Zcl(H · yHy⁻¹) for y among
    the generators and the identity until nothing changes.  Every candidate
    contains H and is irreducible, so it is larger exactly when its
    dimension is; the loop runs on parametrizations and equations are
    computed once, for the final group.
    """
    chain = FamilyChain([Y] if isinstance(Y, Family) else list(Y))
    n = chain.shape[0]
    chain, d = chain.compress(rng)
    conj = [(g, g.inverse()) for g in gens] + [(QMatrix.identity(n), QMatrix.identity(n))]
    changed = True
    while changed:
        changed = False
        for y, yinv in conj:
            cand = chain + chain.conjugate(y, yinv)
            if generic_rank(cand, rng)[0] <= d:
                continue
            chain, d = cand.compress(rng)
            changed = True
            if trace is not None:
                trace.append(d)
    return _piece(chain.expand(), rng)


def _power_in(H: Piece, w: QMatrix, bound: int) -> bool:
    power = w
    for _ in range(bound):
        if H.contains_point(power):
            return True
        power = power @ w
    return False


def group_closure(
    gens: Sequence[QMatrix],
    max_iter: int = 50,
    seed: int = 0,
    max_cosets: int = 5000,
) -> ClosureResult:
    """Zcl⟨gens⟩ for invertible rational matrices.

    Raises :class:`UnsupportedEigenvalues` when a needed cyclic closure has
    eigenvalues outside the rational / root-of-unity scope.  When the
    enlargement loop or the coset search exceeds its bound, the cosets found
    so far are returned with status ``lower-bound``.
    """
    gens = list(gens)
    if not gens:
        raise InputError("group closure needs at least one generator")
    n = gens[0].n
    for g in gens:
        if g.shape != (n, n) or not g.is_invertible():
            raise InputError("group closure needs invertible generators of one size")
    rng = random.Random(seed)
    ident = QMatrix.identity(n)
    seeds = [cyclic_data(g, rng).identity for g in gens]
    H = normal_irreducible_closure(gens, seeds, rng)
    power_bound = max(order_bound(n), 24)
    iterations = 0
    while True:
        iterations += 1
        reps = [ident]
        invs = [ident]
        queue = deque([ident])
        grow = None
        overflow = False
        while queue and grow is None and not overflow:
            r = queue.popleft()
            for g in gens:
                w = g @ r
                if any(H.contains_point(ri @ w) for ri in invs):
                    continue
                if not _power_in(H, w, power_bound):
                    cw = cyclic_data(w, rng).identity
                    if generic_rank(H.family @ cw, rng)[0] > H.dim:
                        grow = cw
                        break
                reps.append(w)
                invs.append(w.inverse())
                queue.append(w)
                if len(reps) > max_cosets:
                    overflow = True
                    break
        if grow is None:
            status = "lower-bound" if overflow else "exact"
            break
        if iterations >= max_iter:
            status = "lower-bound"
            break
        H = normal_irreducible_closure(gens, [H.family, grow], rng)
    cosets = [H if r.is_identity() else _translate(H, r, rng) for r in reps]
    return ClosureResult(n, status, iterations, H, cosets, reps)


def _translate(H: Piece, r: QMatrix, rng: random.Random) -> Piece:
    F = H.family.left(r)
    return Piece.point(F.evaluate([])) if F.k == 0 else Piece.from_family(F, rng)


# ---------------------------------------------------------------- ideal-level operations


def _gl_space(n: int) -> VarSpace:
    return matrix_space(n, with_y=True)


def _two_copies(n: int) -> tuple[VarSpace, list, list]:
    k = n * n + 1
    names = [f"a{i}" for i in range(k)] + [f"b{i}" for i in range(k)]
    big = VarSpace(names)
    return big, list(range(k)), list(range(k, 2 * k))


def _conjugated_product_map(n: int, y: QMatrix, big: VarSpace) -> list[Polynomial]:
    """Components of (A, B) ↦ A·(y B y⁻¹) in GL coordinates, y-coordinate the product of inverses."""
    g = big.gens()
    k = n * n + 1
    yinv = y.inverse()
    A = [[g[i * n + j] for j in range(n)] for i in range(n)]
    B = [[g[k + i * n + j] for j in range(n)] for i in range(n)]
    # C = y B y^{-1}
    C = [[sum((B[l][m] * (y[i, l] * yinv[m, j]) for l in range(n) for m in range(n) if y[i, l] and yinv[m, j]), big.zero())
          for j in range(n)] for i in range(n)]
    prod = [sum((A[i][l] * C[l][j] for l in range(n)), big.zero()) for i in range(n) for j in range(n)]
    prod.append(g[n * n] * g[k + n * n])
    return prod


def _gl_product_closure(H: Ideal, K: Ideal, n: int, y: QMatrix) -> tuple[bool, Ideal | None]:
    """Whether H·(yKy⁻¹) ⊆ V(H); otherwise the ideal of its closure."""
    big, ia, ib = _two_copies(n)
    src = [p.rename(big, ia) for p in H.generators] + [p.rename(big, ib) for p in K.generators]
    comps = _conjugated_product_map(n, y, big)
    base = Ideal(big, src)
    if all(not base.reduce(g.substitute(comps, big)) for g in H.gb()):
        return True, None
    space = _gl_space(n)
    img = image_closure(ConstructibleSet(big, (Cell.closed(base),)), PolyMap(big, space, tuple(comps)))
    return False, img


def fin_plus_irred_closure(a_list: Sequence[QMatrix], Y: GLVariety, max_rounds: int = 50) -> GLVariety:
    """Smallest closed subgroup containing Y and normalized by each a_i (ideal level).

    H := Y; repeat H := Zcl(H · yHy⁻¹) for y in (a_1, …, a_k, I) until stable.
    Products are image closures of the multiplication map; a substitution
    test detects stability without computing the image.
    """
    n = Y.n
    if not Y.contains_identity():
        raise InputError("the starting variety must contain the identity")
    for a in a_list:
        if not a.is_invertible():
            raise InputError("conjugating matrices must be invertible")
    H = Y.ideal
    ys = list(a_list) + [QMatrix.identity(n)]
    for _ in range(max_rounds):
        changed = False
        for y in ys:
            stable, img = _gl_product_closure(H, H, n, y)
            if not stable:
                if contains(H, img) and contains(img, H):
                    continue
                H = img
                changed = True
        if not changed:
            return GLVariety(n, H)
    raise RuntimeError("conjugation closure did not stabilize within the round bound")


def split_components(I: Ideal, depth: int = 0) -> list[Ideal]:
    """Split V(I) along factorable generators; irreducibility of the parts is then certified."""
    import sympy

    if I.is_unit():
        return []
    names = I.space.names
    syms = sympy.symbols(names)
    for g in I.gb():
        expr = _to_sympy(g, syms)
        _, factors = sympy.factor_list(expr, *syms)
        if len(factors) > 1 or (factors and factors[0][1] > 1):
            parts = []
            for fac, _ in factors:
                f = _from_sympy(fac, I.space, syms)
                parts.extend(split_components(I.with_generators([f]), depth + 1))
            return _dedupe(parts)
    return [I]


def _dedupe(parts: list[Ideal]) -> list[Ideal]:
    out: list[Ideal] = []
    for P in parts:
        if any(all(radical_member(P, g) for g in Q.generators) for Q in out):
            continue  # V(P) ⊆ V(Q)
        out = [Q for Q in out if not all(radical_member(Q, g) for g in P.generators)]
        out.append(P)
    return out


def _to_sympy(p: Polynomial, syms):
    import sympy

    total = 0
    for m, c in p.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for s, e in zip(syms, m):
            if e:
                term *= s ** e
        total += term
    return total


def _from_sympy(expr, space: VarSpace, syms) -> Polynomial:
    import sympy

    poly = sympy.Poly(expr, *syms)
    terms = {}
    for mono, c in poly.terms():
        c = sympy.Rational(c)
        terms[tuple(mono)] = mpq(int(c.p), int(c.q))
    return Polynomial(space, terms)


def certified_irreducible(I: Ideal, n: int) -> bool:
    """Irreducibility for an affine subspace, or a hypersurface in one with a smooth rational point."""
    piece = Piece.from_ideal(I, (n, n))
    if piece.J is None:
        return True
    gens = piece.J.gb()
    if len(gens) != 1:
        return False
    f = gens[0]
    parts = split_components(Ideal(piece.J.space, [f]))
    if len(parts) != 1:
        return False
    # a Q-irreducible polynomial with a smooth rational zero is absolutely irreducible
    chart = piece.J.space
    try:
        pt = witness_point(ConstructibleSet(chart, (Cell(Ideal(chart, [f]), Ideal(chart, [f.derivative(i) for i in range(len(chart))])),)))
    except Exception:
        return False
    return pt is not None


def constructible_group_closure(A: ConstructibleSet, n: int, seed: int = 0, max_iter: int = 50) -> ClosureResult | GLVariety:
    """Zcl⟨A⟩ for a constructible set of invertible n×n matrices.

    Components X_i of Zcl(A) get witness points a_i ∈ A ∩ X_i; the
    translates Y_i = a_i⁻¹X_i are irreducible and contain I, their product
    closure Y is normalized up by the a_i, and the result is Zcl(G·H) with
    G = Zcl⟨a_1, …, a_k⟩ and H the conjugation closure of Y.
    """
    space = A.space
    if space != matrix_space(n):
        raise InputError("constructible generators must be given over plain matrix coordinates")
    det = determinant(space, n)
    comps: list[Ideal] = []
    for c in A.cells:
        comps.extend(split_components(cell_closure(c)))
    comps = _dedupe(comps)
    for X in comps:
        if dimension(X) > 0 and not certified_irreducible(X, n):
            raise ComponentSplitIncomplete("could not certify that a component is irreducible")
    witnesses = []
    for X in comps:
        inv_part = ConstructibleSet(space, (Cell(X, Ideal(space, [det])),))
        pt = witness_point(boolean(A, inv_part, "intersect"), seed=seed)
        witnesses.append(QMatrix.from_flat(pt, n))
    if all(dimension(X) == 0 for X in comps):
        return group_closure(witnesses, max_iter=max_iter, seed=seed)
    G = group_closure(witnesses, max_iter=max_iter, seed=seed)
    ys = []
    for X, a in zip(comps, witnesses):
        # q ∈ a⁻¹X  ⟺  a·q ∈ X
        ent = space.gens()
        aq = [sum((ent[l * n + j] * a[i, l] for l in range(n) if a[i, l]), space.zero()) for i in range(n) for j in range(n)]
        ys.append(GLVariety.from_matrix_ideal(n, Ideal(space, [g.substitute(aq, space) for g in X.generators])))
    Y = ys[0]
    for Yi in ys[1:]:
        _, img = _gl_product_closure(Y.ideal, Yi.ideal, n, QMatrix.identity(n))
        Y = GLVariety(n, img) if img is not None else Y
    H = fin_plus_irred_closure(witnesses, Y)
    # Zcl(G·H) = ∪ r_i · Zcl(G°·H)
    G0 = GLVariety.from_matrix_ideal(n, G.identity_component.global_ideal(space))
    stable, img = _gl_product_closure(G0.ideal, H.ideal, n, QMatrix.identity(n))
    core = H.ideal if stable else img
    gl = _gl_space(n)
    result = None
    for r in G.representatives:
        rinv = r.inverse()
        ent = gl.gens()
        rq = [sum((ent[l * n + j] * rinv[i, l] for l in range(n) if rinv[i, l]), gl.zero()) for i in range(n) for j in range(n)]
        rq.append(ent[n * n] * r.det())
        moved = Ideal(gl, [g.substitute(rq, gl) for g in core.generators])
        result = moved if result is None else intersect(result, moved)
    return GLVariety(n, result)
