"""Parametrized matrix families and the irreducible closed pieces they define.

A :class:`Family` is a matrix of Laurent polynomials X(τ) = Σ_m C_m τ^m in k
parameters.  Its image over the torus (C*)^k is irreducible, so the Zariski
closure of the image is an irreducible variety.  A :class:`Piece` stores that
closure in an affine chart: the affine hull of the image is
``origin + span(dirs)`` with ``dirs`` in reduced echelon form, the chart
coordinates of a matrix are its entries at the pivot positions, and a prime
ideal ``J`` in those chart coordinates cuts the piece out of its hull.

Working in the chart keeps every Groebner computation small even when the
ambient matrix space has dozens of coordinates.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import linalg
from .idealkit import Ideal, degree_truncate, eliminate, monomials_up_to, radical_member
from .matgeom import QMatrix
from .polycore import Polynomial, VarSpace

_ZERO = mpq(0)
_ONE = mpq(1)

# ---------------------------------------------------------------- Laurent polynomials
# A Laurent polynomial is a dict {exponent tuple (ints, possibly negative): mpq}.


def lp_add_into(acc: dict, other: dict, scale=_ONE):
    for m, c in other.items():
        v = acc.get(m, _ZERO) + c * scale
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)


def lp_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            v = out.get(m, _ZERO) + ca * cb
            if v:
                out[m] = v
            else:
                del out[m]
    return out


def lp_substitute(p: Polynomial, images: Sequence[dict], k: int) -> dict:
    """p(images) as a Laurent polynomial in k parameters."""
    powers: dict = {}
    total: dict = {}
    one = {(0,) * k: _ONE}
    for m, c in p.terms.items():
        acc = {(0,) * k: c}
        for i, e in enumerate(m):
            if not e:
                continue
            key = (i, e)
            pw = powers.get(key)
            if pw is None:
                pw = one
                base = images[i]
                for _ in range(e):
                    pw = lp_mul(pw, base)
                powers[key] = pw
            acc = lp_mul(acc, pw)
            if not acc:
                break
        lp_add_into(total, acc)
    return total


def _mono_value(m: tuple, point: Sequence):
    v = _ONE
    for x, e in zip(point, m):
        if e:
            v *= x ** e
    return v


# ---------------------------------------------------------------- families


class Family:
    """X(τ) = Σ_m C_m τ^m with C_m stored as flat row-major tuples."""

    __slots__ = ("shape", "k", "terms")

    def __init__(self, shape: tuple[int, int], k: int, terms: dict):
        self.shape = shape
        self.k = k
        self.terms = {m: c for m, c in terms.items() if any(c)}

    # -- constructors
    @classmethod
    def constant(cls, M: QMatrix) -> "Family":
        return cls(M.shape, 0, {(): M.flat()})

    @classmethod
    def diagonal_torus(cls, P: QMatrix, exponents: Sequence[Sequence[int]], k: int) -> "Family":
        """τ ↦ P · diag(τ^{b_1}, …, τ^{b_n}) · P⁻¹, b_i ∈ Z^k."""
        n = P.n
        Pinv = P.inverse()
        groups: dict = {}
        for i, b in enumerate(exponents):
            groups.setdefault(tuple(b), []).append(i)
        terms = {}
        for b, idx in groups.items():
            D = QMatrix.diag([_ONE if i in idx else _ZERO for i in range(n)])
            terms[b] = (P @ D @ Pinv).flat()
        return cls((n, n), k, terms)

    @classmethod
    def unipotent_line(cls, coeffs: Sequence[QMatrix]) -> "Family":
        """τ ↦ Σ_j coeffs[j] τ^j (the series of exp(τ·N))."""
        n = coeffs[0].n
        return cls((n, n), 1, {(j,): C.flat() for j, C in enumerate(coeffs)})

    # -- algebra
    def __matmul__(self, other: "Family") -> "Family":
        r, s = self.shape
        s2, t = other.shape
        if s != s2:
            raise ValueError("family shapes do not match")
        mats_b = {m: [c[i * t:(i + 1) * t] for i in range(s2)] for m, c in other.terms.items()}
        terms: dict = {}
        for ma, ca in self.terms.items():
            rows_a = [ca[i * s:(i + 1) * s] for i in range(r)]
            for mb, rows_b in mats_b.items():
                prod = []
                for ra in rows_a:
                    for j in range(t):
                        acc = _ZERO
                        for l in range(s):
                            x = ra[l]
                            if x:
                                y = rows_b[l][j]
                                if y:
                                    acc += x * y
                        prod.append(acc)
                m = ma + mb
                old = terms.get(m)
                terms[m] = tuple(prod) if old is None else tuple(a + b for a, b in zip(old, prod))
        return Family((r, t), self.k + other.k, terms)

    def left(self, M: QMatrix) -> "Family":
        return Family.constant(M) @ self

    def right(self, M: QMatrix) -> "Family":
        return self @ Family.constant(M)

    def evaluate(self, point: Sequence) -> QMatrix:
        r, c = self.shape
        acc = [_ZERO] * (r * c)
        for m, C in self.terms.items():
            v = _mono_value(m, point)
            for i, x in enumerate(C):
                if x:
                    acc[i] += v * x
        return QMatrix.from_flat(acc, r, c)

    def entry(self, idx: int) -> dict:
        return {m: C[idx] for m, C in self.terms.items() if C[idx]}

    def jacobian_rows(self, point: Sequence) -> list[list]:
        """Row i is ∂X/∂τ_i at ``point`` (flattened); coordinates must be nonzero."""
        size = self.shape[0] * self.shape[1]
        rows = [[_ZERO] * size for _ in range(self.k)]
        inv = [1 / mpq(p) for p in point]
        for m, C in self.terms.items():
            v = _mono_value(m, point)
            nz = [(j, x) for j, x in enumerate(C) if x]
            for i, e in enumerate(m):
                if not e:
                    continue
                w = e * v * inv[i]
                row = rows[i]
                for j, x in nz:
                    row[j] += w * x
        return rows

    def specialize(self, keep: Sequence[int], values: Sequence) -> "Family":
        """Fix every parameter not in ``keep`` to ``values[i]``."""
        keep = list(keep)
        fixed = [i for i in range(self.k) if i not in keep]
        terms: dict = {}
        for m, C in self.terms.items():
            v = _ONE
            for i in fixed:
                if m[i]:
                    v *= values[i] ** m[i]
            key = tuple(m[i] for i in keep)
            old = terms.get(key)
            scaled = tuple(x * v for x in C)
            terms[key] = scaled if old is None else tuple(a + b for a, b in zip(old, scaled))
        return Family(self.shape, len(keep), terms)


def random_point(rng: random.Random, k: int) -> list:
    return [mpq(rng.choice((-1, 1)) * rng.randint(2, 60), rng.randint(1, 7)) for _ in range(k)]


def generic_rank(F, rng: random.Random) -> tuple[int, list[int], list]:
    """Jacobian rank at random points, independent parameters, and the point used."""
    if F.k == 0:
        return 0, [], []
    best = (-1, [], [])
    for _ in range(2):
        pt = random_point(rng, F.k)
        chosen, _ = _independent_rows(F.jacobian_rows(pt))
        if len(chosen) > best[0]:
            best = (len(chosen), chosen, pt)
    return best


def _small_point(F, chosen: list[int], d: int, rng: random.Random) -> list | None:
    """Small parameter values at which the chosen parameters stay independent."""
    for attempt in range(24):
        if attempt == 0:
            pt = [mpq(1)] * F.k
        else:
            pt = [mpq(rng.choice((-3, -2, -1, 2, 3))) for _ in range(F.k)]
        rows = F.jacobian_rows(pt)
        if linalg.rank([rows[i] for i in chosen]) == d:
            return pt
    return None


def compress(F: Family, rng: random.Random) -> tuple[Family, int]:
    """An equivalent family (same image closure) with exactly dim-many parameters."""
    d, chosen, pt = generic_rank(F, rng)
    if d == F.k:
        return F, d
    small = _small_point(F, chosen, d, rng)
    return F.specialize(chosen, small if small is not None else pt), d


class FamilyChain:
    """A product X_1(τ_1)⋯X_s(τ_s) of families kept unexpanded.

    Expanding long products multiplies term counts, so ranks and
    compression work factor by factor through the product rule.
    """

    def __init__(self, factors: Sequence[Family]):
        out: list[Family] = []
        for F in factors:
            if F.k == 0 and out and out[-1].k == 0:
                out[-1] = out[-1] @ F
            else:
                out.append(F)
        self.factors = out
        self.shape = (out[0].shape[0], out[-1].shape[1])
        self.k = sum(F.k for F in out)

    def __add__(self, other: "FamilyChain") -> "FamilyChain":
        return FamilyChain(self.factors + other.factors)

    def conjugate(self, y: QMatrix, yinv: QMatrix) -> "FamilyChain":
        return FamilyChain([F.left(y).right(yinv) for F in self.factors])

    def _split(self, point: Sequence) -> list[list]:
        out, i = [], 0
        for F in self.factors:
            out.append(list(point[i:i + F.k]))
            i += F.k
        return out

    def jacobian_rows(self, point: Sequence) -> list[list]:
        parts = self._split(point)
        values = [F.evaluate(p) for F, p in zip(self.factors, parts)]
        s = len(values)
        prefix = [None] * s
        suffix = [None] * s
        acc = None
        for i in range(s):
            prefix[i] = acc
            acc = values[i] if acc is None else acc @ values[i]
        acc = None
        for i in reversed(range(s)):
            suffix[i] = acc
            acc = values[i] if acc is None else values[i] @ acc
        rows = []
        for i, (F, p) in enumerate(zip(self.factors, parts)):
            if not F.k:
                continue
            r, c = F.shape
            for row in F.jacobian_rows(p):
                D = QMatrix.from_flat(row, r, c)
                if prefix[i] is not None:
                    D = prefix[i] @ D
                if suffix[i] is not None:
                    D = D @ suffix[i]
                rows.append(list(D.flat()))
        return rows

    def compress(self, rng: random.Random) -> tuple["FamilyChain", int]:
        d, chosen, pt = generic_rank(self, rng)
        if d == self.k:
            return self, d
        small = _small_point(self, chosen, d, rng)
        values = small if small is not None else pt
        keep = set(chosen)
        out, i = [], 0
        for F in self.factors:
            local = [j for j in range(F.k) if i + j in keep]
            vals = values[i:i + F.k]
            out.append(F if len(local) == F.k else F.specialize(local, vals))
            i += F.k
        return FamilyChain(out), d

    def expand(self) -> Family:
        acc = self.factors[0]
        for F in self.factors[1:]:
            acc = acc @ F
        return acc


def _independent_rows(rows: list[list]) -> tuple[list[int], list[list]]:
    chosen, basis = [], []
    for i, row in enumerate(rows):
        if linalg.rank(basis + [row]) > len(basis):
            basis.append(row)
            chosen.append(i)
    return chosen, basis


# ---------------------------------------------------------------- pieces


class Piece:
    """An irreducible closed subset of rows×cols matrices (see module docstring).

    ``family`` is a dominant parametrization, when known.  Pieces built from
    ideals alone have ``family = None`` and a ``J`` that need not be prime.
    """

    __slots__ = ("shape", "origin", "dirs", "pivots", "J", "family", "dim", "prime", "_global", "_tag")

    def __init__(self, shape, origin, dirs, pivots, J, family, dim, prime=True):
        self.shape = shape
        self.origin = tuple(origin)
        self.dirs = tuple(tuple(d) for d in dirs)
        self.pivots = tuple(pivots)
        self.J = J  # Ideal over chart coordinates, or None when the piece fills its hull
        self.family = family
        self.dim = dim
        self.prime = prime
        self._global = None
        self._tag = None

    # -- construction
    @classmethod
    def point(cls, M: QMatrix) -> "Piece":
        return cls(M.shape, M.flat(), [], [], None, Family.constant(M), 0)

    @classmethod
    def from_family(cls, F: Family, rng: random.Random, degree_cap: int = 8) -> "Piece":
        F, d = compress(F, rng)
        size = F.shape[0] * F.shape[1]
        zero = tuple([_ZERO] * size)
        c0 = F.terms.get((0,) * F.k, zero)
        vecs = [list(C) for m, C in F.terms.items() if any(m)]
        dirs, pivots = linalg.rref(vecs, size) if vecs else ([], [])
        origin = list(c0)
        for dvec, p in zip(dirs, pivots):
            c = origin[p]
            if c:
                origin = [a - c * b for a, b in zip(origin, dvec)]
        h = len(dirs)
        J = None
        if d < h:
            J = _implicitize(F, pivots, h, d, degree_cap)
        return cls(F.shape, origin, dirs, pivots, J, F, d)

    @classmethod
    def from_ideal(cls, ideal: Ideal, shape: tuple[int, int]) -> "Piece":
        """A piece known only by a global ideal over matrix coordinates (no parametrization)."""
        size = shape[0] * shape[1]
        space = ideal.space
        basis = ideal.gb()
        if basis and basis[0].is_constant():
            raise ValueError("empty piece")
        # affine part: linear members of the ideal
        lin = degree_truncate(ideal, 1)
        rows = []
        for p in lin:
            row = [_ZERO] * (size + 1)
            for m, c in p.terms.items():
                if any(m):
                    row[m.index(1)] = c
                else:
                    row[size] = c
            rows.append(row)
        # hull = solutions of rows·(x,1) = 0
        if rows:
            red, piv = linalg.rref(rows, size + 1)
            free = [j for j in range(size) if j not in piv]
        else:
            red, piv, free = [], [], list(range(size))
        origin = [_ZERO] * size
        for row, p in zip(red, piv):
            origin[p] = -row[size]
        dirs = []
        for f in free:
            v = [_ZERO] * size
            v[f] = _ONE
            for row, p in zip(red, piv):
                v[p] = -row[f]
            dirs.append(v)
        dirs, pivots = linalg.rref(dirs, size) if dirs else ([], [])
        origin_red = list(origin)
        for dvec, p in zip(dirs, pivots):
            c = origin_red[p]
            if c:
                origin_red = [a - c * b for a, b in zip(origin_red, dvec)]
        h = len(dirs)
        J = None
        dim = 0
        if h:
            chart = chart_space(h)
            images = []
            for q in range(size):
                poly = chart.const(origin_red[q])
                for j, dvec in enumerate(dirs):
                    if dvec[q]:
                        poly = poly + chart.gens()[j] * dvec[q]
                images.append(poly)
            gens = [g.substitute(images, chart) for g in basis]
            Jc = Ideal(chart, gens)
            from .idealkit import dimension

            dim = dimension(Jc)
            J = Jc if not Jc.is_zero() else None
        family = Family.constant(QMatrix.from_flat(origin_red, *shape)) if h == 0 else None
        piece = cls(shape, origin_red, dirs, pivots, J, family, dim, prime=False)
        piece._global = ideal
        return piece

    # -- queries
    @property
    def hull_dim(self) -> int:
        return len(self.dirs)

    def is_point(self) -> bool:
        return not self.dirs

    def as_point(self) -> QMatrix:
        return QMatrix.from_flat(self.origin, *self.shape)

    def chart_coords(self, flat: Sequence) -> list | None:
        """Chart coordinates of a flat matrix, or None when it is off the affine hull."""
        z = [flat[p] for p in self.pivots]
        for q in range(len(flat)):
            v = self.origin[q]
            for zj, dvec in zip(z, self.dirs):
                if dvec[q]:
                    v += zj * dvec[q]
            if v != flat[q]:
                return None
        return z

    def contains_point(self, M: QMatrix) -> bool:
        z = self.chart_coords(M.flat())
        if z is None:
            return False
        return self.J is None or self.J.vanishes_at(z)

    def in_hull(self, vec: Sequence, affine: bool) -> bool:
        """Whether a direction (affine=False) or point (affine=True) lies in the hull."""
        base = self.origin if affine else [_ZERO] * len(vec)
        diff = [a - b for a, b in zip(vec, base)]
        for dvec, p in zip(self.dirs, self.pivots):
            c = diff[p]
            if c:
                diff = [a - c * b for a, b in zip(diff, dvec)]
        return not any(diff)

    def witness(self, point: Sequence | None = None) -> QMatrix:
        if self.family is None:
            raise ValueError("piece has no parametrization")
        if point is None:
            point = [_ONE] * self.family.k
        return self.family.evaluate(point)

    def rank(self, rng: random.Random) -> int:
        if self.family is None:
            raise ValueError("piece has no parametrization")
        return self.family.evaluate(random_point(rng, self.family.k)).rank()

    def contains(self, other: "Piece", rng: random.Random) -> bool:
        """other ⊆ self."""
        if other.shape != self.shape:
            return False
        if other.dim > self.dim:
            return False
        if not self.in_hull(other.origin, True) or not all(self.in_hull(d, False) for d in other.dirs):
            return False
        if other.family is not None:
            return self.contains_family(other.family, rng)
        if self.J is None:
            return True
        # other known only implicitly: compare through its chart
        if other.J is None and other.hull_dim == 0:
            return self.contains_point(other.as_point())
        h = other.hull_dim
        chart = chart_space(h) if h else None
        images = []
        for p in self.pivots:
            poly = chart.const(other.origin[p])
            for j, dvec in enumerate(other.dirs):
                if dvec[p]:
                    poly = poly + chart.gens()[j] * dvec[p]
            images.append(poly)
        base = other.J if other.J is not None else Ideal.zero(chart)
        for g in self.J.generators:
            img = g.substitute(images, chart)
            if other.prime:
                if base.reduce(img):
                    return False
            elif not radical_member(base, img):
                return False
        return True

    def contains_family(self, F: Family, rng: random.Random) -> bool:
        """Whether every F(τ) lies on this piece (exact, by substitution)."""
        size = len(self.origin)
        c0 = F.terms.get((0,) * F.k, (_ZERO,) * size)
        if not self.in_hull(c0, True):
            return False
        if not all(self.in_hull(C, False) for m, C in F.terms.items() if any(m)):
            return False
        if self.J is None:
            return True
        for _ in range(2):
            if not self.contains_point(F.evaluate(random_point(rng, F.k))):
                return False
        images = [F.entry(p) for p in self.pivots]
        return all(not lp_substitute(g, images, F.k) for g in self.J.generators)

    # -- global description
    def global_ideal(self, space: VarSpace) -> Ideal:
        if self._global is not None and self._global.space == space:
            return self._global
        size = len(self.origin)
        xs = space.gens()[:size]
        gens = []
        piv = set(self.pivots)
        for q in range(size):
            if q in piv:
                continue
            poly = xs[q] - self.origin[q]
            for dvec, p in zip(self.dirs, self.pivots):
                if dvec[q]:
                    poly = poly - xs[p] * dvec[q]
            if poly:
                gens.append(poly)
        if self.J is not None:
            images = [xs[p] for p in self.pivots]
            gens += [g.substitute(images, space) for g in self.J.generators]
        ideal = Ideal(space, gens)
        self._global = ideal
        return ideal


def chart_space(h: int) -> VarSpace:
    return VarSpace([f"z{j}" for j in range(h)])


# ---------------------------------------------------------------- implicitization


def _implicitize(F: Family, pivots: Sequence[int], h: int, d: int, degree_cap: int) -> Ideal:
    """Prime ideal of the closure of the image of F in chart coordinates."""
    chart = chart_space(h)
    images = [F.entry(p) for p in pivots]
    if h - d == 1:
        f = _hypersurface(images, F.k, chart, degree_cap)
        if f is not None:
            return Ideal(chart, [f])
    return _eliminate_params(images, F.k, chart)


def _hypersurface(images, k, chart, degree_cap) -> Polynomial | None:
    """Lowest-degree polynomial vanishing on the image, exact for a hypersurface.

    The vanishing ideal of an irreducible hypersurface is principal, generated
    by its irreducible equation, and every nonzero member of lowest degree
    is a scalar multiple of that equation.
    """
    h = len(chart)
    rng = random.Random(7919)
    for D in range(1, degree_cap + 1):
        monos = monomials_up_to(h, D)
        if len(monos) > 3000:
            return None
        samples = len(monos) + 8
        rows = []
        for _ in range(samples):
            pt = random_point(rng, k)
            vals = [sum((c * _mono_value(m, pt) for m, c in img.items()), _ZERO) for img in images]
            rows.append([_mono_value(m, vals) for m in monos])
        kernel = linalg.nullspace(rows, len(monos))
        if not kernel:
            continue
        f = Polynomial(chart, {monos[j]: v for j, v in enumerate(kernel[-1]) if v}).monic()
        if len(kernel) == 1 and not lp_substitute(f, images, k):
            return f
        return None
    return None


def _eliminate_params(images, k, chart) -> Ideal:
    h = len(chart)
    neg = sorted({i for img in images for m in img for i, e in enumerate(m) if e < 0})
    names = [f"t{i}" for i in range(k)] + [f"s{i}" for i in neg] + list(chart.names)
    big = VarSpace(names)
    gens = big.gens()
    sigma_index = {i: k + j for j, i in enumerate(neg)}
    off = k + len(neg)
    polys = []
    for j, img in enumerate(images):
        terms: dict = {}
        for m, c in img.items():
            e = [0] * len(names)
            for i, x in enumerate(m):
                if x > 0:
                    e[i] = x
                elif x < 0:
                    e[sigma_index[i]] = -x
            terms[tuple(e)] = c
        polys.append(gens[off + j] - Polynomial(big, terms))
    for i in neg:
        polys.append(gens[i] * gens[sigma_index[i]] - 1)
    J = eliminate(Ideal(big, polys), list(range(off)))
    return Ideal(chart, [Polynomial(chart, g.terms, _trusted=True) for g in J.generators])


# ---------------------------------------------------------------- piece algebra


def piece_product(P: Piece, Q: Piece, rng: random.Random) -> Piece:
    if P.family is not None and Q.family is not None:
        if P.is_point() and Q.is_point():
            return Piece.point(P.as_point() @ Q.as_point())
        return Piece.from_family(P.family @ Q.family, rng)
    return _implicit_product(P, Q)


def _implicit_product(P: Piece, Q: Piece) -> Piece:
    from .constructible import Cell, ConstructibleSet, PolyMap, image_closure, matrix_space

    n = P.shape[0]
    space = matrix_space(n)
    src_names = [f"a_{i}" for i in range(n * n)] + [f"b_{i}" for i in range(n * n)]
    src = VarSpace(src_names)
    g = src.gens()
    IP = P.global_ideal(space)
    IQ = Q.global_ideal(space)
    gens = [p.rename(src, list(range(n * n))) for p in IP.generators]
    gens += [p.rename(src, list(range(n * n, 2 * n * n))) for p in IQ.generators]
    comps = []
    for i in range(n):
        for j in range(n):
            comps.append(sum((g[i * n + l] * g[n * n + l * n + j] for l in range(n)), src.zero()))
    S = ConstructibleSet(src, (Cell.closed(Ideal(src, gens)),))
    img = image_closure(S, PolyMap(src, space, tuple(comps)))
    return Piece.from_ideal(img, P.shape)


def conjugate(P: Piece, y: QMatrix, yinv: QMatrix, rng: random.Random) -> Piece:
    return Piece.from_family(P.family.left(y).right(yinv), rng)


def translate(P: Piece, left: QMatrix | None, right: QMatrix | None, rng: random.Random) -> Piece:
    F = P.family
    if left is not None:
        F = F.left(left)
    if right is not None:
        F = F.right(right)
    if F.k == 0:
        return Piece.point(F.evaluate([]))
    return Piece.from_family(F, rng)


def union_contains(pieces: Iterable[Piece], P: Piece, rng: random.Random) -> bool:
    return any(R.contains(P, rng) for R in pieces)


def add_maximal(pieces: list[Piece], P: Piece, rng: random.Random) -> bool:
    """Add P unless already covered; drop pieces it covers.  Returns True if added."""
    if union_contains(pieces, P, rng):
        return False
    pieces[:] = [R for R in pieces if not P.contains(R, rng)]
    pieces.append(P)
    return True
