"""Exact matrix geometry over Q.

Matrices are immutable tuples of ``mpq`` rows.  Subspaces of Q^n carry the
reduced row echelon form of a spanning set, so equal subspaces compare and
hash equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce as _fold
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from gmpy2 import mpq

from . import linalg
from .errors import InputError
from .idealkit import Ideal
from .polycore import Polynomial, Q, VarSpace, qstr

_ZERO = mpq(0)
_ONE = mpq(1)


class QMatrix:
    """An exact rational matrix (usually square)."""

    __slots__ = ("rows", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(Q(v) for v in r) for r in rows)
        if rows and len({len(r) for r in rows}) != 1:
            raise InputError("ragged matrix rows")
        self.rows = rows
        self._hash = None

    # -- constructors
    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[_ONE if i == j else _ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, n: int, m: int | None = None) -> "QMatrix":
        return cls([[_ZERO] * (n if m is None else m) for _ in range(n)])

    @classmethod
    def diag(cls, values: Sequence) -> "QMatrix":
        n = len(values)
        return cls([[Q(values[i]) if i == j else _ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_flat(cls, flat: Sequence, n: int, m: int | None = None) -> "QMatrix":
        m = n if m is None else m
        return cls([flat[i * m:(i + 1) * m] for i in range(n)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "QMatrix":
        return cls(list(zip(*cols)))

    # -- shape
    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def is_square(self) -> bool:
        r, c = self.shape
        return r == c

    def flat(self) -> tuple:
        return tuple(v for r in self.rows for v in r)

    def columns(self) -> list[tuple]:
        return list(zip(*self.rows))

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    # -- protocol
    def __eq__(self, other):
        return isinstance(other, QMatrix) and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        return "QMatrix(" + repr([[qstr(v) for v in r] for r in self.rows]) + ")"

    def to_text(self) -> list[list[str]]:
        return [[qstr(v) for v in r] for r in self.rows]

    # -- arithmetic
    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.shape[1] != other.shape[0]:
            raise InputError("matrix shapes do not match for multiplication")
        cols = other.columns()
        return QMatrix([[sum((a * b for a, b in zip(r, c)), _ZERO) for c in cols] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, QMatrix):
            return self @ other
        c = Q(other)
        return QMatrix([[v * c for v in r] for r in self.rows])

    __rmul__ = __mul__

    def __add__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        return QMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return self * -1

    def apply(self, v: Sequence) -> tuple:
        return tuple(sum((a * Q(b) for a, b in zip(r, v)), _ZERO) for r in self.rows)

    def transpose(self) -> "QMatrix":
        return QMatrix(self.columns())

    def det(self):
        return linalg.det(self.rows)

    def rank(self) -> int:
        return linalg.rank(self.rows)

    def is_invertible(self) -> bool:
        return self.is_square() and self.det() != 0

    def inverse(self) -> "QMatrix":
        n = self.n
        sol = linalg.solve(self.rows, QMatrix.identity(n).rows)
        if sol is None or not self.is_invertible():
            raise InputError("matrix is singular")
        return QMatrix(sol)

    def __pow__(self, k: int) -> "QMatrix":
        if k < 0:
            return self.inverse() ** (-k)
        result = QMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    def is_zero(self) -> bool:
        return all(not v for r in self.rows for v in r)

    def is_identity(self) -> bool:
        return self == QMatrix.identity(self.n)

    def block(self, rows: Sequence[int], cols: Sequence[int]) -> "QMatrix":
        return QMatrix([[self.rows[i][j] for j in cols] for i in rows])


# ---------------------------------------------------------------- subspaces


class Subspace:
    """A subspace of Q^ambient with a canonical reduced echelon basis."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, vectors: Iterable[Sequence] = ()):
        vecs = [list(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient:
                raise InputError("vector does not fit the ambient dimension")
        red, piv = linalg.rref(vecs, ambient) if vecs else ([], [])
        self.ambient = ambient
        self.basis = tuple(tuple(r) for r in red)
        self.pivots = tuple(piv)

    @classmethod
    def span(cls, ambient: int, vectors: Iterable[Sequence]) -> "Subspace":
        return cls(ambient, vectors)

    @classmethod
    def coordinate(cls, ambient: int, indices: Iterable[int]) -> "Subspace":
        return cls(ambient, [[_ONE if j == i else _ZERO for j in range(ambient)] for i in indices])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        return isinstance(other, Subspace) and self.ambient == other.ambient and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def __repr__(self):
        return f"Subspace({self.ambient}, {[[qstr(v) for v in r] for r in self.basis]})"

    def __lt__(self, other):  # deterministic ordering of graph vertices
        return (self.dim, self.basis) < (other.dim, other.basis)

    def contains(self, v: Sequence) -> bool:
        return linalg.rank(list(self.basis) + [list(v)]) == self.dim

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def basis_matrix(self) -> QMatrix:
        """Basis vectors as columns (ambient × dim)."""
        return QMatrix.from_columns(self.basis) if self.basis else QMatrix([[] for _ in range(self.ambient)])

    def intersection_dim(self, other: "Subspace") -> int:
        return self.dim + other.dim - linalg.rank(list(self.basis) + list(other.basis))


def space_data(a: QMatrix) -> tuple[int, Subspace, Subspace]:
    """(rank, kernel, image) by exact elimination."""
    n, m = a.shape
    kernel = linalg.nullspace(a.rows, m)
    red, piv = linalg.rref(a.rows, m)
    image = Subspace(n, [[a.rows[i][j] for i in range(n)] for j in piv])
    return len(piv), Subspace(m, kernel), image


def kernel(a: QMatrix) -> Subspace:
    return space_data(a)[1]


def image(a: QMatrix) -> Subspace:
    return space_data(a)[2]


# ---------------------------------------------------------------- exterior algebra


@dataclass(frozen=True)
class WedgeVector:
    grade: int
    ambient: int
    coords: tuple  # indexed by r-subsets of range(ambient), lexicographic

    def subsets(self) -> list[tuple]:
        return list(combinations(range(self.ambient), self.grade))

    def is_zero(self) -> bool:
        return not any(self.coords)


def plucker(W: Subspace) -> WedgeVector:
    """The r×r minors of the canonical basis (rows), one per column subset."""
    r = W.dim
    if r < 1:
        raise InputError("Plücker coordinates need a nonzero subspace")
    rows = [list(v) for v in W.basis]
    coords = tuple(linalg.det([[row[j] for j in cols] for row in rows]) for cols in combinations(range(W.ambient), r))
    return WedgeVector(r, W.ambient, coords)


def _perm_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def wedge_top(p: WedgeVector, q: WedgeVector):
    """The coefficient of ι(U) ∧ ι(V) on e_1∧…∧e_n when the grades add to n."""
    n = p.ambient
    if p.grade + q.grade != n or q.ambient != n:
        raise InputError("grades must add up to the ambient dimension")
    qindex = {s: c for s, c in zip(q.subsets(), q.coords)}
    total = _ZERO
    for s, c in zip(p.subsets(), p.coords):
        if not c:
            continue
        rest = tuple(i for i in range(n) if i not in s)
        total += _perm_sign(s + rest) * c * qindex[rest]
    return total


def transversal(U: Subspace, V: Subspace) -> bool:
    """U ∩ V = 0 for complementary dimensions, via the determinant of stacked bases."""
    if U.ambient != V.ambient or U.dim + V.dim != U.ambient:
        raise InputError("transversality needs complementary dimensions")
    rows = [list(v) for v in U.basis] + [list(v) for v in V.basis]
    if not rows:
        return True
    return linalg.det(rows) != 0


def pseudo_inverse(a: QMatrix, Uprime: Subspace, V: Subspace) -> QMatrix:
    """The matrix b with ker b = Uprime, im b = V, b·a = id on V, a·b = id on im a."""
    n = a.n
    r, ker_a, im_a = space_data(a)
    if V.dim != r or Uprime.dim != n - r:
        raise InputError("pseudo-inverse dimensions do not match the rank")
    if ker_a.intersection_dim(V) or Uprime.intersection_dim(im_a):
        raise InputError("pseudo-inverse transversality conditions fail")
    # b maps a·v_i ↦ v_i for a basis v_i of V and kills Uprime; im a ⊕ Uprime = Q^n
    src = [a.apply(v) for v in V.basis] + list(Uprime.basis)
    dst = list(V.basis) + [tuple([_ZERO] * n) for _ in Uprime.basis]
    # b · [src columns] = [dst columns]
    S = QMatrix.from_columns(src)
    D = QMatrix.from_columns(dst) if dst else QMatrix.zero(n)
    return D @ S.inverse()


# ---------------------------------------------------------------- univariate helpers


def _trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def upoly_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [_ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def upoly_divmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError
    q = [_ZERO] * max(len(a) - len(b) + 1, 0)
    inv = 1 / b[-1]
    while len(_trim(a)) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] * inv
        q[shift] = c
        for i, v in enumerate(b):
            a[i + shift] -= c * v
        _trim(a)
    return _trim(q), a


def upoly_gcd(a: list, b: list) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, upoly_divmod(a, b)[1]
    if not a:
        return []
    lead = a[-1]
    return [v / lead for v in a]


def upoly_deriv(a: list) -> list:
    return _trim([a[i] * i for i in range(1, len(a))])


def charpoly(a: QMatrix) -> list:
    """Coefficients (low to high) of det(t·I − a), by Faddeev–LeVerrier."""
    n = a.n
    coeffs = [_ZERO] * (n + 1)
    coeffs[n] = _ONE
    M = QMatrix.zero(n)
    I = QMatrix.identity(n)
    for k in range(1, n + 1):
        M = a @ M + I * coeffs[n - k + 1]
        AM = a @ M
        tr = sum((AM[i, i] for i in range(n)), _ZERO)
        coeffs[n - k] = -tr / k
    return coeffs


def matrix_poly(p: Sequence, a: QMatrix) -> QMatrix:
    n = a.n
    result = QMatrix.zero(n)
    for c in reversed(list(p)):
        result = result @ a + QMatrix.identity(n) * c
    return result


def squarefree_part(p: list) -> list:
    g = upoly_gcd(p, upoly_deriv(p))
    return upoly_divmod(p, g)[0] if len(g) > 1 else [v / p[-1] for v in p]


def rational_roots(p: Sequence) -> list:
    """Distinct rational roots with multiplicity, via sympy factorization over Q."""
    import sympy

    t = sympy.Symbol("t")
    expr = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * t ** i for i, c in enumerate(p) if c)
    out = []
    for fac, mult in sympy.factor_list(expr, t)[1]:
        fp = sympy.Poly(fac, t)
        if fp.degree() == 1:
            a, b = fp.all_coeffs()
            r = -sympy.Rational(b) / sympy.Rational(a)
            out.append((mpq(int(r.p), int(r.q)), int(mult)))
    return out


# ---------------------------------------------------------------- Jordan–Chevalley


def jordan_chevalley(a: QMatrix) -> tuple[QMatrix, QMatrix]:
    """Multiplicative decomposition a = s·u = u·s, s semisimple and u unipotent."""
    if not a.is_invertible():
        raise InputError("Jordan–Chevalley decomposition needs an invertible matrix")
    p = squarefree_part(charpoly(a))
    dp = upoly_deriv(p)
    s = a
    for _ in range(a.n.bit_length() + 2):
        ps = matrix_poly(p, s)
        if ps.is_zero():
            break
        s = s - ps @ matrix_poly(dp, s).inverse()
    else:
        raise AssertionError("Newton iteration failed to converge")
    u = s.inverse() @ a
    return s, u


def is_unipotent(u: QMatrix) -> bool:
    n = u.n
    return ((u - QMatrix.identity(n)) ** n).is_zero()


def nilpotent_log(u: QMatrix) -> QMatrix:
    """log u = Σ_{k≥1} (−1)^{k+1} (u − I)^k / k, a finite sum for unipotent u."""
    n = u.n
    if not is_unipotent(u):
        raise InputError("matrix is not unipotent")
    N = u - QMatrix.identity(n)
    total = QMatrix.zero(n)
    power = QMatrix.identity(n)
    for k in range(1, n + 1):
        power = power @ N
        if power.is_zero():
            break
        total = total + power * (mpq((-1) ** (k + 1), k))
    return total


def exp_series(N: QMatrix) -> list[QMatrix]:
    """Coefficients C_k of exp(t·N) = Σ C_k t^k for nilpotent N."""
    n = N.n
    out = [QMatrix.identity(n)]
    power = QMatrix.identity(n)
    fact = 1
    for k in range(1, n + 1):
        power = power @ N
        if power.is_zero():
            break
        fact *= k
        out.append(power * mpq(1, fact))
    return out


def one_param_closure(u: QMatrix, space: VarSpace | None = None) -> Ideal:
    """Ideal of Zcl{exp(t·log u)} over plain matrix coordinates."""
    from .constructible import ConstructibleSet, PolyMap, image_closure, matrix_space

    n = u.n
    space = space or matrix_space(n)
    logu = nilpotent_log(u)
    coeffs = exp_series(logu)
    if len(coeffs) == 1:
        return Ideal.point(space, QMatrix.identity(n).flat())
    line = VarSpace([space.fresh("t")])
    t = line.gens()[0]
    comps = []
    for idx in range(n * n):
        i, j = divmod(idx, n)
        p = line.zero()
        for k, C in enumerate(coeffs):
            if C[i, j]:
                p = p + (t ** k) * C[i, j]
        comps.append(p)
    return image_closure(ConstructibleSet.full(line), PolyMap(line, space, tuple(comps)))


# ---------------------------------------------------------------- finite order


def _totient(m: int) -> int:
    result, k, p = m, m, 2
    while p * p <= k:
        if k % p == 0:
            while k % p == 0:
                k //= p
            result -= result // p
        p += 1
    if k > 1:
        result -= result // k
    return result


def order_bound(n: int) -> int:
    """lcm of all m with φ(m) ≤ n; every finite order in GL_n(Q) divides it."""
    # φ(m) ≥ sqrt(m/2), so m ≤ 2n² bounds the search
    ms = [m for m in range(1, 2 * n * n + 3) if _totient(m) <= n]
    return _fold(lambda x, y: x * y // gcd(x, y), ms, 1)


def _divisors(k: int) -> list[int]:
    return sorted(d for d in range(1, k + 1) if k % d == 0)


def finite_order(a: QMatrix) -> int | None:
    """The multiplicative order of a, or None if it is infinite."""
    if not a.is_invertible():
        return None
    L = order_bound(a.n)
    if not (a ** L).is_identity():
        return None
    for d in _divisors(L):
        if (a ** d).is_identity():
            return d
    return L
