"""Exact multivariate polynomials over Q and a reduced Groebner basis engine.

Coefficients are ``gmpy2.mpq`` values.  Polynomials are immutable mappings
from exponent tuples to nonzero rationals, tied to a :class:`VarSpace`.
The Groebner engine is Buchberger's algorithm with the Gebauer-Moeller
pair update (which subsumes the coprime-leading-monomial criterion and the
chain criterion) and the normal selection strategy.
"""

from __future__ import annotations

import heapq
import re
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq, mpz

from .errors import InputError

Rational = type(mpq(0))
Monomial = tuple

_ZERO = mpq(0)
_ONE = mpq(1)


def Q(value) -> Rational:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to an exact rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, (int, type(mpz(0)))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
            raise InputError(f"not an exact rational: {value!r}")
        if "/" in text:
            num, den = text.split("/")
            if int(den) == 0:
                raise InputError(f"zero denominator in {value!r}")
            return mpq(int(num), int(den))
        return mpq(int(text))
    if isinstance(value, float):
        raise InputError("floating point values are not accepted; pass 'p/q' strings")
    raise InputError(f"cannot interpret {value!r} as a rational")


def qstr(c) -> str:
    c = Q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class VarSpace:
    """An ordered tuple of distinct variable names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not names:
            raise InputError("a VarSpace needs at least one variable")
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in {names}")
        for name in names:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
                raise InputError(f"bad variable name {name!r}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __eq__(self, other):
        return isinstance(other, VarSpace) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarSpace({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InputError(f"unknown variable {name!r}") from None

    def var(self, name: str) -> "Polynomial":
        i = self.index(name)
        e = [0] * len(self.names)
        e[i] = 1
        return Polynomial(self, {tuple(e): _ONE})

    def gens(self) -> list["Polynomial"]:
        return [self.var(n) for n in self.names]

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return self.const(1)

    def const(self, c) -> "Polynomial":
        c = Q(c)
        return Polynomial(self, {(0,) * len(self.names): c} if c else {})

    def extend(self, extra: Sequence[str], front: bool = False) -> "VarSpace":
        return VarSpace(tuple(extra) + self.names if front else self.names + tuple(extra))

    def fresh(self, stem: str) -> str:
        """A variable name not yet used in this space."""
        i = 0
        while f"{stem}{i}" in self._index:
            i += 1
        return f"{stem}{i}"

    def parse(self, text: str) -> "Polynomial":
        return parse_polynomial(text, self)


# ---------------------------------------------------------------- orders


class MonomialOrder:
    """lex, grevlex, or block(k): first k variables eliminated, grevlex inside each block."""

    __slots__ = ("kind", "k", "key")

    def __init__(self, kind: str = "grevlex", k: int = 0):
        if kind not in ("lex", "grevlex", "block"):
            raise InputError(f"unknown monomial order {kind!r}")
        self.kind = kind
        self.k = k
        if kind == "lex":
            self.key = _lex_key
        elif kind == "grevlex":
            self.key = _grevlex_key
        else:
            self.key = _block_key(k)

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and (self.kind, self.k) == (other.kind, other.k)

    def __hash__(self):
        return hash((self.kind, self.k))

    def __repr__(self):
        return f"block({self.k})" if self.kind == "block" else self.kind


def _lex_key(m):
    return m


def _grevlex_key(m):
    return (sum(m), tuple(-e for e in reversed(m)))


def _block_key(k):
    def key(m):
        a, b = m[:k], m[k:]
        return (sum(a), tuple(-e for e in reversed(a)), sum(b), tuple(-e for e in reversed(b)))
    return key


LEX = MonomialOrder("lex")
GREVLEX = MonomialOrder("grevlex")


def block(k: int) -> MonomialOrder:
    return MonomialOrder("block", k)


# ---------------------------------------------------------------- polynomials


class Polynomial:
    """Sparse polynomial with exact rational coefficients."""

    __slots__ = ("space", "terms", "_hash")

    def __init__(self, space: VarSpace, terms: Mapping[tuple, object] | None = None, *, _trusted=False):
        self.space = space
        if _trusted:
            self.terms = terms
        else:
            n = len(space)
            clean = {}
            for m, c in (terms or {}).items():
                m = tuple(int(e) for e in m)
                if len(m) != n or any(e < 0 for e in m):
                    raise InputError(f"monomial {m} does not fit {space}")
                c = Q(c)
                if c:
                    clean[m] = c
            self.terms = clean
        self._hash = None

    # -- basic protocol
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.space == other.space and self.terms == other.terms
        if isinstance(other, (int, Rational, Fraction)):
            return self == self.space.const(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self})"

    def __str__(self):
        return format_polynomial(self)

    def _check(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.space != self.space:
                raise InputError("polynomials live in different variable spaces")
            return other
        return self.space.const(other)

    # -- arithmetic
    def __add__(self, other):
        other = self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            v = t.get(m, _ZERO) + c
            if v:
                t[m] = v
            else:
                t.pop(m, None)
        return Polynomial(self.space, t, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.space, {m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = Q(other)
            if not c:
                return self.space.zero()
            return Polynomial(self.space, {m: v * c for m, v in self.terms.items()}, _trusted=True)
        other = self._check(other)
        return Polynomial(self.space, _mul_dicts(self.terms, other.terms), _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = Q(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative polynomial power")
        result = self.space.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- queries
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_coeff(self) -> Rational:
        return self.terms.get((0,) * len(self.space), _ZERO)

    def variables(self) -> set[int]:
        return {i for m in self.terms for i, e in enumerate(m) if e}

    def leading_monomial(self, order: MonomialOrder = GREVLEX) -> tuple:
        return max(self.terms, key=order.key)

    def leading_coeff(self, order: MonomialOrder = GREVLEX) -> Rational:
        return self.terms[self.leading_monomial(order)]

    def monic(self, order: MonomialOrder = GREVLEX) -> "Polynomial":
        if not self.terms:
            return self
        return self * (1 / self.leading_coeff(order))

    def sorted_terms(self, order: MonomialOrder = GREVLEX) -> list[tuple[tuple, Rational]]:
        return sorted(self.terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def evaluate(self, point: Sequence) -> Rational:
        point = [Q(v) for v in point]
        if len(point) != len(self.space):
            raise InputError("point arity does not match the variable space")
        total = _ZERO
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v *= x ** e
            total += v
        return total

    def substitute(self, images: Sequence["Polynomial"], target: VarSpace | None = None) -> "Polynomial":
        """Compose: replace variable i by ``images[i]`` (all in one target space)."""
        if len(images) != len(self.space):
            raise InputError("substitution needs one image per variable")
        if target is None:
            target = images[0].space if images else self.space
        cache: dict[tuple[int, int], dict] = {}
        nt = len(target)
        total: dict = {}
        for m, c in self.terms.items():
            acc = {(0,) * nt: c}
            for i, e in enumerate(m):
                if e:
                    key = (i, e)
                    pw = cache.get(key)
                    if pw is None:
                        pw = (images[i] ** e).terms
                        cache[key] = pw
                    acc = _mul_dicts(acc, pw)
            for mm, cc in acc.items():
                v = total.get(mm, _ZERO) + cc
                if v:
                    total[mm] = v
                else:
                    total.pop(mm, None)
        return Polynomial(target, total, _trusted=True)

    def rename(self, target: VarSpace, mapping: Sequence[int] | None = None) -> "Polynomial":
        """Re-embed into ``target``; variable i goes to position ``mapping[i]`` (default: by name)."""
        if mapping is None:
            mapping = [target.index(n) for n in self.space.names]
        nt = len(target)
        terms = {}
        for m, c in self.terms.items():
            e = [0] * nt
            for i, k in enumerate(m):
                if k:
                    e[mapping[i]] += k
            terms[tuple(e)] = c
        return Polynomial(target, terms, _trusted=True)

    def derivative(self, i: int) -> "Polynomial":
        terms = {}
        for m, c in self.terms.items():
            if m[i]:
                e = list(m)
                e[i] -= 1
                terms[tuple(e)] = c * m[i]
        return Polynomial(self.space, terms, _trusted=True)


def _mul_dicts(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    if len(a) > len(b):
        a, b = b, a
    get = out.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            v = get(m, _ZERO) + ca * cb
            if v:
                out[m] = v
            else:
                del out[m]
    return out


# ---------------------------------------------------------------- text format


def format_polynomial(p: Polynomial, order: MonomialOrder = GREVLEX) -> str:
    if not p.terms:
        return "0"
    parts = []
    for m, c in p.sorted_terms(order):
        factors = []
        for name, e in zip(p.space.names, m):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if not factors:
            body = qstr(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = qstr(mag) + "*" + "*".join(factors)
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(\^)|(\*)|(/)|(\+)|(-)|(\()|(\)))")


class _Parser:
    def __init__(self, text: str, space: VarSpace):
        self.text = text
        self.space = space
        self.tokens = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise InputError(f"cannot parse polynomial at column {pos + 1}: {text!r}")
            kinds = ("num", "name", "^", "*", "/", "+", "-", "(", ")")
            for kind, val in zip(kinds, m.groups()):
                if val is not None:
                    self.tokens.append((kind, val, m.start(m.lastindex)))
                    break
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind):
        if self.peek() != kind:
            where = self.tokens[self.i][2] + 1 if self.i < len(self.tokens) else len(self.text)
            raise InputError(f"expected {kind!r} at column {where} in {self.text!r}")
        tok = self.tokens[self.i]
        self.i += 1
        return tok[1]

    def parse(self) -> Polynomial:
        if not self.tokens:
            raise InputError("empty polynomial text")
        p = self.expr()
        if self.i != len(self.tokens):
            raise InputError(f"trailing input at column {self.tokens[self.i][2] + 1} in {self.text!r}")
        return p

    def expr(self):
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.take(self.peek()) == "-" else 1
        acc = self.term() * sign
        while self.peek() in ("+", "-"):
            op = self.take(self.peek())
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take(self.peek())
            f = self.factor()
            if op == "*":
                acc = acc * f
            else:
                if not f.is_constant() or f.is_zero():
                    raise InputError(f"division by a non-constant or zero in {self.text!r}")
                acc = acc / f.constant_coeff()
        return acc

    def factor(self):
        if self.peek() == "-":
            self.take("-")
            return -self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.take("^")
            e = int(self.take("num"))
            base = base ** e
        return base

    def atom(self):
        kind = self.peek()
        if kind == "num":
            return self.space.const(int(self.take("num")))
        if kind == "name":
            return self.space.var(self.take("name"))
        if kind == "(":
            self.take("(")
            p = self.expr()
            self.take(")")
            return p
        self.take("num")  # raises with position


def parse_polynomial(text: str, space: VarSpace) -> Polynomial:
    return _Parser(text, space).parse()


# ---------------------------------------------------------------- division


def _divides(a: tuple, b: tuple) -> bool:
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(x if x > y else y for x, y in zip(a, b))


def _normal_form(p: dict, basis: Sequence[dict], lms: Sequence[tuple], key: Callable, full: bool = True) -> dict:
    """Normal form of ``p`` by monic ``basis`` (with leading monomials ``lms``)."""
    if not p:
        return {}
    p = dict(p)
    heap = [(_neg(key(m)), m) for m in p]
    heapq.heapify(heap)
    rem: dict = {}
    while heap:
        _, m = heapq.heappop(heap)
        c = p.pop(m, None)
        if c is None:
            continue
        for g, lm in zip(basis, lms):
            if _divides(lm, m):
                q = tuple(x - y for x, y in zip(m, lm))
                for gm, gc in g.items():
                    if gm == lm:
                        continue
                    mm = tuple(x + y for x, y in zip(gm, q))
                    old = p.get(mm)
                    if old is None:
                        p[mm] = -c * gc
                        heapq.heappush(heap, (_neg(key(mm)), mm))
                    else:
                        v = old - c * gc
                        if v:
                            p[mm] = v
                        else:
                            del p[mm]
                break
        else:
            rem[m] = c
            if not full:
                rem.update(p)
                return rem
    return rem


def _neg(k):
    # heap key making the largest monomial pop first; keys are nested int tuples
    if isinstance(k, tuple):
        return tuple(_neg(x) for x in k)
    return -k


def _monic_dict(p: dict, key: Callable) -> tuple[dict, tuple]:
    lm = max(p, key=key)
    c = p[lm]
    if c != 1:
        inv = 1 / c
        p = {m: v * inv for m, v in p.items()}
    return p, lm


def _same_space(polys: Iterable[Polynomial], space: VarSpace | None = None) -> VarSpace | None:
    for p in polys:
        if space is None:
            space = p.space
        elif p.space != space:
            raise InputError("polynomials live in different variable spaces")
    return space


def reduce(p: Polynomial, basis: Sequence[Polynomial], order: MonomialOrder = GREVLEX) -> Polynomial:
    """Normal form of ``p`` modulo ``basis`` (unique when basis is a Groebner basis)."""
    space = _same_space(list(basis), p.space)
    key = order.key
    dicts, lms = [], []
    for g in basis:
        if g.is_zero():
            raise InputError("basis entries must be nonzero")
        d, lm = _monic_dict(g.terms, key)
        dicts.append(d)
        lms.append(lm)
    return Polynomial(space, _normal_form(p.terms, dicts, lms, key), _trusted=True)


# ---------------------------------------------------------------- Buchberger


def _spoly(f: dict, lf: tuple, g: dict, lg: tuple) -> dict:
    l = _lcm(lf, lg)
    qf = tuple(x - y for x, y in zip(l, lf))
    qg = tuple(x - y for x, y in zip(l, lg))
    out: dict = {}
    for m, c in f.items():
        out[tuple(x + y for x, y in zip(m, qf))] = c
    for m, c in g.items():
        mm = tuple(x + y for x, y in zip(m, qg))
        v = out.get(mm, _ZERO) - c
        if v:
            out[mm] = v
        else:
            out.pop(mm, None)
    return out


def _update(G: list[int], B: set, ih: int, lms: list[tuple]) -> tuple[list[int], set]:
    """Gebauer-Moeller installation of basis element ``ih``."""
    mh = lms[ih]
    C = list(G)
    D = []
    while C:
        ig = C.pop()
        mg = lms[ig]
        lhg = _lcm(mh, mg)
        coprime = all(not (a and b) for a, b in zip(mh, mg))
        if coprime:
            D.append(ig)
            continue
        dominated = any(_divides(_lcm(mh, lms[ix]), lhg) for ix in C) or any(
            _divides(_lcm(mh, lms[ix]), lhg) for ix in D
        )
        if not dominated:
            D.append(ig)
    new_pairs = set()
    for ig in D:
        mg = lms[ig]
        if not all(not (a and b) for a, b in zip(mh, mg)):
            new_pairs.add((ih, ig))
    kept = set()
    for (i1, i2) in B:
        l12 = _lcm(lms[i1], lms[i2])
        if not _divides(mh, l12) or _lcm(lms[i1], mh) == l12 or _lcm(lms[i2], mh) == l12:
            kept.add((i1, i2))
    kept |= new_pairs
    G_new = [ig for ig in G if not _divides(mh, lms[ig])]
    G_new.append(ih)
    return G_new, kept


def _buchberger(gens: list[dict], key: Callable) -> list[tuple[dict, tuple]]:
    polys: list[dict] = []
    lms: list[tuple] = []
    G: list[int] = []
    B: set = set()

    # seed: interreduce inputs lightly by processing in increasing order
    work = [g for g in gens if g]
    work.sort(key=lambda d: key(max(d, key=key)))
    for g in work:
        basis = [polys[i] for i in G]
        blms = [lms[i] for i in G]
        h = _normal_form(g, basis, blms, key)
        if not h:
            continue
        h, lm = _monic_dict(h, key)
        polys.append(h)
        lms.append(lm)
        if not any(lm):
            return [({tuple(0 for _ in lm): _ONE}, lm)]
        G, B = _update(G, B, len(polys) - 1, lms)

    while B:
        pair = min(B, key=lambda pr: (key(_lcm(lms[pr[0]], lms[pr[1]])), pr))
        B.discard(pair)
        i, j = pair
        s = _spoly(polys[i], lms[i], polys[j], lms[j])
        basis = [polys[k] for k in G]
        blms = [lms[k] for k in G]
        h = _normal_form(s, basis, blms, key)
        if not h:
            continue
        h, lm = _monic_dict(h, key)
        polys.append(h)
        lms.append(lm)
        if not any(lm):
            return [({lm: _ONE}, lm)]
        G, B = _update(G, B, len(polys) - 1, lms)

    # minimalize then interreduce
    entries = [(polys[i], lms[i]) for i in G]
    minimal = []
    for idx, (p, lm) in enumerate(entries):
        if any(_divides(lm2, lm) and (lm2 != lm or j < idx) for j, (_, lm2) in enumerate(entries) if j != idx):
            continue
        minimal.append((p, lm))
    reduced = []
    for idx, (p, lm) in enumerate(minimal):
        others = [q for j, (q, _) in enumerate(minimal) if j != idx]
        olms = [l2 for j, (_, l2) in enumerate(minimal) if j != idx]
        tail = {m: c for m, c in p.items() if m != lm}
        r = _normal_form(tail, others, olms, key)
        r[lm] = _ONE
        reduced.append((r, lm))
    reduced.sort(key=lambda t: key(t[1]))
    return reduced


def groebner(gens: Sequence[Polynomial], order: MonomialOrder = GREVLEX) -> list[Polynomial]:
    """Reduced Groebner basis, monic, sorted by increasing leading monomial.

    The zero ideal has the empty basis; the unit ideal has basis ``[1]``.
    """
    gens = list(gens)
    if not gens:
        return []
    space = _same_space(gens)
    result = _buchberger([g.terms for g in gens], order.key)
    return [Polynomial(space, d, _trusted=True) for d, _ in result]


def is_groebner(basis: Sequence[Polynomial], order: MonomialOrder = GREVLEX) -> bool:
    """Buchberger's S-pair test."""
    key = order.key
    items = [_monic_dict(g.terms, key) for g in basis if g]
    dicts = [d for d, _ in items]
    lms = [lm for _, lm in items]
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            s = _spoly(dicts[i], lms[i], dicts[j], lms[j])
            if _normal_form(s, dicts, lms, key):
                return False
    return True
