import pytest
import sympy

from polyinv.matgeom import QMatrix
from polyinv.polycore import GREVLEX, LEX, Polynomial, VarSpace, groebner

S = QMatrix([[0, -1], [1, 0]])
T = QMatrix([[1, 1], [0, 1]])
E = QMatrix([[1, 0], [0, 0]])

LOOP_PROGRAM = """\
vars x y; locations q1 q2; init q1;
edge q1 -> q2 { x := 3, y := 2 };
edge q2 -> q2 { x := 10*x - 8*y, y := 6*x - 4*y };
"""


def to_sympy(p: Polynomial, syms):
    expr = 0
    for m, c in p.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for s, e in zip(syms, m):
            term *= s ** e
        expr += term
    return expr


def sympy_groebner(polys, space: VarSpace, order) -> list[Polynomial]:
    """Reduced Gröbner basis computed by sympy, converted back (the independent oracle)."""
    syms = sympy.symbols(list(space.names))
    name = {LEX: "lex", GREVLEX: "grevlex"}[order]
    G = sympy.groebner([to_sympy(p, syms) for p in polys], *syms, order=name, domain="QQ")
    out = []
    for g in G.exprs:
        poly = sympy.Poly(g, *syms, domain="QQ")
        terms = {m: c for m, c in poly.terms()}
        out.append(Polynomial(space, {m: f"{c.p}/{c.q}" for m, c in terms.items()}))
    return sorted(out, key=lambda p: order.key(p.leading_monomial(order)))


@pytest.fixture
def xy():
    return VarSpace(["x", "y"])


def ours_sorted(polys, order):
    return sorted(groebner(polys, order), key=lambda p: order.key(p.leading_monomial(order)))
