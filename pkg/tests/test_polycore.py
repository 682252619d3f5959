import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.errors import InputError
from polyinv.polycore import (
    GREVLEX,
    LEX,
    Polynomial,
    Q,
    VarSpace,
    block,
    format_polynomial,
    groebner,
    is_groebner,
    parse_polynomial,
    reduce,
)

from conftest import ours_sorted, sympy_groebner

XY = VarSpace(["x", "y"])
XYZ = VarSpace(["x", "y", "z"])


def P(text, space=XY):
    return parse_polynomial(text, space)


# ---------------------------------------------------------------- worked examples


def test_reduce_substitutes_along_lex_basis():
    assert reduce(P("x^2*y"), [P("x - y")], LEX) == P("y^3")


def test_reduce_zero_and_members():
    assert reduce(XY.zero(), [P("x"), P("y")], LEX).is_zero()
    assert reduce(P("x"), [P("x"), P("y")], LEX).is_zero()


def test_groebner_examples():
    assert groebner([P("x + y"), P("x - y")], LEX) == [P("y"), P("x")]
    assert groebner([P("x")], LEX) == [P("x")]
    assert groebner([P("x^2 - 1"), P("x - 1")], LEX) == [P("x - 1")]


def test_unit_and_zero_ideals():
    assert groebner([P("x*y - 1"), P("x"), P("y^2")]) == [XY.one()]
    assert groebner([XY.zero()]) == []


def test_cyclic4_matches_sympy():
    s = VarSpace(["a", "b", "c", "d"])
    gens = [P(t, s) for t in ["a + b + c + d", "a*b + b*c + c*d + d*a", "a*b*c + b*c*d + c*d*a + d*a*b", "a*b*c*d - 1"]]
    for order in (GREVLEX, LEX):
        assert ours_sorted(gens, order) == sympy_groebner(gens, s, order)


def test_block_order_eliminates_front_variables():
    space = VarSpace(["t", "x", "y"])
    basis = groebner([P("x - t^2", space), P("y - t^3", space)], block(1))
    assert is_groebner(basis, block(1))
    free = [g for g in basis if all(m[0] == 0 for m in g.terms)]
    assert free == [P("x^3 - y^2", space)]


def test_text_format():
    p = P("-3/2*x^2*y + 1")
    assert format_polynomial(p) == "-3/2*x^2*y + 1"
    assert format_polynomial(XY.zero()) == "0"
    assert P("(x + y)^2") == P("x^2 + 2*x*y + y^2")
    assert P("x/2") == P("1/2*x")


@pytest.mark.parametrize("bad", ["", "x +", "x ^ y", "w", "x/0", "1.5*x", "x y"])
def test_parse_errors(bad):
    with pytest.raises(InputError):
        P(bad)


def test_rationals_are_exact():
    assert Q("6/4") == Q(3) / 2
    with pytest.raises(InputError):
        Q(0.5)
    with pytest.raises(InputError):
        Q("1/0")


def test_space_validation():
    with pytest.raises(InputError):
        VarSpace([])
    with pytest.raises(InputError):
        VarSpace(["x", "x"])
    with pytest.raises(InputError):
        P("x") + P("x", XYZ)


# ---------------------------------------------------------------- properties

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monos = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2))
polys = st.dictionaries(monos, coeffs, max_size=4).map(
    lambda d: Polynomial(XYZ, {m: f"{c.numerator}/{c.denominator}" for m, c in d.items()})
)
ideals = st.lists(polys, min_size=1, max_size=3)


@settings(max_examples=60, deadline=None)
@given(ideals, st.randoms(use_true_random=False))
def test_groebner_is_canonical(gens, rnd):
    gens = [g for g in gens if g]
    shuffled = list(gens) * 2
    rnd.shuffle(shuffled)
    assert groebner(gens) == groebner(shuffled)


@settings(max_examples=40, deadline=None)
@given(ideals, polys, polys)
def test_reduction_properties(gens, p, q):
    G = groebner(gens)
    r = reduce(p, G)
    assert reduce(r, G) == r
    assert reduce(p + q, G) == r + reduce(q, G)
    lms = [g.leading_monomial() for g in G]
    for m in r.terms:
        assert not any(all(a <= b for a, b in zip(lm, m)) for lm in lms)


@settings(max_examples=40, deadline=None)
@given(ideals, polys)
def test_multiples_reduce_to_zero(gens, h):
    G = groebner(gens)
    combo = sum((g * h for g in gens), XYZ.zero())
    assert reduce(combo, G).is_zero()


@settings(max_examples=60, deadline=None)
@given(polys)
def test_text_round_trip(p):
    assert parse_polynomial(format_polynomial(p), XYZ) == p


@settings(max_examples=100, deadline=None)
@given(st.fractions().filter(lambda f: f != 0))
def test_rational_inverse(f):
    a = Q(f"{f.numerator}/{f.denominator}")
    assert a * (1 / a) == 1


def test_groebner_agrees_with_sympy_on_random_ideals():
    rng = random.Random(3)
    for _ in range(30):
        gens = []
        for _ in range(rng.randint(1, 3)):
            terms = {}
            for _ in range(rng.randint(1, 3)):
                terms[(rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 1))] = rng.randint(-3, 3)
            p = Polynomial(XYZ, terms)
            if p:
                gens.append(p)
        if not gens:
            continue
        for order in (GREVLEX, LEX):
            assert ours_sorted(gens, order) == sympy_groebner(gens, XYZ, order)
