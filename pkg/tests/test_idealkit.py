import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.errors import InputError
from polyinv.idealkit import (
    INFINITE,
    Ideal,
    combine,
    contains,
    degree_truncate,
    dimension,
    eliminate,
    equal,
    intersect,
    quotient_basis,
    radical_member,
    same_variety,
    saturate,
)
from polyinv.polycore import Polynomial, VarSpace

XY = VarSpace(["x", "y"])
TXY = VarSpace(["t", "x", "y"])


def I(*texts, space=XY):
    return Ideal.parse(space, texts)


def test_combine():
    assert combine(I("x"), I("y"), "sum") == I("x", "y")
    assert combine(I("x"), I("y"), "product") == I("x*y")
    assert combine(I("x"), Ideal.zero(XY), "product") == Ideal.zero(XY)


def test_intersect():
    assert intersect(I("x"), I("y")) == I("x*y")
    J = I("x^2 - y", "x*y")
    assert intersect(J, J) == J
    assert intersect(I("x", "y"), I("x")) == I("x")


def test_saturate():
    assert saturate(I("x*y"), I("x")) == I("y")
    assert saturate(I("x^2"), I("x")).is_unit()
    J = I("x^2 - y")
    assert saturate(J, Ideal.unit(XY)) == J


def test_eliminate():
    assert eliminate(I("x - t", "y - t^2", space=TXY), ["t"]) == I("y - x^2")
    J = I("x*y - 1")
    assert eliminate(J, []) is J
    assert eliminate(I("t*x - 1", "y", space=TXY), ["t"]) == I("y")


def test_eliminate_rejects_everything():
    with pytest.raises(InputError):
        eliminate(I("x"), ["x", "y"])


def test_contains():
    assert contains(I("x", "y"), I("x"))
    assert not contains(I("x"), I("x", "y"))
    assert contains(I("x + y"), I("x^2 + 2*x*y + y^2"))


def test_dimension():
    assert dimension(I("x^2 + y^2 - 1")) == 1
    assert dimension(I("x", "y")) == 0
    assert dimension(Ideal.unit(XY)) == -1
    assert dimension(Ideal.zero(XY)) == 2


def test_quotient_basis():
    qb = quotient_basis(I("x^2 - 2", "y - 1"))
    assert sorted(qb) == [(0, 0), (1, 0)]
    assert quotient_basis(Ideal.parse(VarSpace(["x"]), ["x"])) == [(0,)]
    assert quotient_basis(I("x*y")) is INFINITE


def test_degree_truncate():
    assert degree_truncate(I("y - x^2"), 1) == []
    assert degree_truncate(I("y - x^2"), 2) == [XY.parse("x^2 - y")]
    assert degree_truncate(I("x"), 1) == [XY.parse("x")]


def test_radical_membership_and_varieties():
    assert radical_member(I("x^2"), XY.parse("x"))
    assert not radical_member(I("x^2"), XY.parse("y"))
    assert same_variety(I("x^2", "y^3"), I("x", "y"))
    assert not equal(I("x^2"), I("x"))


def test_mismatched_spaces():
    with pytest.raises(InputError):
        intersect(I("x"), I("t", space=TXY))


# ---------------------------------------------------------------- properties

POOL = ["x", "y", "x + y", "x - 1", "y + 2", "x^2 + 1", "x*y - 1", "x - y^2"]


def random_ideal(rng, space=XY, count=None):
    gens = []
    for _ in range(count or rng.randint(1, 2)):
        p = space.parse(rng.choice(POOL))
        q = space.parse(rng.choice(POOL))
        gens.append(p * q if rng.random() < 0.4 else p)
    return Ideal(space, gens)


def test_saturation_properties():
    rng = random.Random(11)
    for _ in range(25):
        A, B = random_ideal(rng), random_ideal(rng)
        sat = saturate(A, B)
        assert contains(sat, A)
        assert saturate(sat, B) == sat


@pytest.mark.parametrize(
    "f,g",
    [("x", "y"), ("x - 1", "x*y - 1"), ("x + y", "x - y^2"), ("y + 2", "x^2 + 1"), ("x^2 + 1", "x - y^2")],
)
def test_saturate_removes_coprime_factor(f, g):
    F, G = XY.parse(f), XY.parse(g)
    assert saturate(Ideal(XY, [F * G]), Ideal(XY, [F])) == Ideal(XY, [G])


def test_elimination_composes():
    space = VarSpace(["s", "t", "x", "y"])
    J = Ideal.parse(space, ["x - s - t", "y - s*t", "s^2 - t"])
    once = eliminate(J, ["s", "t"])
    step = eliminate(eliminate(J, ["s"]), ["t"])
    assert once == step


def test_containment_is_a_partial_order():
    rng = random.Random(5)
    pool = [random_ideal(rng) for _ in range(12)]
    for A in pool:
        assert contains(A, A)
        for B in pool:
            for C in pool:
                if contains(A, B) and contains(B, C):
                    assert contains(A, C)
            if contains(A, B) and contains(B, A):
                assert A == B


def test_quotient_basis_finite_iff_dimension_at_most_zero():
    rng = random.Random(17)
    for _ in range(40):
        J = random_ideal(rng, count=rng.randint(1, 3))
        finite = quotient_basis(J) is not INFINITE
        assert finite == (dimension(J) <= 0)


coeff = st.integers(-3, 3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2), coeff), min_size=1, max_size=4), st.integers(1, 3))
def test_degree_truncate_members(terms, d):
    p = Polynomial(XY, {(a, b): c for a, b, c in terms})
    if not p:
        return
    J = Ideal(XY, [p, XY.parse("x*y - 1")])
    for q in degree_truncate(J, d):
        assert q.degree() <= d
        assert J.reduce(q).is_zero()
