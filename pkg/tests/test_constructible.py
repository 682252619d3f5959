import random

import pytest

from polyinv.constructible import (
    Cell,
    ConstructibleSet,
    PolyMap,
    boolean,
    cell_closure,
    closure,
    image_closure,
    matrix_space,
    member,
    rank_below,
    rank_stratum,
    witness_point,
)
from polyinv.errors import NoRationalWitness
from polyinv.idealkit import Ideal
from polyinv.matgeom import QMatrix
from polyinv.polycore import Q, VarSpace

X = VarSpace(["x"])
XY = VarSpace(["x", "y"])
T = VarSpace(["t"])


def I(*texts, space=XY):
    return Ideal.parse(space, texts)


def cell(pos, neg=None, space=XY):
    return Cell(I(*pos, space=space), I(*neg, space=space) if neg else Ideal.unit(space))


def cset(*cells, space=XY):
    return ConstructibleSet(space, tuple(cells))


def test_cell_closure():
    assert cell_closure(cell(["x*y"], ["x"])) == I("y")
    assert cell_closure(cell(["x^2 - y"])) == I("x^2 - y")
    assert cell_closure(cell(["x"], ["x"])).is_unit()


def test_closure():
    assert closure(cset(cell(["x"]), cell(["y"]))) == I("x*y")
    c = cell(["x*y"], ["x"])
    assert closure(cset(c)) == cell_closure(c)
    assert closure(cset()).is_unit()


def test_boolean_union_of_points():
    S = boolean(cset(cell(["x"], space=X), space=X), cset(cell(["x - 1"], space=X), space=X), "union")
    assert len(S.cells) == 2
    assert closure(S) == I("x*(x - 1)", space=X)


def test_boolean_with_full_and_self():
    A = cset(cell(["x*y"], ["x"]))
    B = boolean(A, ConstructibleSet.full(XY), "intersect")
    assert closure(B) == closure(A)
    assert closure(boolean(A, A, "minus")).is_unit()


def test_image_closure():
    line = ConstructibleSet.full(T)
    f = PolyMap(T, XY, (T.parse("t"), T.parse("t^2")))
    assert image_closure(line, f) == I("y - x^2")
    A = cset(cell(["x^2 - y"]))
    ident = PolyMap(XY, XY, tuple(XY.gens()))
    assert image_closure(A, ident) == closure(A)
    hyper = cset(cell(["x*y - 1"]))
    proj = PolyMap(XY, X, (XY.parse("x"),))
    assert image_closure(hyper, proj) == Ideal.zero(X)


def test_witness_point():
    assert witness_point(cset(cell(["x^2 - 4"], space=X), space=X)) == [Q(-2)]
    with pytest.raises(NoRationalWitness):
        witness_point(cset(cell(["x^2 - 2"], space=X), space=X))
    assert witness_point(cset(cell(["x*(x - 1)"], ["x"], space=X), space=X)) == [Q(1)]


def test_member():
    c = cset(cell(["x*y"], ["x"]))
    assert not member([0, 0], c)
    assert member([1, 0], c)
    assert not member([3, 4], cset())


def test_rank_strata_on_2x2():
    space = matrix_space(2)
    r1 = rank_stratum(2, 1)
    (c1,) = r1.cells
    assert c1.positive == Ideal.parse(space, ["x_1_1*x_2_2 - x_1_2*x_2_1"])
    assert c1.negative == Ideal.parse(space, ["x_1_1", "x_1_2", "x_2_1", "x_2_2"])
    (c0,) = rank_stratum(2, 0).cells
    assert c0.positive == Ideal.parse(space, ["x_1_1", "x_1_2", "x_2_1", "x_2_2"])
    assert c0.negative.is_unit()
    (c2,) = rank_stratum(2, 2).cells
    assert c2.positive.is_zero()
    assert c2.negative == Ideal.parse(space, ["x_1_1*x_2_2 - x_1_2*x_2_1"])
    (below,) = rank_below(2, 1).cells
    assert below.positive == c0.positive


# ---------------------------------------------------------------- properties


def test_strata_partition_matrix_space():
    rng = random.Random(2)
    strata = [rank_stratum(3, r) for r in range(4)]
    for _ in range(60):
        rows = [[rng.choice([0, 0, 1, -1, 2]) for _ in range(3)] for _ in range(3)]
        M = QMatrix(rows)
        hits = [r for r in range(4) if member(list(M.flat()), strata[r])]
        assert hits == [M.rank()]


SETS = [
    cset(cell(["x*y"], ["x"])),
    cset(cell(["x - y"]), cell(["x + 1"], ["y"])),
    cset(cell(["x^2 - 1"])),
]


def test_closure_contains_members():
    rng = random.Random(8)
    for S in SETS:
        Z = closure(S)
        for _ in range(100):
            pt = [Q(rng.randint(-2, 2)), Q(rng.randint(-2, 2))]
            if member(pt, S):
                assert Z.vanishes_at(pt)


def test_boolean_denotations_match_pointwise():
    rng = random.Random(9)
    for A in SETS:
        for B in SETS:
            ops = {
                "union": lambda a, b: a or b,
                "intersect": lambda a, b: a and b,
                "minus": lambda a, b: a and not b,
            }
            for op, f in ops.items():
                C = boolean(A, B, op)
                for _ in range(30):
                    pt = [Q(rng.randint(-2, 2)), Q(rng.randint(-2, 2))]
                    assert member(pt, C) == f(member(pt, A), member(pt, B))


def test_image_of_identity_equals_closure():
    ident = PolyMap(XY, XY, tuple(XY.gens()))
    for S in SETS:
        assert image_closure(S, ident) == closure(S)


def test_witnesses_are_members():
    for seed in range(5):
        for S in SETS:
            pt = witness_point(S, seed=seed)
            assert member(pt, S)
