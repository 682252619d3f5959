import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.constructible import matrix_space
from polyinv.errors import InputError
from polyinv.idealkit import Ideal
from polyinv.matgeom import (
    QMatrix,
    Subspace,
    charpoly,
    finite_order,
    image,
    is_unipotent,
    jordan_chevalley,
    kernel,
    matrix_poly,
    one_param_closure,
    order_bound,
    plucker,
    pseudo_inverse,
    space_data,
    squarefree_part,
    transversal,
    upoly_deriv,
    upoly_gcd,
    wedge_top,
)
from polyinv.polycore import Q

from conftest import S, T


def span(*vecs, n=2):
    return Subspace(n, vecs)


def test_space_data():
    r, K, V = space_data(QMatrix.diag([2, 0]))
    assert (r, K, V) == (1, span((0, 1)), span((1, 0)))
    r, K, V = space_data(QMatrix.identity(3))
    assert r == 3 and K.dim == 0 and V == Subspace(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    r, K, V = space_data(QMatrix([[1, 1], [1, 1]]))
    assert (r, K, V) == (1, span((1, -1)), span((1, 1)))


def test_subspace_canonical_basis():
    assert span((2, 2)) == span((1, 1))
    assert Subspace(3, [(1, 1, 0), (0, 1, 1)]) == Subspace(3, [(1, 2, 1), (1, 0, -1)])


def test_plucker():
    assert plucker(span((1, 0))).coords == (1, 0)
    assert plucker(span((1, 1))).coords == (1, 1)
    assert plucker(Subspace(3, [(1, 0, 0), (0, 1, 0)])).coords == (1, 0, 0)
    with pytest.raises(InputError):
        plucker(Subspace(2))


def test_transversal():
    assert transversal(span((1, 0)), span((0, 1)))
    assert not transversal(span((1, 0)), span((1, 0)))
    assert transversal(span((1, 1)), span((1, -1)))
    with pytest.raises(InputError):
        transversal(span((1, 0)), Subspace(2, [(1, 0), (0, 1)]))


def test_pseudo_inverse_examples():
    e1, e2 = span((1, 0)), span((0, 1))
    assert pseudo_inverse(QMatrix.diag([2, 0]), e2, e1) == QMatrix([["1/2", 0], [0, 0]])
    idem = QMatrix.diag([1, 0])
    assert pseudo_inverse(idem, e2, e1) == idem
    assert pseudo_inverse(QMatrix([[0, 0], [1, 0]]), e1, e1) == QMatrix([[0, 1], [0, 0]])
    with pytest.raises(InputError):
        pseudo_inverse(QMatrix.diag([1, 0]), e1, e1)


def test_jordan_chevalley_examples():
    s, u = jordan_chevalley(QMatrix([[2, 1], [0, 2]]))
    assert s == QMatrix.diag([2, 2]) and u == QMatrix([[1, "1/2"], [0, 1]])
    a = QMatrix.diag([2, 3])
    assert jordan_chevalley(a) == (a, QMatrix.identity(2))
    assert jordan_chevalley(T) == (QMatrix.identity(2), T)


def test_one_param_closure_examples():
    space = matrix_space(2)
    assert one_param_closure(T) == Ideal.parse(space, ["x_1_1 - 1", "x_2_2 - 1", "x_2_1"])
    assert one_param_closure(QMatrix.identity(2)) == Ideal.point(space, QMatrix.identity(2).flat())
    u = QMatrix.identity(3) + QMatrix([[0, 0, 1], [0, 0, 0], [0, 0, 0]])
    J = one_param_closure(u)
    sp3 = matrix_space(3)
    pinned = [f"x_{i}_{j}" + (" - 1" if i == j else "") for i in range(1, 4) for j in range(1, 4) if (i, j) != (1, 3)]
    assert J == Ideal.parse(sp3, pinned)
    with pytest.raises(InputError):
        one_param_closure(QMatrix.diag([2, 1]))


def test_finite_order_examples():
    assert finite_order(S) == 4
    assert finite_order(QMatrix.identity(3)) == 1
    assert finite_order(T) is None
    assert order_bound(2) == 12
    assert order_bound(6) == 2520


def test_charpoly_matches_sympy():
    rng = random.Random(4)
    x = sympy.Symbol("x")
    for _ in range(10):
        rows = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)]
        ours = charpoly(QMatrix(rows))
        theirs = sympy.Matrix(rows).charpoly(x).all_coeffs()[::-1]
        assert [int(c) for c in ours] == [int(c) for c in theirs]


def test_cayley_hamilton():
    a = QMatrix([[1, 2, 0], [0, 1, -1], [3, 0, 2]])
    assert matrix_poly(charpoly(a), a).is_zero()


# ---------------------------------------------------------------- properties

small = st.integers(-2, 2)
mat3 = st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3).map(QMatrix)


def random_subspace(rng, n, r):
    while True:
        W = Subspace(n, [[rng.randint(-2, 2) for _ in range(n)] for _ in range(r)])
        if W.dim == r:
            return W


def test_wedge_criterion_matches_transversality():
    rng = random.Random(12)
    for _ in range(150):
        n = rng.randint(2, 4)
        r = rng.randint(1, n - 1)
        U, V = random_subspace(rng, n, n - r), random_subspace(rng, n, r)
        meet = U.intersection_dim(V)
        assert (wedge_top(plucker(U), plucker(V)) != 0) == transversal(U, V) == (meet == 0)


@settings(max_examples=80, deadline=None)
@given(mat3, st.randoms(use_true_random=False))
def test_pseudo_inverse_properties(a, rnd):
    r, K, Im = space_data(a)
    if r == 0:
        return
    rng = random.Random(rnd.random())
    for _ in range(10):
        U2, V = random_subspace(rng, 3, 3 - r) if r < 3 else Subspace(3), random_subspace(rng, 3, r)
        if K.intersection_dim(V) or U2.intersection_dim(Im):
            continue
        b = pseudo_inverse(a, U2, V)
        assert a @ b @ a == a
        assert b @ a @ b == b
        assert space_data(b) == (r, U2, V)
        return


@settings(max_examples=60, deadline=None)
@given(mat3)
def test_jordan_chevalley_properties(a):
    if not a.is_invertible():
        return
    s, u = jordan_chevalley(a)
    assert s @ u == a
    assert s @ u == u @ s
    assert is_unipotent(u)
    m = squarefree_part(charpoly(s))
    assert matrix_poly(m, s).is_zero()
    assert len(upoly_gcd(m, upoly_deriv(m))) == 1


@settings(max_examples=60, deadline=None)
@given(mat3)
def test_finite_order_is_exact(a):
    k = finite_order(a)
    if k is None:
        return
    assert (a ** k).is_identity()
    power = QMatrix.identity(3)
    for _ in range(1, k):
        power = power @ a
        assert not power.is_identity()


def test_one_param_closure_contains_powers():
    for u in [T, QMatrix([[1, 2, 3], [0, 1, 4], [0, 0, 1]]), QMatrix([[1, 0, 0], [1, 1, 0], [0, 1, 1]])]:
        J = one_param_closure(u)
        power = u
        for _ in range(3):
            assert J.vanishes_at(list(power.flat()))
            power = power @ u


def test_kernel_and_image_dimensions():
    rng = random.Random(1)
    for _ in range(40):
        a = QMatrix([[rng.randint(-1, 1) for _ in range(4)] for _ in range(4)])
        assert kernel(a).dim + image(a).dim == 4
        assert image(a).dim == a.rank()
        assert all(not any(a.apply(v)) for v in kernel(a).basis)


def test_rational_inputs_are_exact():
    half = QMatrix([[Q("1/3"), 0], [0, 3]])
    assert (half @ half.inverse()).is_identity()
