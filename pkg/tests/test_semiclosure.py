import random
from math import comb

import pytest

from polyinv.constructible import Cell, ConstructibleSet, boolean, closure, matrix_space, member, rank_stratum
from polyinv.family import Piece
from polyinv.idealkit import Ideal, contains, dimension
from polyinv.matgeom import QMatrix, Subspace
from polyinv.polycore import Q
from polyinv.semiclosure import (
    Context,
    SemiClosure,
    bfs_distances,
    build_graph,
    certify,
    enumerate_paths,
    is_finite,
    max_rank_closure,
    nontrivial_sccs,
    path_labels,
    pieces_to_set,
    rank_stratify,
    scc_closure,
    semigroup_closure,
    strongly_connected,
)

from conftest import E, S, T

SP2 = matrix_space(2)
E1, E2 = Subspace(2, [(1, 0)]), Subspace(2, [(0, 1)])
F = QMatrix.diag([0, 1])
NIL = QMatrix([[0, 0], [1, 0]])
DET = "x_1_1*x_2_2 - x_1_2*x_2_1"


def ideal2(*texts):
    return Ideal.parse(SP2, texts)


def random_rank_matrix(rng, n, r):
    while True:
        L = QMatrix([[rng.randint(-1, 1) for _ in range(r)] for _ in range(n)])
        R = QMatrix([[rng.randint(-1, 1) for _ in range(n)] for _ in range(r)])
        M = L @ R
        if M.rank() == r:
            return M


def random_words(rng, gens, count=200, maxlen=8):
    for _ in range(count):
        w = rng.choice(gens)
        for _ in range(rng.randint(0, maxlen - 1)):
            w = w @ rng.choice(gens)
        yield w


# ---------------------------------------------------------------- graph


def test_rank_stratify():
    assert rank_stratify([S, T, E]) == {2: [S, T], 1: [E]}
    zero = QMatrix.zero(2)
    assert rank_stratify([zero]) == {0: [zero]}
    assert rank_stratify([QMatrix.identity(2), E]) == {2: [QMatrix.identity(2)], 1: [E]}


def test_build_graph_examples():
    G = build_graph([E], 1)
    assert G.vertices == [(E2, E1)]
    assert [(u, a, w) for u, a, w, _ in G.edges] == [(0, E, 0)]
    assert build_graph([NIL], 1).vertices == []
    G2 = build_graph([E, F], 1)
    assert len(G2.vertices) == 2
    assert sorted((u, w) for u, _, w, _ in G2.edges) == [(0, 0), (1, 1)]


def test_nontrivial_scc_examples():
    assert len(nontrivial_sccs(build_graph([E], 1))) == 1
    assert nontrivial_sccs(build_graph([NIL], 1)) == []
    assert len(nontrivial_sccs(build_graph([E, F], 1))) == 2


def test_path_labels_examples():
    assert path_labels(build_graph([E], 1), 3) == [E]
    a = QMatrix.diag([2, 0])
    labels = path_labels(build_graph([a], 1), 2, allow_pseudo=True)
    assert a in labels and a @ a in labels
    assert QMatrix.diag([Q("1/2"), 0]) in labels
    assert QMatrix.diag([1, 0]) in labels
    assert path_labels(build_graph([NIL], 1), 4) == []


def test_scc_closure_examples():
    (s,) = nontrivial_sccs(build_graph([E], 1))
    assert closure(scc_closure(build_graph([E], 1), s)) == Ideal.point(SP2, E.flat())
    a = QMatrix.diag([2, 0])
    G = build_graph([a], 1)
    (s,) = nontrivial_sccs(G)
    assert closure(scc_closure(G, s)) == ideal2("x_1_2", "x_2_1", "x_2_2")


def test_scc_closure_of_scaling_block():
    # eigenvalues 4, 2, 1 on the block: the closure is the torus (t², t, 1) up to conjugation
    f2 = QMatrix([[10, -8, 0], [6, -4, 0], [0, 0, 1]])
    G = build_graph([f2], 3)
    (s,) = nontrivial_sccs(G)
    J = closure(scc_closure(G, s))
    for k in range(-2, 6):
        assert J.vanishes_at(list((f2 ** k if k >= 0 else f2.inverse() ** -k).flat()))
    assert dimension(J) == 1


def test_max_rank_closure_examples():
    sl2 = max_rank_closure([S, T], 2)
    assert closure(sl2) == ideal2(f"{DET} - 1")
    assert closure(max_rank_closure([E], 1)) == Ideal.point(SP2, E.flat())
    line = max_rank_closure([QMatrix.diag([2, 0])], 1)
    assert closure(line) == ideal2("x_1_2", "x_2_1", "x_2_2")
    assert not member([0, 0, 0, 0], line)
    assert member([5, 0, 0, 0], line)


# ---------------------------------------------------------------- semigroup closure


def test_semigroup_closure_examples():
    H = semigroup_closure([S, T, E])
    assert H.exact
    assert H.combined_ideal() == ideal2(f"({DET})^2 - ({DET})")
    line = semigroup_closure([QMatrix([[2]])])
    assert line.combined_ideal() == Ideal.zero(matrix_space(1))
    empty = semigroup_closure([], n=2)
    assert empty.pieces == [] and empty.combined_ideal().is_unit()


def test_semigroup_closure_of_orthogonal_idempotents():
    H = semigroup_closure([E, F])
    pts = {QMatrix.from_flat(p.origin, 2) for p in H.pieces}
    assert pts == {E, F, QMatrix.zero(2)}


def test_semigroup_closure_of_nilpotent():
    H = semigroup_closure([NIL])
    assert {QMatrix.from_flat(p.origin, 2) for p in H.pieces} == {NIL, QMatrix.zero(2)}


def test_monoid_adds_identity():
    H = semigroup_closure([QMatrix([[0, 1], [1, 0]])], monoid=True)
    assert H.contains_point(QMatrix.identity(2))
    assert not semigroup_closure([E], monoid=False).contains_point(QMatrix.identity(2))


def test_constructible_generators():
    line = ConstructibleSet(SP2, (Cell.closed(ideal2("x_1_1 - 1", "x_2_2 - 1", "x_2_1")),))
    H = semigroup_closure(line)
    assert H.exact
    assert H.combined_ideal() == ideal2("x_1_1 - 1", "x_2_2 - 1", "x_2_1")


# ---------------------------------------------------------------- certificates and finiteness


def test_certify_examples():
    H = semigroup_closure([S, T, E])
    assert certify(H, [S, T, E])
    one = semigroup_closure([QMatrix([[1]])])
    assert not certify(one, [QMatrix([[2]])])
    assert not certify(SemiClosure(2, [], "exact"), [S])
    everything = SemiClosure(2, [Piece.from_ideal(Ideal.zero(SP2), (2, 2))], "exact")
    assert certify(everything, [S, T, E, QMatrix.diag([5, 7])])


def test_is_finite_examples():
    swap = QMatrix([[0, 1], [1, 0]])
    assert tuple(is_finite([swap])) == (True, 2)
    assert tuple(is_finite([QMatrix([[2]])])) == (False, None)
    assert tuple(is_finite([E])) == (True, 1)


def test_is_finite_symmetric_group():
    t = QMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    c = QMatrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert tuple(is_finite([t, c])) == (True, 6)


# ---------------------------------------------------------------- properties


def graph_pool(count=100, seed=21):
    rng = random.Random(seed)
    for _ in range(count):
        r = rng.choice([1, 2])
        k = rng.randint(1, 4)
        yield r, [random_rank_matrix(rng, 3, r) for _ in range(k)]


def test_graph_propositions():
    for r, A in graph_pool():
        G = build_graph(A, r)
        bound = comb(3, r)
        sccs = nontrivial_sccs(G)
        assert len(sccs) <= bound
        for v in range(len(G.vertices)):
            assert all(d <= bound + 1 for d in bfs_distances(G, v).values())
        hit = {v for s in sccs for v in s.vertices}
        for verts, label in enumerate_paths(G, 2 * bound):
            assert any(v in hit for v in verts)
            assert label.rank() == r
        for label in path_labels(G, bound + 2, allow_pseudo=True):
            assert label.rank() == r


def test_scc_partition():
    for r, A in graph_pool(30, seed=3):
        G = build_graph(A, r)
        verts = sorted(v for s in strongly_connected(G) for v in s.vertices)
        assert verts == list(range(len(G.vertices)))


SEMI_POOL = [
    [S, T, E],
    [QMatrix.diag([2, 0])],
    [E, F],
    [NIL, E],
    [QMatrix([[1, 1], [0, 0]]), QMatrix([[0, 0], [1, 1]])],
    [QMatrix.diag([2, 3]), E],
    [QMatrix([[0, 1], [0, 0]]), QMatrix([[0, 0], [1, 0]])],
    [QMatrix([[2, 0, 0], [0, 1, 0], [0, 0, 0]]), QMatrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])],
]


@pytest.mark.parametrize("A", SEMI_POOL, ids=range(len(SEMI_POOL)))
def test_sandwich_and_certificate(A):
    H = semigroup_closure(A)
    assert H.exact
    J = H.combined_ideal()
    for w in random_words(random.Random(5), A):
        assert J.vanishes_at(list(w.flat()))
    assert certify(H, A)


@pytest.mark.parametrize("A", SEMI_POOL, ids=range(len(SEMI_POOL)))
def test_pseudo_inverses_lie_in_closure(A):
    ctx_H = semigroup_closure(A)
    J = ctx_H.combined_ideal()
    for p in ctx_H.context.pseudo_inverses:
        assert J.vanishes_at(list(p.flat()))


@pytest.mark.parametrize("A", [[S, T], [E], [QMatrix.diag([2, 0])], [E, F], [QMatrix([[1, 1], [0, 0]]), QMatrix([[0, 0], [1, 1]])]])
def test_rank_filter_identity(A):
    n = A[0].n
    r = max(a.rank() for a in A)
    direct = closure(max_rank_closure(A, r))
    H = semigroup_closure(A)
    via = closure(boolean(pieces_to_set(H.pieces, n), rank_stratum(n, r), "intersect"))
    assert contains(direct, via) and contains(via, direct)


def test_deterministic_for_fixed_seed():
    a = semigroup_closure([S, T, E], seed=3)
    b = semigroup_closure([S, T, E], seed=3)
    assert [P.global_ideal(SP2) for P in a.pieces] == [P.global_ideal(SP2) for P in b.pieces]


def test_context_degrade_records_reason():
    ctx = Context()
    ctx.degrade("bound")
    assert ctx.status == "lower-bound" and ctx.notes == ["bound"]
