"""Zariski closure of a finitely generated matrix semigroup.

The closure is computed by induction on the maximum rank r of the
generators.  Elements of rank r are organized by the generating graph,
whose vertices are transversal pairs (U, V) of subspaces with dim V = r and
whose edges a: (U, V) → (U', V') satisfy ker a = U and im a = V'.  Each
strongly connected component contributes a group closure computed on
r×r blocks, the rank-r part is closed up under products, and the products
that drop rank feed the next level of the induction.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import networkx as nx

from .constructible import Cell, ConstructibleSet, boolean, matrix_space, rank_stratum, witness_point
from .errors import InputError
from .family import Family, Piece, add_maximal, piece_product, random_point
from .groupclosure import ClosureResult, group_closure
from .idealkit import INFINITE, Ideal, intersect, quotient_basis, radical_member
from .matgeom import QMatrix, Subspace, pseudo_inverse, space_data, transversal
from .polycore import VarSpace

# ---------------------------------------------------------------- graph


@dataclass
class GenGraph:
    n: int
    r: int
    vertices: list[tuple[Subspace, Subspace]]
    edges: list[tuple[int, QMatrix, int, bool]]

    def successors(self, v: int, allow_pseudo: bool = False) -> list[tuple[QMatrix, int]]:
        return [(a, w) for (u, a, w, pseudo) in self.edges if u == v and (allow_pseudo or not pseudo)]


@dataclass
class SCC:
    vertices: list[int]
    nontrivial: bool


def rank_stratify(A: Sequence[QMatrix]) -> dict[int, list[QMatrix]]:
    out: dict[int, list[QMatrix]] = {}
    for a in A:
        out.setdefault(a.rank(), []).append(a)
    return dict(sorted(out.items(), reverse=True))


def build_graph(A_r: Sequence[QMatrix], r: int) -> GenGraph:
    """Vertices from generator kernels and images; only such pairs can lie on a cycle."""
    if not A_r:
        return GenGraph(0, r, [], [])
    n = A_r[0].n
    data = [space_data(a) for a in A_r]
    for rk, _, _ in data:
        if rk != r:
            raise InputError("build_graph needs matrices of one rank")
    kernels = sorted(set(k for _, k, _ in data))
    images = sorted(set(im for _, _, im in data))
    vertices = [(U, V) for U in kernels for V in images if transversal(U, V)]
    vertices.sort(key=lambda uv: (uv[0], uv[1]))
    index = {uv: i for i, uv in enumerate(vertices)}
    edges = []
    for a, (_, ker, im) in zip(A_r, data):
        for (U, V), i in index.items():
            if U != ker:
                continue
            for (U2, V2), j in index.items():
                if V2 == im:
                    edges.append((i, a, j, False))
    return GenGraph(n, r, vertices, edges)


def strongly_connected(G: GenGraph) -> list[SCC]:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(G.vertices)))
    graph.add_edges_from((u, w) for u, _, w, pseudo in G.edges if not pseudo)
    out = []
    for comp in nx.strongly_connected_components(graph):
        verts = sorted(comp)
        out.append(SCC(verts, len(verts) > 1 or graph.has_edge(verts[0], verts[0])))
    out.sort(key=lambda s: s.vertices[0])
    return out


def nontrivial_sccs(G: GenGraph) -> list[SCC]:
    return [s for s in strongly_connected(G) if s.nontrivial]


def bfs_distances(G: GenGraph, source: int) -> dict[int, int]:
    """Shortest path lengths (in edges, at least one edge) from ``source``."""
    dist: dict[int, int] = {}
    frontier = deque()
    for _, w in G.successors(source):
        if w not in dist:
            dist[w] = 1
            frontier.append(w)
    while frontier:
        v = frontier.popleft()
        for _, w in G.successors(v):
            if w not in dist:
                dist[w] = dist[v] + 1
                frontier.append(w)
    return dist


def with_pseudo_edges(G: GenGraph) -> GenGraph:
    """Add, for each edge inside a nontrivial SCC, the reversed pseudo-inverse edge."""
    comp_of = {}
    for s in nontrivial_sccs(G):
        for v in s.vertices:
            comp_of[v] = tuple(s.vertices)
    extra = []
    for u, a, w, pseudo in G.edges:
        if pseudo or comp_of.get(u) is None or comp_of.get(u) != comp_of.get(w):
            continue
        Uw, _ = G.vertices[w]
        _, Vu = G.vertices[u]
        extra.append((w, pseudo_inverse(a, Uw, Vu), u, True))
    return GenGraph(G.n, G.r, G.vertices, G.edges + extra)


def enumerate_paths(G: GenGraph, length: int, allow_pseudo: bool = False, guard: int = 200000):
    """All (vertex sequence, label) pairs for paths with exactly ``length`` edges."""
    paths = [((v,), None) for v in range(len(G.vertices))]
    for _ in range(length):
        nxt = []
        for verts, label in paths:
            for a, w in G.successors(verts[-1], allow_pseudo):
                nxt.append((verts + (w,), a if label is None else a @ label))
                if len(nxt) > guard:
                    raise MemoryError("path enumeration exceeded its guard")
        paths = nxt
    return paths


def path_labels(G: GenGraph, maxlen: int, frm=None, to=None, allow_pseudo: bool = False, guard: int = 200000) -> list[QMatrix]:
    """Distinct labels a_m⋯a_1 of paths with 1 ≤ m ≤ maxlen, endpoints optionally fixed."""
    if maxlen < 1:
        raise InputError("maxlen must be at least 1")
    H = with_pseudo_edges(G) if allow_pseudo else G
    states = {(v, None) for v in range(len(H.vertices)) if frm is None or v == frm}
    seen_states = set()
    labels: list[QMatrix] = []
    found = set()
    for _ in range(maxlen):
        nxt = set()
        for v, label in states:
            for a, w in H.successors(v, allow_pseudo):
                lab = a if label is None else a @ label
                st = (w, lab)
                if st in seen_states:
                    continue
                seen_states.add(st)
                nxt.add(st)
                if (to is None or w == to) and lab not in found:
                    found.add(lab)
                    labels.append(lab)
                if len(seen_states) > guard:
                    raise MemoryError("path enumeration exceeded its guard")
        states = nxt
        if not states:
            break
    return labels


# ---------------------------------------------------------------- SCC closures


@dataclass
class Context:
    seed: int = 0
    max_group_iter: int = 50
    max_enrich: int = 25
    fixpoint_rounds: int = 6
    rng: random.Random = field(default=None)
    status: str = "exact"
    notes: list = field(default_factory=list)
    pseudo_inverses: list = field(default_factory=list)
    group_results: list = field(default_factory=list)

    def __post_init__(self):
        if self.rng is None:
            self.rng = random.Random(self.seed)

    def degrade(self, why: str):
        self.status = "lower-bound"
        self.notes.append(why)


def _projection(U: Subspace, V: Subspace) -> tuple[QMatrix, QMatrix, QMatrix]:
    """y = [basis V | basis U], y⁻¹, and the idempotent onto V along U."""
    n = U.ambient
    r = V.dim
    y = QMatrix.from_columns(list(V.basis) + list(U.basis))
    yinv = y.inverse()
    e = y @ QMatrix.diag([1] * r + [0] * (n - r)) @ yinv
    return y, yinv, e


def scc_pieces(G: GenGraph, S: SCC, ctx: Context) -> list[Piece]:
    """Closure of the labels of paths inside one nontrivial SCC, as pieces of rank r.

    A spanning tree from the base vertex v* gives labels f_v (v* → v) and
    pseudo-inverses f_v⁺; the loops g_e = f_w⁺·a·f_v over the SCC edges
    generate the group on the r×r block at v*, and every path label from u
    to w lies in f_w·H·f_u⁺.
    """
    n, r = G.n, G.r
    verts = sorted(S.vertices)
    base = verts[0]
    Ub, Vb = G.vertices[base]
    y, yinv, e = _projection(Ub, Vb)
    members = set(verts)
    tree = {base: e}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for a, w in G.successors(v):
            if w in members and w not in tree:
                tree[w] = a @ tree[v]
                queue.append(w)
    plus = {}
    for v in verts:
        Uv, _ = G.vertices[v]
        plus[v] = e if v == base else pseudo_inverse(tree[v], Uv, Vb)
        if v != base:
            ctx.pseudo_inverses.append(plus[v])
    blocks = []
    seen = set()
    for u, a, w, pseudo in G.edges:
        if pseudo or u not in members or w not in members:
            continue
        g = plus[w] @ a @ tree[u]
        c = (yinv @ g @ y).block(range(r), range(r))
        if c not in seen:
            seen.add(c)
            blocks.append(c)
    result = group_closure(blocks, max_iter=ctx.max_group_iter, seed=ctx.rng.randint(0, 2**31))
    ctx.group_results.append(result)
    if not result.exact:
        ctx.degrade("group closure of an SCC block hit its iteration bound")
    YV = y.block(range(n), range(r))
    Yt = yinv.block(range(r), range(n))
    pieces: list[Piece] = []
    for coset in result.cosets:
        for w in verts:
            left = tree[w] @ YV
            for u in verts:
                right = Yt @ plus[u]
                F = coset.family.left(left).right(right)
                P = Piece.point(F.evaluate([])) if F.k == 0 else Piece.from_family(F, ctx.rng)
                add_maximal(pieces, P, ctx.rng)
    return pieces


def scc_closure(G: GenGraph, S: SCC, seed: int = 0) -> ConstructibleSet:
    ctx = Context(seed=seed)
    return pieces_to_set(scc_pieces(G, S, ctx), G.n)


def _piece_rank(P: Piece, rng: random.Random) -> int:
    return P.as_point().rank() if P.is_point() else P.rank(rng)


def max_rank_pieces(A_r: Sequence[QMatrix], r: int, ctx: Context) -> list[Piece]:
    """Pieces whose union is Zcl(⟨A_r⟩) ∩ R_r up to lower-rank boundary points.

    Every piece has constant kernel and image, hence constant rank, so
    filtering products by rank at a random point is exact.
    """
    n = A_r[0].n
    G = build_graph(A_r, r)
    E: list[Piece] = []
    for a in A_r:
        add_maximal(E, Piece.point(a), ctx.rng)
    for S in nontrivial_sccs(G):
        for P in scc_pieces(G, S, ctx):
            add_maximal(E, P, ctx.rng)
    Z = list(E)
    new = list(E)
    kappa = 2 * comb(n, r) ** 2
    for _ in range(kappa):
        newer = []
        for e in E:
            we = _sample(e, ctx.rng)
            for z in new:
                if (we @ _sample(z, ctx.rng)).rank() < r:
                    continue
                F = _product_family(e, z)
                if any(R.contains_family(F, ctx.rng) for R in Z):
                    continue
                P = Piece.point(F.evaluate([])) if F.k == 0 else Piece.from_family(F, ctx.rng)
                if add_maximal(Z, P, ctx.rng):
                    newer.append(P)
        new = [P for P in newer if any(P is R for R in Z)]
        if not new:
            break
    return Z


def max_rank_closure(A_r: Sequence[QMatrix], r: int, seed: int = 0) -> ConstructibleSet:
    """Zcl(⟨A_r⟩) ∩ R_r as a constructible set."""
    ctx = Context(seed=seed)
    n = A_r[0].n
    pieces = max_rank_pieces(A_r, r, ctx)
    return boolean(pieces_to_set(pieces, n), rank_stratum(n, r), "intersect")


def _product_family(P: Piece, Q: Piece) -> Family:
    return P.family @ Q.family


def _sample(P: Piece, rng: random.Random) -> QMatrix:
    """A random element; ranks of products of pieces are read off samples."""
    return P.as_point() if P.is_point() else P.family.evaluate(random_point(rng, P.family.k))


def pieces_to_set(pieces: Sequence[Piece], n: int) -> ConstructibleSet:
    space = matrix_space(n)
    return ConstructibleSet(space, tuple(Cell.closed(P.global_ideal(space)) for P in pieces))


# ---------------------------------------------------------------- the induction


@dataclass
class SemiClosure:
    n: int
    pieces: list[Piece]
    status: str
    notes: list = field(default_factory=list)
    context: Context | None = field(default=None, repr=False)
    _ideal: Ideal | None = field(default=None, repr=False)

    @property
    def exact(self) -> bool:
        return self.status == "exact"

    def piece_ideals(self) -> list[Ideal]:
        space = matrix_space(self.n)
        return [P.global_ideal(space) for P in self.pieces]

    def combined_ideal(self) -> Ideal:
        if self._ideal is None:
            space = matrix_space(self.n)
            result = Ideal.unit(space)
            # intersect small ideals first to keep intermediate bases small
            for I in sorted(self.piece_ideals(), key=lambda I: -len(I.generators)):
                result = intersect(result, I)
            self._ideal = result
        return self._ideal

    def contains_point(self, M: QMatrix) -> bool:
        return any(P.contains_point(M) for P in self.pieces)

    def as_set(self) -> ConstructibleSet:
        return pieces_to_set(self.pieces, self.n)


def _generator_pieces(A, ctx: Context) -> tuple[int, list[QMatrix], list[Piece]]:
    if isinstance(A, ConstructibleSet):
        size = len(A.space)
        n = int(round(size ** 0.5))
        if n * n != size or A.space != matrix_space(n):
            raise InputError("constructible generators must live over plain matrix coordinates")
        from .constructible import cell_closure

        pts, fams = [], []
        for c in A.cells:
            I = cell_closure(c)
            if I.is_unit():
                continue
            P = Piece.from_ideal(I, (n, n))
            if P.is_point():
                pts.append(P.as_point())
            else:
                fams.append(P)
        return n, pts, fams
    A = list(A)
    if not A:
        return 0, [], []
    n = A[0].n
    for a in A:
        if a.shape != (n, n):
            raise InputError("generators must be square matrices of one size")
    return n, A, []


def semigroup_closure(
    A,
    seed: int = 0,
    max_group_iter: int = 50,
    max_enrich: int = 25,
    monoid: bool = False,
    n: int | None = None,
) -> SemiClosure:
    """Zcl(⟨A⟩) for a finite list of matrices or a constructible set of generators.

    With ``monoid=True`` the identity is adjoined (the closure of A*).
    """
    ctx = Context(seed=seed, max_group_iter=max_group_iter, max_enrich=max_enrich)
    dim, points, fams = _generator_pieces(A, ctx)
    dim = dim or (n or 0)
    pieces = _closure(points, fams, ctx) if (points or fams) else []
    if monoid and dim:
        add_maximal(pieces, Piece.point(QMatrix.identity(dim)), ctx.rng)
    pieces = _order_pieces(pieces)
    return SemiClosure(dim, pieces, ctx.status, ctx.notes, ctx)


def _order_pieces(pieces: list[Piece]) -> list[Piece]:
    return sorted(pieces, key=lambda P: (-P.dim, P.origin, P.dirs))


def _distinct(points: Iterable[QMatrix]) -> list[QMatrix]:
    out, seen = [], set()
    for p in points:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _closure(points: list[QMatrix], fams: list[Piece], ctx: Context) -> list[Piece]:
    if fams:
        return _closure_with_families(points, fams, ctx)
    points = _distinct(points)
    if not points:
        return []
    n = points[0].n
    strata = rank_stratify(points)
    r = max(strata)
    if r == 0:
        return [Piece.point(QMatrix.zero(n))]
    A_r = strata[r]
    B = max_rank_pieces(A_r, r, ctx)
    lower: list[Piece] = []
    for a in points:
        if a.rank() < r:
            add_maximal(lower, Piece.point(a), ctx.rng)
    samples = [_sample(b, ctx.rng) for b in B]
    for b, wb in zip(B, samples):
        for a in points:
            cand = []
            if (wb @ a).rank() < r:
                cand.append(b.family.right(a))
            if (a @ wb).rank() < r:
                cand.append(b.family.left(a))
            wba = wb @ a
            cand += [b.family.right(a) @ b2.family for b2, w2 in zip(B, samples) if (wba @ w2).rank() < r]
            for F in cand:
                if any(R.contains_family(F, ctx.rng) for R in lower):
                    continue
                P = Piece.point(F.evaluate([])) if F.k == 0 else Piece.from_family(F, ctx.rng)
                add_maximal(lower, P, ctx.rng)
    sub_points = [P.as_point() for P in lower if P.is_point()]
    sub_fams = [P for P in lower if not P.is_point()]
    sub = _closure(sub_points, sub_fams, ctx) if lower else []
    result = list(B)
    for P in sub:
        add_maximal(result, P, ctx.rng)
    return result


def _witness(P: Piece, ctx: Context) -> QMatrix:
    if P.family is not None:
        return P.witness()
    space = matrix_space(P.shape[0])
    pt = witness_point(ConstructibleSet(space, (Cell.closed(P.global_ideal(space)),)), seed=ctx.seed)
    return QMatrix.from_flat(pt, P.shape[0])


def _closure_with_families(points: list[QMatrix], fams: list[Piece], ctx: Context) -> list[Piece]:
    """Witness skeleton: close finitely many witness points exactly, then close up under products.

    The result contains the generators and is stable under products, so it
    contains the semigroup closure; every piece is a product closure of
    elements of that closure, so it is contained in it.
    """
    witnesses = _distinct(list(points) + [_witness(P, ctx) for P in fams])
    enrich = 0
    while True:
        base = _closure(witnesses, [], ctx)
        S: list[Piece] = []
        for P in base + fams + [Piece.point(p) for p in points]:
            add_maximal(S, P, ctx.rng)
        # base is already a closed semigroup, so only pairs involving a
        # piece from outside it can produce something new
        new = [P for P in S if not any(P is B for B in base)]
        for _ in range(ctx.fixpoint_rounds):
            newer = []
            snapshot = list(S)
            pairs = [(P, Q) for P in snapshot for Q in new] + [(Q, P) for P in snapshot for Q in new]
            seen_pairs = set()
            for P, Q in pairs:
                key = (id(P), id(Q))
                if key in seen_pairs:
                    continue
                seen_pairs.add(key)
                if P.family is not None and Q.family is not None:
                    F = P.family @ Q.family
                    if any(R.contains_family(F, ctx.rng) for R in S):
                        continue
                prod = piece_product(P, Q, ctx.rng)
                if add_maximal(S, prod, ctx.rng):
                    newer.append(prod)
            new = [P for P in newer if any(P is R for R in S)]
            if not new:
                return S
        enrich += 1
        if enrich > ctx.max_enrich:
            ctx.degrade("product fixpoint over constructible generators did not stabilize")
            return S
        witnesses = _distinct(witnesses + [_witness(P, ctx) for P in new])


# ---------------------------------------------------------------- certificates and finiteness


def certify(H: SemiClosure, A) -> bool:
    """Generators lie in H and H is stable under products (hence a closed semigroup)."""
    rng = random.Random(12345)
    pieces = H.pieces
    if isinstance(A, ConstructibleSet):
        combined = H.combined_ideal()
        from .constructible import cell_closure

        for c in A.cells:
            I = cell_closure(c)
            if not all(radical_member(I, g) for g in combined.generators):
                return False
    else:
        for a in A:
            if not H.contains_point(a):
                return False
    for P in pieces:
        for Q in pieces:
            if P.family is not None and Q.family is not None:
                F = P.family @ Q.family
                if not any(R.contains_family(F, rng) for R in pieces):
                    return False
            else:
                prod = piece_product(P, Q, rng)
                if not any(R.contains(prod, rng) for R in pieces):
                    space = matrix_space(H.n)
                    combined = H.combined_ideal()
                    pi = prod.global_ideal(space)
                    if not all(radical_member(pi, g) for g in combined.generators):
                        return False
    return True


@dataclass(frozen=True)
class Finiteness:
    finite: bool | None
    count_bound: int | None
    status: str

    def __iter__(self):
        return iter((self.finite, self.count_bound))


def is_finite(A: Sequence[QMatrix], seed: int = 0) -> Finiteness:
    """Finite iff the closure ideal has a finite staircase; inconclusive on lower bounds."""
    H = semigroup_closure(A, seed=seed)
    if not H.exact:
        return Finiteness(None, None, H.status)
    if not H.pieces:
        return Finiteness(True, 0, H.status)
    qb = quotient_basis(H.combined_ideal())
    if qb is INFINITE:
        return Finiteness(False, None, H.status)
    return Finiteness(True, len(qb), H.status)
