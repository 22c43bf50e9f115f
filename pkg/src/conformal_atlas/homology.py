"""Homology generators, intersection numbers, canonical handle bases and cutting.

Generators come from a Smith-normal-form reduction of the boundary operators:
the kernel of the vertex boundary is spanned by the fundamental cycles of a
shortest-path tree (a zero-fill pivot order for that matrix), and the face
boundary, written in those coordinates, is reduced with unit pivots.  The rows
left unpivoted are the homology generators and the pivot rows form a dual
spanning tree, which is what :func:`integer_cocycles` peels to build the dual
integer cochains.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .mesh import Mesh, euler_genus, next_halfedge, prev_halfedge
from .simplicial import Chain, boundary_of, integrate
from .snf import eliminate_unimodular


class HomologyError(RuntimeError):
    pass


@dataclass(frozen=True)
class HomologyBasis:
    cycles: tuple
    canonical: bool = False
    method: str = "snf"
    transform: np.ndarray | None = None
    tree_parent: np.ndarray | None = field(default=None, repr=False)
    cotree_edges: np.ndarray | None = field(default=None, repr=False)
    generator_edges: tuple = ()

    @property
    def genus(self):
        return len(self.cycles) // 2

    def loops(self):
        return [c.loop for c in self.cycles]

    def to_json(self):
        return {
            "canonical": self.canonical,
            "method": self.method,
            "cycles": [list(c.loop) if c.loop is not None else
                       {"edges": [[k, v] for k, v in c.coeffs.items()]} for c in self.cycles],
        }


@dataclass(frozen=True)
class IntersectionMatrix:
    """``pairing[i, j] = e_i . e_j`` (algebraic crossing count) and the matrix C used downstream."""

    pairing: np.ndarray
    C: np.ndarray
    convention: str

    @property
    def det(self):
        return int(round(np.linalg.det(self.pairing))) if len(self.pairing) else 1


@dataclass(frozen=True)
class FundamentalDomain:
    mesh: Mesh
    vertex_map: np.ndarray
    boundary: list
    cut_edges: np.ndarray


@dataclass(frozen=True)
class CurveClass:
    values: np.ndarray
    rounded: np.ndarray
    max_deviation: float

    @property
    def is_integral(self):
        return self.max_deviation < 1e-6

    @property
    def is_zero(self):
        return self.is_integral and not self.rounded.any()


# ----------------------------------------------------------------------
# helpers

def _he(m, u, v):
    e, s = m.edge_index(u, v)
    return int(m.edge_halfedges[e, 0 if s > 0 else 1])


def _rot(m, h):
    """Next outgoing halfedge counter-clockwise around the tail of ``h``."""
    return int(m.he_twin[prev_halfedge(h)])


def _fan(m, h_from, h_to):
    """Heads of outgoing halfedges strictly between h_from and h_to, ccw."""
    out = []
    h = _rot(m, h_from)
    guard = 0
    while h != h_to:
        out.append(h)
        h = _rot(m, h)
        guard += 1
        if h < 0 or guard > 10_000:
            raise HomologyError("rotation walk failed (boundary or non-manifold vertex)")
    return out


def _tree_path(parent, v):
    path = [int(v)]
    while parent[path[-1]] >= 0:
        path.append(int(parent[path[-1]]))
    return path


def _fundamental_loop(parent, u, v):
    pu = _tree_path(parent, u)
    pv = _tree_path(parent, v)
    su = set(pu)
    lca = next(x for x in pv if x in su)
    pu = pu[:pu.index(lca) + 1]
    pv = pv[:pv.index(lca)]
    # lca -> ... -> u -> v -> ... -> (child of lca)
    return list(reversed(pu)) + pv


def _shortest_path_tree(m, root, allowed=None, weights=None):
    A = m.vertex_adjacency(weights)
    if allowed is not None:
        D = sparse.diags(allowed.astype(float))
        A = (D @ A @ D).tocsr()
        A.eliminate_zeros()
    dist, pred = csgraph.dijkstra(A, directed=False, indices=int(root), return_predecessors=True)
    pred = np.where(pred < 0, -1, pred).astype(np.int64)
    return dist, pred


def loop_length(m, loop):
    u = np.asarray(loop)
    return float(np.linalg.norm(m.vertices[np.roll(u, -1)] - m.vertices[u], axis=1).sum())


# ----------------------------------------------------------------------
# generators

def homology_basis(m, root=0):
    """Integer homology generators of a closed mesh as simple vertex loops."""
    _, g = euler_genus(m)
    dist, parent = _shortest_path_tree(m, root)
    if not np.isfinite(dist).all():
        raise HomologyError("mesh is disconnected")
    E = m.n_edges
    child = np.arange(m.n_vertices)
    has_parent = parent >= 0
    te, _ = m.edge_lookup(parent[has_parent], child[has_parent])
    is_tree = np.zeros(E, bool)
    is_tree[te] = True
    # face boundary in cycle-space coordinates: one row per non-tree edge
    rows = {}
    for e in np.flatnonzero(~is_tree).tolist():
        f0, f1 = m.edge_faces[e]
        d = {}
        if f0 >= 0:
            d[int(f0)] = 1
        if f1 >= 0:
            d[int(f1)] = d.get(int(f1), 0) - 1
        rows[e] = d
    pivots, leftover, residual = eliminate_unimodular(rows)
    if residual:
        raise HomologyError("face boundary reduction left a non-unit residue")
    if m.closed and len(leftover) != 2 * g:
        raise HomologyError(f"expected {2 * g} generators, found {len(leftover)}")
    cycles = []
    for e in leftover:
        u, v = (int(x) for x in m.edges[e])
        loop = _fundamental_loop(parent, u, v)
        cycles.append(Chain.from_vertex_loop(m, loop))
    cotree = np.array(sorted(r for r, _ in pivots), np.int64)
    return HomologyBasis(tuple(cycles), False, "snf", None, parent, cotree, tuple(leftover))


def integer_cocycles(m, basis):
    """(E, 2g) integer cochains dual to the generator loops of ``basis``.

    Zero on tree edges, Kronecker on generator edges, and solved on the dual
    spanning tree by peeling faces with a single unknown edge.
    """
    gen = list(basis.generator_edges)
    k = len(gen)
    E = m.n_edges
    vals = np.zeros((E, k), np.int64)
    if k == 0:
        return vals
    known = np.ones(E, bool)
    known[basis.cotree_edges] = False
    for i, e in enumerate(gen):
        # generator loops traverse their edge in reference direction
        vals[e, i] = 1
    unknown_count = np.zeros(m.n_faces, np.int64)
    he_known = known[m.he_edge]
    unknown_count = (~he_known).reshape(-1, 3).sum(1)
    q = deque(np.flatnonzero(unknown_count == 1).tolist())
    while q:
        f = q.popleft()
        if unknown_count[f] != 1:
            continue
        hs = [3 * f, 3 * f + 1, 3 * f + 2]
        tgt = next(h for h in hs if not known[m.he_edge[h]])
        acc = np.zeros(k, np.int64)
        for h in hs:
            if h != tgt:
                acc += m.he_sign[h] * vals[m.he_edge[h]]
        e = m.he_edge[tgt]
        vals[e] = -m.he_sign[tgt] * acc
        known[e] = True
        for h in m.edge_halfedges[e]:
            if h >= 0:
                f2 = h // 3
                unknown_count[f2] -= 1
                if unknown_count[f2] == 1:
                    q.append(int(f2))
    if not known.all():
        raise HomologyError("cotree peeling did not reach every edge")
    return vals


def class_vector(m, cocycles, chain):
    out = np.zeros(cocycles.shape[1], np.int64)
    for e, c in chain.coeffs.items():
        out += c * cocycles[e]
    return out


# ----------------------------------------------------------------------
# closed walks and intersection numbers

def closed_walks(m, chain):
    """Split a 1-cycle into closed vertex walks (deterministic Hierholzer)."""
    if chain.loop is not None:
        return [list(chain.loop)]
    out = {}
    for e, c in chain.coeffs.items():
        u, v = (int(x) for x in m.edges[e])
        a, b = (u, v) if c > 0 else (v, u)
        out.setdefault(a, []).extend([b] * abs(c))
    for a in out:
        out[a].sort(reverse=True)
    walks = []
    while any(out.values()):
        start = min(a for a, lst in out.items() if lst)
        walk = [start]
        cur = start
        while True:
            lst = out.get(cur)
            if not lst:
                raise HomologyError("chain is not a cycle")
            cur = lst.pop()
            if cur == start:
                break
            walk.append(cur)
        walks.append(walk)
    return walks


def pushoff_cocycle(m, walk):
    """Cochain counting signed crossings with ``walk`` pushed to its left.

    For every cycle ``a``, ``sum(a * pushoff_cocycle(b)) == a . b`` where the
    crossing sign is +1 when (tangent a, tangent b) is positively oriented.
    """
    vals = np.zeros(m.n_edges, np.int64)
    n = len(walk)
    if n < 2:
        return vals
    for i in range(n):
        v, nxt, prv = walk[i], walk[(i + 1) % n], walk[i - 1]
        h_out = _he(m, v, nxt)
        h_back = _he(m, v, prv)
        for h in _fan(m, h_out, h_back):
            vals[m.he_edge[h]] -= m.he_sign[h]
    return vals


def dual_cocycle(m, chain):
    vals = np.zeros(m.n_edges, np.int64)
    for w in closed_walks(m, chain):
        vals += pushoff_cocycle(m, w)
    return vals


def intersection_number(m, a, b):
    pd = dual_cocycle(m, b)
    return int(sum(c * pd[e] for e, c in a.coeffs.items()))


def intersection_pairing(m, cycles):
    k = len(cycles)
    duals = [dual_cocycle(m, c) for c in cycles]
    I = np.zeros((k, k), np.int64)
    for i, a in enumerate(cycles):
        for j in range(k):
            I[i, j] = sum(c * duals[j][e] for e, c in a.coeffs.items())
    return I


def intersection_matrix(m, basis):
    """Intersection data of a basis.

    ``C`` equals the crossing pairing itself.  With crossings counted positive
    for (tangent e_i, tangent e_j) agreeing with the surface orientation, this
    is the sign that makes the imaginary-period matrix positive definite.
    """
    P = intersection_pairing(m, list(basis.cycles))
    return IntersectionMatrix(P, P.copy(), "C = +pairing")


def is_transversal(m, basis):
    seen = {}
    for i, c in enumerate(basis.cycles):
        for e in c.coeffs:
            if e in seen and seen[e] != i:
                return False
            seen[e] = i
    return True


# ----------------------------------------------------------------------
# canonical (symplectic) bases

def symplectic_transform(I):
    """Integer unimodular N with ``N.T @ I @ N == J``, J = [[0, Id], [-Id, 0]]."""
    I = np.asarray(I, np.int64)
    k = len(I)
    if k % 2:
        raise HomologyError("odd number of cycles")
    if k and not np.array_equal(I, -I.T):
        raise HomologyError("pairing is not antisymmetric")
    det = round(np.linalg.det(I.astype(float))) if k else 1
    if abs(det) != 1:
        raise HomologyError(f"not a basis: det C = {det}")
    g = k // 2

    def pair(x, y):
        return int(x @ I @ y)

    rest = [np.eye(k, dtype=np.int64)[:, i] for i in range(k)]
    A, B = [], []
    for _ in range(g):
        a = rest.pop(0)
        while True:
            pv = [pair(a, v) for v in rest]
            nz = [i for i, p in enumerate(pv) if p]
            if not nz:
                raise HomologyError("degenerate pairing")
            s = min(nz, key=lambda i: (abs(pv[i]), i))
            if len(nz) == 1:
                break
            for i in nz:
                if i != s:
                    rest[i] = rest[i] - (pv[i] // pv[s]) * rest[s]
        p = pv[s]
        if abs(p) != 1:
            raise HomologyError("pairing is not unimodular")
        b = rest.pop(s) * p
        rest = [v - pair(v, b) * a + pair(v, a) * b for v in rest]
        A.append(a)
        B.append(b)
    N = np.stack(A + B, 1) if k else np.zeros((0, 0), np.int64)
    return N


def standard_symplectic(g):
    J = np.zeros((2 * g, 2 * g), np.int64)
    J[:g, g:] = np.eye(g, dtype=np.int64)
    J[g:, :g] = -np.eye(g, dtype=np.int64)
    return J


def canonicalize_basis(m, basis):
    """Integer change of basis bringing the pairing to the standard symplectic form."""
    I = intersection_pairing(m, list(basis.cycles))
    N = symplectic_transform(I)
    if np.array_equal(N, np.eye(len(N), dtype=np.int64)):
        return HomologyBasis(basis.cycles, True, basis.method, N, basis.tree_parent,
                             basis.cotree_edges, basis.generator_edges)
    cycles = []
    for j in range(N.shape[1]):
        c = Chain(1, {})
        for i in range(N.shape[0]):
            if N[i, j]:
                c = c + int(N[i, j]) * basis.cycles[i]
        walks = closed_walks(m, c) if c.coeffs else []
        if len(walks) == 1 and len(set(walks[0])) == len(walks[0]):
            c = Chain(1, c.coeffs, tuple(walks[0]))
        cycles.append(c)
    return HomologyBasis(tuple(cycles), True, basis.method, N, basis.tree_parent,
                         basis.cotree_edges, basis.generator_edges)


# ----------------------------------------------------------------------
# geometric handle basis: a_i, b_i simple, meeting once; handles disjoint

def _tree_potentials(m, parent, root, cocycles, reach):
    k = cocycles.shape[1]
    P = np.zeros((m.n_vertices, k), np.int64)
    nodes = np.flatnonzero(reach & (parent >= 0))
    e, s = m.edge_lookup(parent[nodes], nodes)
    step = np.zeros((m.n_vertices, k), np.int64)
    step[nodes] = s[:, None] * cocycles[e]
    done = np.zeros(m.n_vertices, bool)
    done[root] = True
    frontier = np.array([root])
    while frontier.size:
        mark = np.zeros(m.n_vertices, bool)
        mark[frontier] = True
        ch = nodes[mark[parent[nodes]] & ~done[nodes]]
        P[ch] = P[parent[ch]] + step[ch]
        done[ch] = True
        frontier = ch
    return P


def shortest_nontrivial_loop(m, cocycles, allowed=None, n_basepoints=8):
    """Shortest homologically nontrivial loop through a few basepoints.

    Returns ``(loop, class_vector)``; loops avoid vertices where ``allowed`` is False.
    """
    V = m.n_vertices
    allowed = np.ones(V, bool) if allowed is None else np.asarray(allowed, bool)
    cand = np.flatnonzero(allowed)
    if cand.size == 0:
        raise HomologyError("no admissible vertices left")
    picks = cand[np.linspace(0, cand.size - 1, min(n_basepoints, cand.size)).astype(int)]
    lengths = m.edge_lengths()
    u, v = m.edges[:, 0], m.edges[:, 1]
    best = None
    for s in dict.fromkeys(picks.tolist()):
        dist, parent = _shortest_path_tree(m, s, allowed)
        reach = np.isfinite(dist)
        P = _tree_potentials(m, parent, s, cocycles, reach)
        ok = reach[u] & reach[v] & allowed[u] & allowed[v] & (parent[v] != u) & (parent[u] != v)
        cls = P[u] + cocycles - P[v]
        ok &= cls.any(1)
        if not ok.any():
            continue
        tot = np.where(ok, dist[u] + lengths + dist[v], np.inf)
        e = int(np.argmin(tot))
        if best is None or tot[e] < best[0] - 1e-12 * tot[e]:
            loop = _fundamental_loop(parent, int(u[e]), int(v[e]))
            best = (float(tot[e]), loop, cls[e])
    if best is None:
        raise HomologyError("no nontrivial loop in the admissible region")
    return best[1], best[2]


def crossing_loop(m, a, allowed=None, n_trials=8):
    """Simple loop meeting the simple loop ``a`` in one vertex, crossing it once.

    The returned loop starts at the shared vertex p, leaves to the left of
    ``a`` and returns from the right, so ``a . b == +1``.
    """
    V = m.n_vertices
    allowed = np.ones(V, bool) if allowed is None else np.asarray(allowed, bool).copy()
    on_a = np.zeros(V, bool)
    on_a[list(a)] = True
    free = allowed & ~on_a
    A = m.vertex_adjacency()
    D = sparse.diags(free.astype(float))
    A = (D @ A @ D).tocsr()
    A.eliminate_zeros()
    n = len(a)
    best = None
    X = m.vertices
    for i in sorted(set(np.linspace(0, n, n_trials, endpoint=False).astype(int).tolist())):
        p, nxt, prv = a[i], a[(i + 1) % n], a[i - 1]
        h_out, h_back = _he(m, p, nxt), _he(m, p, prv)
        left = [int(m.he_head[h]) for h in _fan(m, h_out, h_back)]
        right = [int(m.he_head[h]) for h in _fan(m, h_back, h_out)]
        left = [w for w in left if free[w]]
        right = [w for w in right if free[w]]
        if not left or not right:
            continue
        dist, pred, src = csgraph.dijkstra(A, directed=False, indices=left, min_only=True,
                                           return_predecessors=True)
        r_arr = np.asarray(right)
        cost = dist[r_arr] + np.linalg.norm(X[r_arr] - X[p], axis=1) \
            + np.linalg.norm(X[np.maximum(src[r_arr], 0)] - X[p], axis=1)
        j = int(np.argmin(cost))
        if not np.isfinite(cost[j]):
            continue
        if best is None or cost[j] < best[0] - 1e-12 * cost[j]:
            r = int(r_arr[j])
            path = [r]
            while pred[path[-1]] >= 0:
                path.append(int(pred[path[-1]]))
            best = (float(cost[j]), [p] + list(reversed(path)))
    if best is None:
        raise HomologyError("loop separates the admissible region; no crossing loop")
    return best[1]


def handle_basis(m, generators=None, cocycles=None):
    """Canonical basis (a_1..a_g, b_1..b_g) of simple loops, built handle by handle.

    Each a_i is a shortest nontrivial loop avoiding earlier handles, each b_i a
    shortest loop crossing a_i once.  Handles are vertex-disjoint, so the
    pairing is exactly the standard symplectic matrix.
    """
    _, g = euler_genus(m)
    if g == 0:
        return HomologyBasis((), True, "handles")
    if generators is None:
        generators = homology_basis(m)
    if cocycles is None:
        cocycles = integer_cocycles(m, generators)
    allowed = np.ones(m.n_vertices, bool)
    A, B = [], []
    for _ in range(g):
        a, _ = shortest_nontrivial_loop(m, cocycles, allowed)
        b = crossing_loop(m, a, allowed)
        ca = Chain.from_vertex_loop(m, a)
        cb = Chain.from_vertex_loop(m, b)
        s = intersection_number(m, ca, cb)
        if s == -1:
            cb = -cb
        elif s != 1:
            raise HomologyError(f"handle loops meet with intersection {s}")
        allowed[a] = False
        allowed[b] = False
        A.append(ca)
        B.append(cb)
    cycles = tuple(A + B)
    I = intersection_pairing(m, list(cycles))
    if not np.array_equal(I, standard_symplectic(g)):
        raise HomologyError("handle loops do not form a symplectic basis")
    return HomologyBasis(cycles, True, "handles", None, generators.tree_parent,
                         generators.cotree_edges, generators.generator_edges)


# ----------------------------------------------------------------------
# shortening and transversality

def _arc(loop, i, j):
    n = len(loop)
    out = [loop[i]]
    k = i
    while k != j:
        k = (k + 1) % n
        out.append(loop[k])
    return out


def shorten_cycle(m, c, cocycles=None, max_passes=20):
    """Shorten a simple loop by Dijkstra shortcuts that keep its homology class."""
    loop = list(c.loop) if c.loop is not None else None
    if loop is None:
        walks = closed_walks(m, c)
        if len(walks) != 1 or len(set(walks[0])) != len(walks[0]):
            raise HomologyError("shorten_cycle needs a simple loop")
        loop = walks[0]
    if cocycles is None:
        _, g = euler_genus(m)
        cocycles = integer_cocycles(m, homology_basis(m)) if g else np.zeros((m.n_edges, 0), np.int64)
    ref = class_vector(m, cocycles, Chain.from_vertex_loop(m, loop))
    A = m.vertex_adjacency()
    X = m.vertices
    for _ in range(max_passes):
        n = len(loop)
        seg = np.linalg.norm(X[np.roll(loop, -1)] - X[loop], axis=1)
        total = seg.sum()
        cum = np.r_[0.0, np.cumsum(seg)]
        new = None
        for i in range(n):
            dist, pred = csgraph.dijkstra(A, directed=False, indices=loop[i],
                                          limit=total, return_predecessors=True)
            gains = []
            for k in range(2, n - 1):
                j = (i + k) % n
                along = cum[i + k] - cum[i] if i + k <= n else total - cum[i] + cum[i + k - n]
                gain = along - dist[loop[j]]
                if gain > 1e-12 * total:
                    gains.append((-gain, j))
            for _, j in sorted(gains):
                path = [loop[j]]
                while pred[path[-1]] >= 0:
                    path.append(int(pred[path[-1]]))
                inner = path[1:-1][::-1]            # strictly between loop[i] and loop[j]
                cand = _arc(loop, j, i) + inner     # loop[j] .. loop[i], then the shortcut
                if len(set(cand)) != len(cand) or len(cand) < 3:
                    continue
                if not np.array_equal(class_vector(m, cocycles, Chain.from_vertex_loop(m, cand)), ref):
                    continue
                new = cand
                break
            if new is not None:
                break
        if new is None:
            break
        loop = new
    return Chain.from_vertex_loop(m, loop)


def pushoff_walk(m, loop, side="left"):
    """Parallel copy of a closed walk through the vertices of its left (or right) fans."""
    n = len(loop)
    walk = []
    for i in range(n):
        v, nxt, prv = loop[i], loop[(i + 1) % n], loop[i - 1]
        h_out, h_back = _he(m, v, nxt), _he(m, v, prv)
        if side == "left":
            walk.extend(int(m.he_head[h]) for h in reversed(_fan(m, h_out, h_back)))
        else:
            walk.extend(int(m.he_head[h]) for h in _fan(m, h_back, h_out))
    # drop repeats and immediate backtracks
    out = []
    for w in walk:
        if out and out[-1] == w:
            continue
        if len(out) >= 2 and out[-2] == w:
            out.pop()
            continue
        out.append(w)
    while len(out) > 2 and out[0] == out[-1]:
        out.pop()
    while len(out) > 3 and out[1] == out[-1]:
        out = out[1:-1]
    return out


def perturb_transversal(m, basis, max_retries=4):
    """Reroute later cycles off edges used by earlier ones via parallel pushoffs.

    Attempt ``k`` pushes the original walk ``k // 2 + 1`` times, alternating
    left and right.
    """
    cycles = list(basis.cycles)
    used = set()
    for j, c in enumerate(cycles):
        cur = c
        walks = closed_walks(m, c)
        for attempt in range(max_retries + 1):
            if not (set(cur.coeffs) & used):
                break
            if len(walks) != 1 or attempt == max_retries:
                raise HomologyError(f"could not separate cycle {j} after {max_retries} retries")
            side = "left" if attempt % 2 == 0 else "right"
            w = walks[0]
            for _ in range(attempt // 2 + 1):
                w = pushoff_walk(m, w, side)
            ch = Chain.from_vertex_loop(m, w)
            cur = Chain(1, ch.coeffs, tuple(w) if len(set(w)) == len(w) else None)
        cycles[j] = cur
        used |= set(cur.coeffs)
    return HomologyBasis(tuple(cycles), basis.canonical, basis.method, basis.transform,
                         basis.tree_parent, basis.cotree_edges, basis.generator_edges)


# ----------------------------------------------------------------------
# cutting

def cut_mesh(m, cut):
    """Split vertices along the edges flagged in ``cut``.

    Returns ``(cut_mesh, vertex_map)``; face ``i`` of the result is face ``i``
    of ``m`` with its corners re-pointed to wedge copies.
    """
    cut = np.asarray(cut, bool)
    nh = 3 * m.n_faces
    h = np.arange(nh)
    p = prev_halfedge(h)
    nbr = m.he_twin[p]
    link = (nbr >= 0) & ~cut[m.he_edge[p]]
    G = sparse.csr_matrix((np.ones(int(link.sum())), (h[link], nbr[link])), shape=(nh, nh))
    _, lab = csgraph.connected_components(G, directed=False)
    tail = m.he_tail
    # deterministic ids: by original vertex, then smallest halfedge in the wedge
    first = np.full(lab.max() + 1, nh, np.int64)
    np.minimum.at(first, lab, h)
    comp_vertex = tail[first]
    order = np.lexsort((first, comp_vertex))
    newid = np.empty_like(order)
    newid[order] = np.arange(len(order))
    F = newid[lab].reshape(-1, 3)
    vmap = comp_vertex[order]
    cm = Mesh(m.vertices[vmap], F, closed=False, check_degenerate=False)
    return cm, vmap


def fundamental_domain(m):
    """Cut the mesh into a disk along the boundary left by greedy face removal.

    Faces are removed breadth-first from face 0 through shared edges; the
    edges never crossed form the cut graph, whose dangling trees are then
    retracted (a genus-0 cut keeps a two-edge path so the disk is simplicial).
    """
    _, g = euler_genus(m)
    F = m.n_faces
    crossed = np.zeros(m.n_edges, bool)
    seen = np.zeros(F, bool)
    seen[0] = True
    q = deque([0])
    while q:
        f = q.popleft()
        for hh in (3 * f, 3 * f + 1, 3 * f + 2):
            t = m.he_twin[hh]
            f2 = t // 3
            if not seen[f2]:
                seen[f2] = True
                crossed[m.he_edge[hh]] = True
                q.append(int(f2))
    cut = ~crossed
    deg = np.bincount(m.edges[cut].ravel(), minlength=m.n_vertices)
    inc = {}
    for e in np.flatnonzero(cut).tolist():
        for x in m.edges[e]:
            inc.setdefault(int(x), set()).add(e)
    leaves = deque(sorted(v for v in range(m.n_vertices) if deg[v] == 1))
    remaining = int(cut.sum())
    keep_min = 2 if g == 0 else 0
    while leaves and remaining > keep_min:
        v = leaves.popleft()
        if deg[v] != 1:
            continue
        e = next(iter(inc[v]))
        cut[e] = False
        remaining -= 1
        for x in m.edges[e]:
            x = int(x)
            inc[x].discard(e)
            deg[x] -= 1
            if deg[x] == 1:
                leaves.append(x)
    cm, vmap = cut_mesh(m, cut)
    chi = cm.n_vertices - cm.n_edges + cm.n_faces
    if chi != 1:
        raise HomologyError(f"cut mesh is not a disk (chi={chi})")
    loops = cm.boundary_loops()
    if len(loops) != 1:
        raise HomologyError(f"cut mesh has {len(loops)} boundary loops")
    return FundamentalDomain(cm, vmap, loops[0], np.flatnonzero(cut))


# ----------------------------------------------------------------------
# curve classification

def curve_class(m, forms, r, tol=1e-6):
    vals = np.array([integrate(w, r) for w in forms])
    rounded = np.rint(vals).astype(np.int64)
    dev = float(np.max(np.abs(vals - rounded))) if len(vals) else 0.0
    return CurveClass(vals, rounded, dev)


def flood_bounded_domain(m, r, forms=None, tol=1e-6):
    """Faces enclosed on the left of a null-homologous cycle, or None.

    Returns ``(faces, class)``: ``faces`` is a sorted tuple whose boundary is
    exactly ``r``, or None when ``r`` is homologically nontrivial.
    """
    if forms is not None:
        cls = curve_class(m, forms, r, tol)
        if not (cls.max_deviation < tol and not cls.rounded.any()):
            return None, cls
    else:
        _, g = euler_genus(m)
        if g:
            coc = integer_cocycles(m, homology_basis(m))
            cv = class_vector(m, coc, r)
            cls = CurveClass(cv.astype(float), cv, 0.0)
            if cv.any():
                return None, cls
        else:
            cls = CurveClass(np.zeros(0), np.zeros(0, np.int64), 0.0)
    support = set(r.coeffs)
    if not support:
        return (), cls
    seeds = []
    for e, c in r.coeffs.items():
        f = m.edge_faces[e, 0 if c > 0 else 1]
        seeds.append(int(f))
    seen = set(seeds)
    q = deque(sorted(seen))
    while q:
        f = q.popleft()
        for hh in (3 * f, 3 * f + 1, 3 * f + 2):
            if int(m.he_edge[hh]) in support:
                continue
            f2 = int(m.he_twin[hh] // 3)
            if f2 not in seen:
                seen.add(f2)
                q.append(f2)
    faces = tuple(sorted(seen))
    sigma = Chain(2, {f: 1 for f in faces})
    if boundary_of(m, sigma).coeffs != r.coeffs:
        raise HomologyError("flooded region does not bound the cycle (cycle not simple?)")
    return faces, cls
