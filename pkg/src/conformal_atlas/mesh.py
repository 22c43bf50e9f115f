"""Triangle mesh container with halfedge connectivity and per-face geometry.

Halfedge ``h = 3*f + i`` runs from corner ``i`` of face ``f`` to corner
``(i+1) % 3``.  Undirected edges are stored with ``edges[e, 0] < edges[e, 1]``;
that ordering is the reference orientation for every 1-cochain in the package.

All geometry is computed from pairwise distances, so vertex positions may
live in any ambient dimension >= 2 (flat tori are embedded isometrically in R^4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph


class MeshError(ValueError):
    """Invalid mesh input.  ``kind`` names the violated rule, ``cell`` the offender."""

    def __init__(self, kind, cell=None, detail=""):
        self.kind = kind
        self.cell = cell
        msg = kind if cell is None else f"{kind}: {cell}"
        if detail:
            msg = f"{msg} ({detail})"
        super().__init__(msg)


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class Mesh:
    """Oriented triangle complex, closed by default.

    Parameters
    ----------
    vertices : (n, d) array_like
        Vertex positions, ``d >= 2``.
    faces : (m, 3) array_like of int
        Consistently oriented vertex triples.
    closed : bool
        Require every edge to have two incident faces.  Cut meshes pass False.
    check_degenerate : bool
        Reject faces with area below ``1e-12 * diag**2``.
    """

    def __init__(self, vertices, faces, *, closed=True, check_degenerate=True):
        V = np.array(vertices, dtype=float)
        F = np.array(faces, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] < 2:
            raise MeshError("bad vertex array", detail=f"shape {V.shape}")
        if F.ndim != 2 or (F.size and F.shape[1] != 3):
            raise MeshError("non-triangular face", detail=f"face array shape {F.shape}")
        if F.size == 0:
            raise MeshError("empty mesh")
        n = len(V)
        if F.min() < 0 or F.max() >= n:
            bad = int(np.flatnonzero((F < 0).any(1) | (F >= n).any(1))[0])
            raise MeshError("vertex index out of range", cell=bad)
        rep = (F[:, 0] == F[:, 1]) | (F[:, 1] == F[:, 2]) | (F[:, 2] == F[:, 0])
        if rep.any():
            raise MeshError("degenerate face", cell=int(np.flatnonzero(rep)[0]),
                            detail="repeated vertex")
        used = np.zeros(n, bool)
        used[F.ravel()] = True
        if not used.all():
            raise MeshError("unreferenced vertex", cell=int(np.flatnonzero(~used)[0]))

        self.vertices = _readonly(V)
        self.faces = _readonly(F)
        self.closed = closed
        self._build_halfedges()
        if check_degenerate:
            areas = face_areas(self)
            lo = 1e-12 * self.bbox_diagonal() ** 2
            small = np.flatnonzero(areas < lo)
            if small.size:
                raise MeshError("degenerate face", cell=int(small[0]),
                                detail=f"area {areas[small[0]]:.3e}")

    # ------------------------------------------------------------------
    def _build_halfedges(self):
        F = self.faces
        n = len(self.vertices)
        tail = F.ravel()
        head = F[:, [1, 2, 0]].ravel()
        key = tail * n + head
        order = np.argsort(key, kind="stable")
        skey = key[order]
        dup = np.flatnonzero(skey[1:] == skey[:-1])
        if dup.size:
            h = int(order[dup[0]])
            u, v = int(tail[h]), int(head[h])
            lo, hi = min(u, v), max(u, v)
            count = int(np.count_nonzero((np.minimum(tail, head) == lo)
                                         & (np.maximum(tail, head) == hi)))
            if count > 2:
                raise MeshError("non-manifold edge", cell=(lo, hi),
                                detail=f"{count} incident faces")
            raise MeshError("inconsistent orientation", cell=(u, v),
                            detail=f"faces {order[dup[0]] // 3} and {order[dup[0] + 1] // 3}")
        rkey = head * n + tail
        pos = np.searchsorted(skey, rkey)
        pos = np.minimum(pos, len(skey) - 1)
        has_twin = skey[pos] == rkey
        twin = np.where(has_twin, order[pos], -1)
        if self.closed and not has_twin.all():
            h = int(np.flatnonzero(~has_twin)[0])
            raise MeshError("boundary edge", cell=(int(tail[h]), int(head[h])))
        # an undirected edge used by more than two faces shows up as a twin
        # collision: two halfedges claiming the same reverse
        if has_twin.any():
            t = twin[has_twin]
            if np.unique(t).size != t.size:
                raise MeshError("non-manifold edge")

        # one undirected edge per (tail<head) halfedge or per unmatched halfedge
        rep = (tail < head) | ~has_twin
        rep_idx = np.flatnonzero(rep)
        eu = np.minimum(tail[rep_idx], head[rep_idx])
        ev = np.maximum(tail[rep_idx], head[rep_idx])
        eorder = np.lexsort((ev, eu))
        edges = np.stack([eu[eorder], ev[eorder]], 1)
        he_edge = np.empty(len(tail), np.int64)
        he_edge[rep_idx[eorder]] = np.arange(len(edges))
        other = twin[rep_idx[eorder]]
        ok = other >= 0
        he_edge[other[ok]] = np.flatnonzero(ok)
        he_sign = np.where(tail < head, 1, -1).astype(np.int64)

        edge_faces = -np.ones((len(edges), 2), np.int64)
        hf = np.arange(len(tail)) // 3
        fwd = he_sign > 0
        edge_faces[he_edge[fwd], 0] = hf[fwd]
        edge_faces[he_edge[~fwd], 1] = hf[~fwd]
        edge_he = -np.ones((len(edges), 2), np.int64)
        edge_he[he_edge[fwd], 0] = np.flatnonzero(fwd)
        edge_he[he_edge[~fwd], 1] = np.flatnonzero(~fwd)

        self.he_tail = _readonly(tail)
        self.he_head = _readonly(head)
        self.he_twin = _readonly(twin)
        self.he_edge = _readonly(he_edge)
        self.he_sign = _readonly(he_sign)
        self.edges = _readonly(edges)
        self.edge_faces = _readonly(edge_faces)
        self.edge_halfedges = _readonly(edge_he)

        if self.closed:
            # each vertex must own exactly one fan of outgoing halfedges
            nh = len(tail)
            h = np.arange(nh)
            rot = twin[prev_halfedge(h)]
            g = sparse.csr_matrix((np.ones(nh), (h, rot)), shape=(nh, nh))
            ncomp, lab = csgraph.connected_components(g, directed=True, connection="strong")
            fans = np.zeros(n, np.int64)
            first = np.unique(lab, return_index=True)[1]
            np.add.at(fans, tail[first], 1)
            if (fans > 1).any():
                raise MeshError("non-manifold vertex", cell=int(np.flatnonzero(fans > 1)[0]))

    # ------------------------------------------------------------------
    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def dim(self):
        return self.vertices.shape[1]

    def bbox_diagonal(self):
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.linalg.norm(d, axis=1)

    def edge_index(self, u, v):
        """Return ``(e, sign)`` for the directed edge u->v; KeyError if absent."""
        lo, hi = (u, v) if u < v else (v, u)
        e = int(np.searchsorted(self.edges[:, 0], lo, side="left"))
        stop = int(np.searchsorted(self.edges[:, 0], lo, side="right"))
        k = e + int(np.searchsorted(self.edges[e:stop, 1], hi))
        if k >= stop or self.edges[k, 1] != hi:
            raise KeyError((u, v))
        return k, (1 if u < v else -1)

    def edge_lookup(self, u, v):
        """Vectorised :meth:`edge_index`; returns ``(e, sign)`` arrays, ``e = -1`` if absent."""
        u = np.asarray(u, np.int64)
        v = np.asarray(v, np.int64)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        n = self.n_vertices
        keys = self.edges[:, 0] * n + self.edges[:, 1]
        q = lo * n + hi
        pos = np.minimum(np.searchsorted(keys, q), len(keys) - 1)
        e = np.where(keys[pos] == q, pos, -1)
        return e, np.where(u < v, 1, -1)

    def vertex_halfedges(self):
        """Outgoing halfedges of every vertex in counter-clockwise order.

        Returns a list of int arrays; boundary vertices start at the halfedge
        following the boundary gap.
        """
        nh = len(self.he_tail)
        out = [[] for _ in range(self.n_vertices)]
        seen = np.zeros(nh, bool)
        twin = self.he_twin
        for h0 in range(nh):
            if seen[h0]:
                continue
            v = int(self.he_tail[h0])
            # walk clockwise to the start of an open fan
            h = h0
            if not self.closed:
                while True:
                    t = twin[h]
                    if t < 0:
                        break
                    h2 = int(next_halfedge(t))
                    if h2 == h0:
                        break
                    h = h2
            fan = []
            start = h
            while True:
                fan.append(h)
                seen[h] = True
                t = twin[prev_halfedge(h)]
                if t < 0 or t == start:
                    break
                h = int(t)
            out[v] = fan
        return [np.asarray(f, np.int64) for f in out]

    def vertex_adjacency(self, weights=None):
        """Symmetric sparse adjacency; entry ``(u, v)`` is the edge weight (default length)."""
        w = self.edge_lengths() if weights is None else np.asarray(weights, float)
        u, v = self.edges[:, 0], self.edges[:, 1]
        n = self.n_vertices
        return sparse.csr_matrix((np.r_[w, w], (np.r_[u, v], np.r_[v, u])), shape=(n, n))

    def boundary_loops(self):
        """Boundary cycles as lists of boundary halfedges, surface on the left."""
        bnd = np.flatnonzero(self.he_twin < 0)
        if bnd.size == 0:
            return []
        nxt = {}
        by_tail = {int(self.he_tail[h]): int(h) for h in bnd}
        for h in bnd:
            nxt[int(h)] = by_tail[int(self.he_head[h])]
        loops, seen = [], set()
        for h in sorted(nxt):
            if h in seen:
                continue
            loop = []
            while h not in seen:
                seen.add(h)
                loop.append(h)
                h = nxt[h]
            loops.append(loop)
        return loops

    def __repr__(self):
        return f"Mesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}, dim={self.dim})"


def next_halfedge(h):
    return 3 * (np.asarray(h) // 3) + (np.asarray(h) + 1) % 3


def prev_halfedge(h):
    return 3 * (np.asarray(h) // 3) + (np.asarray(h) + 2) % 3


def euler_genus(m):
    """Euler characteristic and genus of a closed orientable mesh."""
    chi = m.n_vertices - m.n_edges + m.n_faces
    if chi % 2:
        raise MeshError("odd Euler characteristic", detail=f"chi={chi}")
    g = (2 - chi) // 2
    if g < 0:
        raise MeshError("disconnected mesh", detail=f"chi={chi}")
    return chi, g


# ----------------------------------------------------------------------
# per-face geometry

def _gram_area(a, b):
    aa = np.einsum("...i,...i", a, a)
    bb = np.einsum("...i,...i", b, b)
    ab = np.einsum("...i,...i", a, b)
    return 0.5 * np.sqrt(np.maximum(aa * bb - ab * ab, 0.0))


def face_areas(m):
    P = m.vertices[m.faces]
    return _gram_area(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])


def face_area(m, face):
    """Area of one face.  A zero result means the face is degenerate."""
    P = m.vertices[m.faces[face]]
    return float(_gram_area(P[1] - P[0], P[2] - P[0]))


def vertex_areas(m):
    """One third of the incident face areas per vertex."""
    a = np.repeat(face_areas(m) / 3.0, 3)
    return np.bincount(m.faces.ravel(), weights=a, minlength=m.n_vertices)


@dataclass(frozen=True)
class LocalChart:
    face: int
    origin: int
    frame: np.ndarray   # (d, 2) orthonormal columns
    coords: np.ndarray  # (3, 2)


def local_chart(m, face):
    p = m.vertices[m.faces[face]]
    e1 = p[1] - p[0]
    l1 = np.linalg.norm(e1)
    x = e1 / l1
    w = p[2] - p[0]
    wy = w - x * (w @ x)
    ly = np.linalg.norm(wy)
    if ly <= 1e-12 * max(l1, np.linalg.norm(w)):
        raise MeshError("degenerate face", cell=int(face), detail="collinear vertices")
    y = wy / ly
    coords = np.array([[0.0, 0.0], [l1, 0.0], [w @ x, ly]])
    return LocalChart(int(face), int(m.faces[face, 0]), np.stack([x, y], 1), coords)


def chart_coords(m):
    """(F, 3, 2) chart coordinates of every face, built from edge lengths."""
    return chart_coords_from_points(m.vertices[m.faces])


def chart_coords_from_points(P):
    """Chart coordinates for an (F, 3, d) array of triangle corner positions."""
    a = P[:, 1] - P[:, 0]
    b = P[:, 2] - P[:, 0]
    la = np.linalg.norm(a, axis=1)
    bx = np.einsum("ij,ij->i", a, b) / la
    by = 2.0 * _gram_area(a, b) / la
    C = np.zeros((len(P), 3, 2))
    C[:, 1, 0] = la
    C[:, 2, 0] = bx
    C[:, 2, 1] = by
    return C


def corner_cotangents(m):
    """(F, 3) cotangent of the angle at each corner."""
    P = m.vertices[m.faces]
    cots = np.empty((len(P), 3))
    for i in range(3):
        a = P[:, (i + 1) % 3] - P[:, i]
        b = P[:, (i + 2) % 3] - P[:, i]
        dbl = 2.0 * _gram_area(a, b)
        if (dbl <= 0).any():
            raise MeshError("degenerate face", cell=int(np.flatnonzero(dbl <= 0)[0]))
        cots[:, i] = np.einsum("ij,ij->i", a, b) / dbl
    return cots


def corner_angles(m):
    P = m.vertices[m.faces]
    ang = np.empty((len(P), 3))
    for i in range(3):
        a = P[:, (i + 1) % 3] - P[:, i]
        b = P[:, (i + 2) % 3] - P[:, i]
        ang[:, i] = np.arctan2(2.0 * _gram_area(a, b), np.einsum("ij,ij->i", a, b))
    return ang


def cotan_weights(m):
    """Edge weights ``k_uv = (cot alpha + cot beta) / 2``, indexed by edge id.

    The angle opposite halfedge ``3f+i`` sits at corner ``(i+2) % 3``.
    """
    cots = corner_cotangents(m)
    opp = cots[:, [2, 0, 1]].ravel()
    return 0.5 * np.bincount(m.he_edge, weights=opp, minlength=m.n_edges)


def cotan_weights_from_charts(m):
    """Same weights, recomputed from 2D chart coordinates (cross-check path)."""
    C = chart_coords(m)
    k = np.zeros(m.n_edges)
    for i in range(3):
        o = C[:, (i + 2) % 3]
        a = C[:, i] - o
        b = C[:, (i + 1) % 3] - o
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        dot = np.einsum("ij,ij->i", a, b)
        np.add.at(k, m.he_edge[3 * np.arange(m.n_faces) + i], 0.5 * dot / np.abs(cross))
    return k


# ----------------------------------------------------------------------
# negative weight repair

# cotangent weights are dimensionless; values above -NEGATIVE_TOL count as zero
NEGATIVE_TOL = 1e-12


def _flip_or_split(V, F, m, k, mode):
    """One pass of repairs on disjoint negative edges; returns new (V, F, log)."""
    neg = np.flatnonzero(k < -NEGATIVE_TOL)
    neg = neg[np.argsort(k[neg], kind="stable")]
    touched = np.zeros(len(F), bool)
    existing = {(int(a), int(b)) for a, b in m.edges}
    F = F.copy()
    newV = [V]
    nv = len(V)
    add_faces = []
    log = []
    min_area = 1e-11 * m.bbox_diagonal() ** 2
    for e in neg:
        f0, f1 = m.edge_faces[e]
        if f0 < 0 or f1 < 0 or touched[f0] or touched[f1]:
            continue
        u, v = (int(x) for x in m.edges[e])
        # f0 holds u->v, f1 holds v->u; w and x are the opposite corners
        w = int(m.he_tail[prev_halfedge(m.edge_halfedges[e, 0])])
        x = int(m.he_tail[prev_halfedge(m.edge_halfedges[e, 1])])
        key = (min(w, x), max(w, x))
        flip_ok = mode == "swap" and w != x and key not in existing
        if flip_ok:
            pw, px, pu, pv = V[w], V[x], V[u], V[v]
            a1 = _gram_area(pv - px, pw - px)
            a2 = _gram_area(pu - pw, px - pw)
            lo = 1e-10 * float(np.linalg.norm(pu - pv)) ** 2
            flip_ok = a1 > lo and a2 > lo
        if flip_ok:
            F[f0] = (x, v, w)
            F[f1] = (w, u, x)
            existing.discard((u, v))
            existing.add(key)
            log.append(("swap", (u, v), key))
        else:
            pm = 0.5 * (V[u] + V[v])
            lo = max(1e-10 * float(np.linalg.norm(V[u] - V[v])) ** 2, min_area)
            if min(_gram_area(V[c] - pm, V[d] - pm) for c, d in ((u, w), (v, w), (u, x), (v, x))) <= lo:
                continue  # the split would leave a sliver; report the edge instead
            mid = nv
            nv += 1
            newV.append(pm[None])
            F[f0] = (u, mid, w)
            add_faces.append((mid, v, w))
            F[f1] = (v, mid, x)
            add_faces.append((mid, u, x))
            existing.discard((u, v))
            log.append(("split", (u, v), mid))
        touched[f0] = touched[f1] = True
    if add_faces:
        F = np.vstack([F, np.asarray(add_faces, np.int64)])
    return np.vstack(newV), F, log


def preprocess_negative_weights(m, mode="swap", max_passes=50):
    """Remove negative cotangent weights by edge swaps or midpoint splits.

    ``mode='swap'`` flips an edge when the flip is legal and falls back to a
    split otherwise; ``'split'`` always splits; ``'none'`` only reports.
    Returns the repaired mesh and a report dict with the operations applied and
    any edges that stay negative.
    """
    if mode not in ("swap", "split", "none"):
        raise ValueError(f"unknown preprocess mode {mode!r}")
    ops = []
    cur = m
    if mode != "none":
        for _ in range(max_passes):
            k = cotan_weights(cur)
            if not (k < -NEGATIVE_TOL).any():
                break
            V, F, log = _flip_or_split(np.asarray(cur.vertices), np.asarray(cur.faces), cur, k, mode)
            if not log:
                break
            ops.extend(log)
            cur = Mesh(V, F, closed=m.closed)
    k = cotan_weights(cur)
    residual = [tuple(int(x) for x in cur.edges[e]) for e in np.flatnonzero(k < -NEGATIVE_TOL)]
    report = {
        "mode": mode,
        "swaps": sum(1 for o in ops if o[0] == "swap"),
        "splits": sum(1 for o in ops if o[0] == "split"),
        "operations": ops,
        "residual_negative": residual,
        "min_weight": float(k.min()),
    }
    return cur, report
