"""Cohomology bases dual to a homology basis, by slicing handles open onto a square."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .homology import (HomologyBasis, cut_mesh, handle_basis,
                       intersection_number)
from .mesh import corner_angles, euler_genus
from .simplicial import Chain, OneForm, integrate


class CohomologyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SlicedHandle:
    mesh: object                # cut mesh
    vertex_map: np.ndarray      # cut vertex -> original vertex
    sides: tuple                # four lists of cut vertices: a, b, a^-1, b^-1 (each with both corners)


@dataclass(frozen=True)
class DualBasis:
    forms: tuple
    basis: HomologyBasis
    residual: np.ndarray        # pairing matrix after correction
    raw_pairing: np.ndarray     # pairing matrix before correction


def _loop_of(m, c):
    if c.loop is None:
        raise CohomologyError("slicing needs cycles given as simple vertex loops")
    loop = list(c.loop)
    if len(set(loop)) != len(loop):
        raise CohomologyError("cycle is not simple")
    return loop


def slice_along_pair(m, a, b):
    """Cut ``m`` open along loops ``a`` and ``b`` that meet at one vertex.

    The single boundary loop of the result reads ``a b a^-1 b^-1`` with the
    surface on the left; ``sides`` lists its four arcs in that order.
    """
    la, lb = _loop_of(m, a), _loop_of(m, b)
    common = set(la) & set(lb)
    if len(common) != 1:
        raise CohomologyError(f"cycles share {len(common)} vertices, need exactly 1")
    if intersection_number(m, a, b) != 1:
        raise CohomologyError("cycles must cross once with a . b = +1")
    p = common.pop()
    la = la[la.index(p):] + la[:la.index(p)]
    lb = lb[lb.index(p):] + lb[:lb.index(p)]
    if set(a.coeffs) & set(b.coeffs):
        raise CohomologyError("cycles share an edge")
    cut = np.zeros(m.n_edges, bool)
    cut[list(a.coeffs)] = True
    cut[list(b.coeffs)] = True
    cm, vmap = cut_mesh(m, cut)
    loops = cm.boundary_loops()
    if len(loops) != 1:
        raise CohomologyError(f"slice produced {len(loops)} boundary loops")
    bl = loops[0]
    tails = cm.he_tail[bl]
    heads = cm.he_head[bl]
    ot, oh = vmap[tails], vmap[heads]
    # start at the copy of a's first edge traversed forward
    start = [i for i in range(len(bl)) if ot[i] == la[0] and oh[i] == la[1]]
    if len(start) != 1:
        raise CohomologyError("boundary word does not contain a exactly once")
    s = start[0]
    order = [(s + k) % len(bl) for k in range(len(bl))]
    na, nb = len(la), len(lb)
    if len(bl) != 2 * (na + nb):
        raise CohomologyError("boundary length does not match 2(|a| + |b|)")
    expect = ([(la[i], la[(i + 1) % na]) for i in range(na)]
              + [(lb[i], lb[(i + 1) % nb]) for i in range(nb)]
              + [(la[(i + 1) % na], la[i]) for i in reversed(range(na))]
              + [(lb[(i + 1) % nb], lb[i]) for i in reversed(range(nb))])
    got = [(int(ot[i]), int(oh[i])) for i in order]
    if got != expect:
        raise CohomologyError("boundary word is not a b a^-1 b^-1")
    cuts = np.cumsum([0, na, nb, na, nb])
    sides = []
    for k in range(4):
        idx = order[cuts[k]:cuts[k + 1]]
        sides.append([int(tails[i]) for i in idx] + [int(heads[idx[-1]])])
    return SlicedHandle(cm, vmap, tuple(sides))


def square_boundary_map(sliced):
    """Boundary positions on the unit square: a bottom, b right, a^-1 top, b^-1 left.

    Spacing along each side is proportional to arc length; opposite sides use
    the same spacing so the glued coordinates differ by exact unit shifts.
    """
    X = sliced.mesh.vertices
    pos = {}
    corners = [np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([1.0, 1.0]), np.array([0.0, 1.0])]
    for k, side in enumerate(sliced.sides):
        if len(side) < 2:
            raise CohomologyError("empty side in boundary word")
        seg = np.linalg.norm(np.diff(X[side], axis=0), axis=1)
        t = np.r_[0.0, np.cumsum(seg)]
        t = t / t[-1]
        if k >= 2:
            # a^-1 and b^-1 run backwards: reuse the forward spacing of a and b
            twin = sliced.sides[k - 2]
            seg2 = np.linalg.norm(np.diff(X[twin], axis=0), axis=1)
            t2 = np.r_[0.0, np.cumsum(seg2)]
            t = 1.0 - (t2 / t2[-1])[::-1]
        c0, c1 = corners[k], corners[(k + 1) % 4]
        for v, tt in zip(side, t):
            pos[v] = (1 - tt) * c0 + tt * c1
    for k in range(4):
        pos[sliced.sides[k][0]] = corners[k]
    return pos


def mean_value_weights(m):
    """Sparse (V, V) mean-value weights ``(tan(a/2) + tan(b/2)) / |x_i - x_j|``."""
    ang = corner_angles(m)                 # (F, 3)
    F = m.faces
    X = m.vertices
    rows, cols, vals = [], [], []
    for i in range(3):
        vi, vj, vk = F[:, i], F[:, (i + 1) % 3], F[:, (i + 2) % 3]
        t = np.tan(ang[:, i] / 2)
        for vo in (vj, vk):
            rows.append(vi)
            cols.append(vo)
            vals.append(t / np.linalg.norm(X[vo] - X[vi], axis=1))
    W = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(m.n_vertices, m.n_vertices))
    return W


def floater_embed(cut, boundary_pos, tol=1e-10):
    """Interior vertices as mean-value convex combinations of their neighbors.

    Returns ``(uv, info)`` with the linear-system residual and the number of
    faces whose image is clockwise.
    """
    V = cut.n_vertices
    W = mean_value_weights(cut)
    fixed = np.zeros(V, bool)
    idx = np.fromiter(boundary_pos.keys(), np.int64)
    fixed[idx] = True
    uv = np.zeros((V, 2))
    uv[idx] = np.array([boundary_pos[i] for i in idx.tolist()])
    free = np.flatnonzero(~fixed)
    if free.size:
        deg = np.asarray(W.sum(1)).ravel()
        L = (sparse.diags(deg) - W).tocsr()
        Lff = L[free][:, free].tocsc()
        rhs = -(L[free][:, idx] @ uv[idx])
        lu = splu(Lff)
        uv[free] = lu.solve(rhs)
        res = float(np.abs(Lff @ uv[free] - rhs).max()) / max(1.0, float(np.abs(rhs).max()))
        if not np.isfinite(res) or res > tol:
            raise CohomologyError(f"embedding solve did not converge (residual {res:.3g})")
    else:
        res = 0.0
    P = uv[cut.faces]
    e1, e2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
    area = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    flipped = int((area <= 0).sum())
    return uv, {"residual": res, "flipped": flipped}


def dual_pair_forms(m, sliced, uv):
    """``omega_a = dx`` and ``omega_b = dy`` pulled back to the original edges.

    Each edge takes the coordinate difference from the cut copy belonging to
    its first incident face; across the cut both copies agree because
    opposite sides share their spacing.
    """
    h = m.edge_halfedges[:, 0]
    f = h // 3
    i = h % 3
    Fc = sliced.mesh.faces
    tail = Fc[f, i]
    head = Fc[f, (i + 1) % 3]
    d = uv[head] - uv[tail]
    return OneForm(m, d[:, 0]), OneForm(m, d[:, 1])


def _is_handle_pair(m, a, b):
    if a.loop is None or b.loop is None:
        return False
    if len(set(a.loop)) != len(a.loop) or len(set(b.loop)) != len(b.loop):
        return False
    if len(set(a.loop) & set(b.loop)) != 1 or set(a.coeffs) & set(b.coeffs):
        return False
    return intersection_number(m, a, b) == 1


def _handle_forms(m, basis):
    g = basis.genus
    out = [None] * (2 * g)
    for k in range(g):
        a, b = basis.cycles[k], basis.cycles[g + k]
        sl = slice_along_pair(m, a, b)
        uv, _ = floater_embed(sl.mesh, square_boundary_map(sl))
        out[k], out[g + k] = dual_pair_forms(m, sl, uv)
    return out


def pairing_matrix(forms, cycles):
    return np.array([[integrate(w, c) for w in forms] for c in cycles]).reshape(len(cycles), len(forms))


def dual_basis(m, basis, slicing_basis=None):
    """Closed 1-forms with ``integral over e_i of omega_j = delta_ij``.

    Handles of a canonical basis made of simple loops meeting once are sliced
    directly.  Any other basis is handled by slicing a geometric handle basis
    and applying the pairing-matrix correction.
    """
    _, g = euler_genus(m)
    cycles = list(basis.cycles)
    if g == 0:
        return DualBasis((), basis, np.zeros((0, 0)), np.zeros((0, 0)))
    if len(cycles) != 2 * g:
        raise CohomologyError(f"basis has {len(cycles)} cycles, genus needs {2 * g}")
    if slicing_basis is None:
        direct = basis.canonical and all(_is_handle_pair(m, cycles[k], cycles[g + k]) for k in range(g))
        slicing_basis = basis if direct else handle_basis(m)
    raw_forms = _handle_forms(m, slicing_basis)
    M = pairing_matrix(raw_forms, cycles)
    if abs(np.linalg.det(M)) < 1e-9:
        raise CohomologyError("pairing matrix is singular; cycles are not a basis")
    Minv = np.linalg.inv(M)
    vals = np.stack([w.values for w in raw_forms], 1) @ Minv
    forms = tuple(OneForm(m, vals[:, j]) for j in range(2 * g))
    return DualBasis(forms, basis, pairing_matrix(forms, cycles), M)
