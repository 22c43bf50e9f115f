"""Flat parametrizations from holomorphic forms, zero detection and UV export."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .mesh import chart_coords, corner_angles, euler_genus
from .simplicial import OneForm, gamma


class ParamError(RuntimeError):
    pass


@dataclass(frozen=True)
class ZeroReport:
    zeros: list                  # (vertex, index) with index = order of the zero
    total: int
    ambiguous: list = field(default_factory=list)   # vertices whose star has near-zero faces

    def to_json(self):
        return {"zeros": [[int(v), int(k)] for v, k in self.zeros], "total": self.total,
                "ambiguous": [int(v) for v in self.ambiguous]}


@dataclass(frozen=True)
class FlatParam:
    uv: np.ndarray               # (V', 2) per cut-mesh vertex
    domain: object               # FundamentalDomain
    residual: float
    root: int
    zeros: ZeroReport | None = None

    def to_json(self):
        out = {"root": self.root, "residual": self.residual, "uv": self.uv.tolist(),
               "vertex_map": self.domain.vertex_map.tolist()}
        if self.zeros is not None:
            out["zeros"] = self.zeros.to_json()
        return out


def form_parts(zeta):
    """``(real, imag)`` edge values of a holomorphic form or of a pair of OneForms."""
    if isinstance(zeta, tuple):
        re, im = zeta
        return np.asarray(re.values, float), np.asarray(im.values, float)
    return np.asarray(zeta.real.form.values, float), np.asarray(zeta.imag.values, float)


def combine_forms(forms, coeffs):
    """Complex linear combination ``sum c_k zeta_k`` as a pair of OneForms."""
    m = None
    re = im = 0.0
    for z, c in zip(forms, coeffs):
        a, b = form_parts(z)
        c = complex(c)
        re = re + c.real * a - c.imag * b
        im = im + c.real * b + c.imag * a
        m = z[0].mesh if isinstance(z, tuple) else z.real.form.mesh
    return OneForm(m, re), OneForm(m, im)


def integrate_over_domain(m, fd, zeta, root=0, tol=1e-9):
    """Integrate ``zeta`` breadth-first over the cut mesh; returns a FlatParam.

    Every cut-mesh edge inherits the value of the original edge it copies, so
    the result is exact telescoping; the residual is the largest mismatch
    between a uv difference and the edge integral.
    """
    cm, vmap = fd.mesh, fd.vertex_map
    if cm.n_vertices - cm.n_edges + cm.n_faces != 1:
        raise ParamError("domain is not a disk")
    re, im = form_parts(zeta)
    val = re + 1j * im
    cu, cv = cm.edges[:, 0], cm.edges[:, 1]
    e, s = m.edge_lookup(vmap[cu], vmap[cv])
    if (e < 0).any():
        raise ParamError("cut mesh edge has no original edge")
    d = s * val[e]                            # integral along cu -> cv
    A = cm.vertex_adjacency(np.ones(cm.n_edges))
    order, pred = csgraph.breadth_first_order(A, root, directed=False, return_predecessors=True)
    if len(order) != cm.n_vertices:
        raise ParamError("cut mesh is disconnected")
    z = np.zeros(cm.n_vertices, complex)
    ce, cs = cm.edge_lookup(pred[order[1:]], order[1:])
    step = cs * d[ce]
    for k, v in enumerate(order[1:].tolist()):
        z[v] = z[pred[v]] + step[k]
    res = float(np.abs(z[cv] - z[cu] - d).max()) if len(d) else 0.0
    scale = max(float(np.abs(d).max()), 1e-300) if len(d) else 1.0
    if res > tol * max(1.0, scale * cm.n_vertices):
        raise ParamError(f"integration is path dependent (residual {res:.3g}); form not closed")
    uv = np.stack([z.real, z.imag], 1)
    return FlatParam(uv, fd, res, int(root))


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def field_index(m, X, near_zero_rel=1e-6):
    """Poincare-Hopf index at every vertex of the per-face vector field ``X`` (F, 2).

    Returns ``(index, ambiguous_vertices)``; indices sum to the Euler characteristic.
    """
    C = chart_coords(m)
    h = np.arange(3 * m.n_faces)
    f = h // 3
    i = h % 3
    eL = C[f, (i + 1) % 3] - C[f, i]
    t = m.he_twin
    f2 = t // 3
    j = t % 3
    eR = C[f2, j] - C[f2, (j + 1) % 3]

    def rel(e, x):
        return np.arctan2(e[:, 0] * x[:, 1] - e[:, 1] * x[:, 0], np.einsum("ij,ij->i", e, x))

    term = _wrap(rel(eL, X[f]) - rel(eR, X[f2]))
    ang = corner_angles(m)
    K = 2 * np.pi - np.bincount(m.faces.ravel(), ang.ravel(), m.n_vertices)
    tot = np.bincount(m.he_tail, term, m.n_vertices) + K
    idx = np.rint(tot / (2 * np.pi)).astype(np.int64)
    mag = np.linalg.norm(X, axis=1)
    med = float(np.median(mag))
    if med == 0:
        raise ParamError("degenerate form: vanishes on most faces")
    weak = mag < near_zero_rel * med
    amb = np.unique(m.faces[weak].ravel()) if weak.any() else np.zeros(0, np.int64)
    return idx, amb.tolist()


def detect_zeros(m, zeta, near_zero_rel=1e-6):
    """Zeros of a holomorphic form as ``(vertex, order)`` from the winding of its real part.

    The order at v is minus the index of the dual vector field, so the
    orders sum to ``2g - 2``.
    """
    re, _ = form_parts(zeta)
    X = gamma(m, OneForm(m, re)).coeffs
    if not np.any(np.linalg.norm(X, axis=1) > 0):
        raise ParamError("degenerate form: zeta = 0")
    idx, amb = field_index(m, X, near_zero_rel)
    order = -idx
    zeros = [(int(v), int(order[v])) for v in np.flatnonzero(order)]
    return ZeroReport(zeros, int(order.sum()), amb)


def choose_form_avoiding(m, forms, vertex, max_tries=12):
    """First combination of the given forms with no zero at ``vertex``.

    Tries each form alone, then ``zeta_i + c zeta_j`` for a few fixed c.
    Returns ``(form, coeffs, report)``.
    """
    n = len(forms)
    cands = [np.eye(n)[k] for k in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                for c in (0.5, 1.0, 1j, -0.5):
                    v = np.zeros(n, complex)
                    v[i], v[j] = 1.0, c
                    cands.append(v)
    for coeffs in cands[:max(max_tries, n)]:
        z = combine_forms(forms, coeffs)
        rep = detect_zeros(m, z)
        if all(v != vertex for v, _ in rep.zeros):
            return z, coeffs, rep
    raise ParamError(f"no tried combination moves the zeros off vertex {vertex}")


def export_uv(m, fp, path, format="obj"):
    """Write the parametrization as OBJ (``vt`` per cut-mesh vertex) or SVG."""
    fmt = format.lower()
    cm = fp.domain.mesh
    uv = fp.uv
    if fmt in ("obj", "obj-vt"):
        from .meshio import save_obj

        if m.dim == 3:
            save_obj(path, m.vertices, m.faces, uv=uv, uv_faces=cm.faces)
        else:
            # positions in R^d with d != 3 cannot go into OBJ; use the flat layout
            save_obj(path, np.c_[uv, np.zeros(len(uv))], cm.faces, uv=uv, uv_faces=cm.faces)
        return path
    if fmt == "svg":
        lo = uv.min(0)
        hi = uv.max(0)
        span = float(max((hi - lo).max(), 1e-12))
        size = 800.0
        pad = 10.0
        sc = (size - 2 * pad) / span

        def pt(p):
            x = pad + (p[0] - lo[0]) * sc
            y = pad + (hi[1] - p[1]) * sc
            return f"{x:.3f},{y:.3f}"

        w = pad * 2 + (hi[0] - lo[0]) * sc
        hgt = pad * 2 + (hi[1] - lo[1]) * sc
        lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3f}" height="{hgt:.3f}" '
                 f'viewBox="0 0 {w:.3f} {hgt:.3f}">',
                 '<g fill="none" stroke="#555" stroke-width="0.5">']
        for f in cm.faces:
            lines.append(f'<polygon points="{pt(uv[f[0]])} {pt(uv[f[1]])} {pt(uv[f[2]])}"/>')
        lines.append("</g>")
        lines.append('<g stroke="#d22" stroke-width="1.5">')
        for loop in cm.boundary_loops():
            for hh in loop:
                a, b = uv[cm.he_tail[hh]], uv[cm.he_head[hh]]
                pa, pb = pt(a).split(","), pt(b).split(",")
                lines.append(f'<line x1="{pa[0]}" y1="{pa[1]}" x2="{pb[0]}" y2="{pb[1]}"/>')
        lines.append("</g>")
        lines.append("</svg>")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        return path
    raise ValueError(f"unknown export format {format!r}")


def flatten(m, zeta, fd=None, root=0):
    """Fundamental domain, integrated coordinates and zero report in one call."""
    from .homology import fundamental_domain

    if fd is None:
        fd = fundamental_domain(m)
    fp = integrate_over_domain(m, fd, zeta, root)
    _, g = euler_genus(m)
    re, im = form_parts(zeta)
    rep = None
    if g >= 1 and (np.any(re != 0) or np.any(im != 0)):
        rep = detect_zeros(m, zeta)
    return FlatParam(fp.uv, fp.domain, fp.residual, fp.root, rep)
