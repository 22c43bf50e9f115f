"""Genus-zero maps to the unit sphere: Gauss map, barycentric and conformal flows."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._core import edge_laplacian, sphere_step
from .mesh import (NEGATIVE_TOL, chart_coords, chart_coords_from_points, cotan_weights,
                   euler_genus, vertex_areas)


class SphereMapError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = list(trace or [])


@dataclass(frozen=True)
class SphereMap:
    positions: np.ndarray        # (V, 3) unit vectors
    energy: float
    trace: tuple = ()
    iterations: int = 0
    method: str = "gauss"
    centroid: float = 0.0

    def to_json(self):
        return {
            "method": self.method,
            "energy": self.energy,
            "iterations": self.iterations,
            "centroid": self.centroid,
            "positions": self.positions.tolist(),
        }


def _check_genus0(m):
    if m.dim != 3:
        raise SphereMapError("sphere maps need vertices in R^3")
    _, g = euler_genus(m)
    if g != 0:
        raise SphereMapError(f"sphere maps need genus 0, mesh has genus {g}")


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1)[:, None]


def gauss_map(m):
    """Unit vertex normals from area-weighted incident face normals."""
    _check_genus0(m)
    P = m.vertices[m.faces]
    n2 = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])       # 2 * area * normal
    N = np.zeros((m.n_vertices, 3))
    for i in range(3):
        np.add.at(N, m.faces[:, i], n2)
    ln = np.linalg.norm(N, axis=1)
    bad = np.flatnonzero(ln <= 1e-14 * max(ln.max(), 1e-300))
    if bad.size:
        raise SphereMapError(f"zero vertex normal at vertex {int(bad[0])}")
    h = N / ln[:, None]
    return SphereMap(h, _energy(m, np.ones(m.n_edges), h), (), 0, "gauss", 0.0)


def project_tangent(v, x):
    """``x - v (v . x) / (v . v)``, row-wise for stacked inputs."""
    v = np.asarray(v, float)
    x = np.asarray(x, float)
    if v.ndim == 1:
        return x - v * (v @ x) / (v @ v)
    return x - v * (np.einsum("ij,ij->i", v, x) / np.einsum("ij,ij->i", v, v))[:, None]


def _energy(m, w, h):
    d = h[m.edges[:, 0]] - h[m.edges[:, 1]]
    return float(np.dot(w, np.einsum("ij,ij->i", d, d)))


def _recenter(h, areas):
    c = (areas[:, None] * h).sum(0) / areas.sum()
    h = _normalize_rows(h - c)
    return h, float(np.linalg.norm(c))


def _flow(m, w, h, dt, eps, max_iter, areas, adaptive, method, grow=1.0, precond=None):
    u = np.ascontiguousarray(m.edges[:, 0])
    v = np.ascontiguousarray(m.edges[:, 1])
    w = np.ascontiguousarray(w, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64).copy()
    E = _energy(m, w, h)
    trace = [E]
    cnorm = 0.0
    it = 0
    halvings = 0
    while it < max_iter:
        d = edge_laplacian(u, v, w, h)
        if precond is not None:
            d = np.ascontiguousarray(project_tangent(h, precond(project_tangent(h, d))))
        cand = sphere_step(h.copy(), d, dt)
        if areas is not None:
            cand, cnorm_c = _recenter(cand, areas)
        E_new = _energy(m, w, cand)
        if not np.isfinite(E_new) or E_new > E * (1 + 1e-15):
            if not adaptive:
                trace.append(E_new)
                raise SphereMapError(f"{method} flow diverged at iteration {it + 1} (dt={dt:.3g})", trace)
            dt *= 0.5
            halvings += 1
            if halvings > 40:
                if it == 0:
                    raise SphereMapError(f"{method} flow cannot decrease the energy", trace)
                break  # no descent left at working precision
            continue
        it += 1
        halvings = 0
        dt *= grow
        h = cand
        if areas is not None:
            cnorm = cnorm_c
        trace.append(E_new)
        done = E - E_new < eps * E
        E = E_new
        if done:
            break
    return h, E, trace, it, cnorm


def _preconditioner(m, w, areas, shift):
    from scipy import sparse
    from scipy.sparse.linalg import splu

    from .harmonic import laplacian_matrix

    a = areas * (4 * np.pi / areas.sum())
    lu = splu((laplacian_matrix(m, w) + shift * sparse.diags(a)).tocsc())
    return lu.solve


def barycentric_embed(m, dt=None, eps=1e-7, max_iter=20_000, init=None, center=True,
                      precondition=False):
    """Unit-weight tangential Laplacian flow from the Gauss map.

    The explicit flow uses a fixed step, and a step that increases the energy
    is reported as divergence.  With ``center`` the area-weighted centroid is
    removed after each step, which keeps the flow away from the collapsed
    (constant) map.  ``precondition`` switches to the preconditioned flow
    used by :func:`conformal_embed`.
    """
    _check_genus0(m)
    h0 = gauss_map(m).positions if init is None else _normalize_rows(np.asarray(init, float))
    w = np.ones(m.n_edges)
    areas = vertex_areas(m) if center else None
    if precondition:
        pre = _preconditioner(m, w, vertex_areas(m), 0.1)
        h, E, trace, it, c = _flow(m, w, h0, 1.0 if dt is None else dt, eps, max_iter, areas, True,
                                   "barycentric", 1.5, pre)
    else:
        if dt is None:
            deg = np.bincount(m.edges.ravel(), minlength=m.n_vertices)
            dt = 0.1 / float(deg.max())
        h, E, trace, it, c = _flow(m, w, h0, dt, eps, max_iter, areas, False, "barycentric")
    return SphereMap(h, E, tuple(trace), it, "barycentric", c)


def conformal_embed(m, dt=None, eps=1e-7, max_iter=50_000, init=None, weights=None,
                    precondition=True, shift=0.1):
    """Cotangent-weight tangential flow with centroid normalization.

    Starts from the barycentric embedding.  After each step the area-weighted
    centroid is subtracted and the vertices renormalized; the step is halved
    whenever the energy would increase and grows after accepted steps.

    By default the tangential gradient is preconditioned with
    ``(L + shift * A)^-1`` (L the cotangent Laplacian, A the vertex areas
    scaled to the unit sphere), which converges in tens of iterations.  With
    ``precondition=False`` the plain explicit flow is run from
    ``dt = 0.1 / max weighted degree``.  Negative weights must be removed
    beforehand.
    """
    _check_genus0(m)
    w = cotan_weights(m) if weights is None else np.asarray(weights, float)
    if (w < -NEGATIVE_TOL).any():
        n = int((w < -NEGATIVE_TOL).sum())
        raise SphereMapError(f"{n} negative cotangent weights; preprocess the mesh first")
    if init is None:
        init = barycentric_embed(m, eps=1e-4, precondition=precondition).positions
    h0 = _normalize_rows(np.asarray(init, float))
    areas = vertex_areas(m)
    h0, _ = _recenter(h0, areas)
    if precondition:
        pre = _preconditioner(m, w, areas, shift)
        h, E, trace, it, c = _flow(m, w, h0, 1.0 if dt is None else dt, eps, max_iter, areas, True,
                                   "conformal", 1.5, pre)
    else:
        if dt is None:
            deg = np.bincount(m.edges.ravel(), np.r_[w, w], m.n_vertices)
            dt = 0.1 / float(deg.max())
        h, E, trace, it, c = _flow(m, w, h0, dt, eps, max_iter, areas, True, "conformal", 1.1)
    return SphereMap(h, E, tuple(trace), it, "conformal", c)


def tangential_residual(m, h, weights=None):
    w = cotan_weights(m) if weights is None else weights
    lap = edge_laplacian(np.ascontiguousarray(m.edges[:, 0]), np.ascontiguousarray(m.edges[:, 1]),
                         np.ascontiguousarray(w, dtype=np.float64), np.ascontiguousarray(h))
    return float(np.abs(project_tangent(h, lap)).max())


def solid_angles(h, faces):
    """Signed solid angle of each spherical triangle (Van Oosterom-Strackee)."""
    a, b, c = h[faces[:, 0]], h[faces[:, 1]], h[faces[:, 2]]
    num = np.einsum("ij,ij->i", a, np.cross(b, c))
    den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2 * np.arctan2(num, den)


def degree(m, h):
    """Integer degree of the map onto the sphere."""
    return int(round(solid_angles(np.asarray(h, float), m.faces).sum() / (4 * np.pi)))


def flipped_faces(m, h):
    h = np.asarray(h, float)
    a, b, c = h[m.faces[:, 0]], h[m.faces[:, 1]], h[m.faces[:, 2]]
    return np.flatnonzero(np.einsum("ij,ij->i", a, np.cross(b, c)) <= 0)


def distortion(m, h):
    """Per-face ratio of singular values of the affine map source chart -> image chart."""
    S = chart_coords(m)
    T = chart_coords_from_points(np.asarray(h, float)[m.faces])
    Es = np.stack([S[:, 1] - S[:, 0], S[:, 2] - S[:, 0]], 2)    # (F, 2, 2) columns = edges
    Et = np.stack([T[:, 1] - T[:, 0], T[:, 2] - T[:, 0]], 2)
    J = Et @ np.linalg.inv(Es)
    sv = np.linalg.svd(J, compute_uv=False)
    return sv[:, 0] / sv[:, 1]


def stereographic(p):
    """``(x0 + i x1) / (1 + x2)`` for unit vectors; the south pole has no image."""
    p = np.asarray(p, float)
    den = 1 + p[..., 2]
    if np.any(np.abs(den) < 1e-12):
        raise ValueError("point at infinity: the south pole (0, 0, -1) has no stereographic image")
    return (p[..., 0] + 1j * p[..., 1]) / den


def inverse_stereographic(z):
    z = np.asarray(z, complex)
    r2 = (z * z.conjugate()).real
    return np.stack([2 * z.real, 2 * z.imag, 1 - r2], -1) / (1 + r2)[..., None]


def mobius(z, a, b, c, d):
    """``(a z + b) / (c z + d)``; requires ``a d - b c != 0``."""
    if abs(a * d - b * c) < 1e-300:
        raise ValueError("degenerate Mobius transformation (ad - bc = 0)")
    z = np.asarray(z, complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (a * z + b) / (c * z + d)
    return out if out.ndim else complex(out)


def mobius_compose(m1, m2):
    """Coefficients of ``m1 after m2`` (matrix product of the 2x2 coefficient matrices)."""
    A = np.array([[m1[0], m1[1]], [m1[2], m1[3]]], complex)
    B = np.array([[m2[0], m2[1]], [m2[2], m2[3]]], complex)
    M = A @ B
    return complex(M[0, 0]), complex(M[0, 1]), complex(M[1, 0]), complex(M[1, 1])


def sphere_mobius(h, coeffs):
    """Apply a Mobius map to points of the sphere through the stereographic chart."""
    h = np.asarray(h, float)
    z = stereographic(h)
    return inverse_stereographic(mobius(z, *coeffs))
