"""String energies, the weighted graph Laplacian and harmonic representatives of 1-forms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ._core import edge_divergence, edge_laplacian
from .simplicial import OneForm


class HarmonicError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = list(trace or [])


@dataclass(frozen=True)
class HarmonicForm:
    form: OneForm
    residual: float
    energy: float
    index: int | None = None
    solver: str = "direct"
    iterations: int = 0
    potential: np.ndarray | None = field(default=None, repr=False)
    trace: tuple = ()

    @property
    def values(self):
        return self.form.values


def _edges(m):
    return np.ascontiguousarray(m.edges[:, 0]), np.ascontiguousarray(m.edges[:, 1])


def string_energy_0(m, weights, f):
    """``sum_edges k_uv |f(u) - f(v)|^2`` for scalar or vector vertex values."""
    f = np.asarray(f, float)
    u, v = _edges(m)
    d = f[u] - f[v]
    sq = d * d if d.ndim == 1 else np.einsum("ij,ij->i", d, d)
    return float(np.dot(weights, sq))


def string_energy_1(m, weights, omega):
    w = omega.values
    return float(np.dot(weights, w * w))


def laplacian_0(m, weights, f):
    """``(Lf)(u) = sum_v k_uv (f(u) - f(v))``; the gradient of string_energy_0 is ``2 L f``."""
    u, v = _edges(m)
    return edge_laplacian(u, v, np.ascontiguousarray(weights, dtype=np.float64), f)


def laplacian_matrix(m, weights):
    u, v = m.edges[:, 0], m.edges[:, 1]
    n = m.n_vertices
    W = sparse.csr_matrix((np.r_[weights, weights], (np.r_[u, v], np.r_[v, u])), shape=(n, n))
    return (sparse.diags(np.asarray(W.sum(1)).ravel()) - W).tocsr()


def form_divergence(m, weights, omega_vals):
    """``div(u) = sum_v k_uv omega[u -> v]``; zero at every vertex iff the form is harmonic."""
    u, v = _edges(m)
    return edge_divergence(u, v, np.ascontiguousarray(weights, dtype=np.float64),
                           np.ascontiguousarray(omega_vals, dtype=np.float64), m.n_vertices)


def _finish(m, weights, omega, F):
    vals = omega.values + F[m.edges[:, 1]] - F[m.edges[:, 0]]
    res = float(np.abs(form_divergence(m, weights, vals)).max())
    return OneForm(m, vals), res


class PinnedLaplacianSolver:
    """Factor the Laplacian once with vertex ``pin`` fixed to zero; reuse for many forms."""

    def __init__(self, m, weights, pin=0):
        self.m = m
        self.weights = np.asarray(weights, float)
        self.pin = pin
        L = laplacian_matrix(m, self.weights)
        keep = np.ones(m.n_vertices, bool)
        keep[pin] = False
        self.keep = keep
        self.lu = splu(L[keep][:, keep].tocsc())

    def potential(self, omega):
        b = form_divergence(self.m, self.weights, omega.values)
        F = np.zeros(self.m.n_vertices)
        F[self.keep] = self.lu.solve(b[self.keep])
        return F


def diffuse_to_harmonic(m, weights, omega, solver="direct", tol=1e-8, dt=None,
                        max_iter=200_000, index=None, factor=None):
    """Harmonic representative ``omega + dF`` of the class of the closed form ``omega``.

    ``F`` minimizes ``sum k (omega[u,v] + F(v) - F(u))^2``.  The reported
    residual is the largest absolute weighted divergence of the result.

    ``solver='direct'`` solves the pinned Laplacian system; ``'descent'``
    runs explicit gradient steps ``F += dt * div`` until the relative energy
    decrease drops below 1e-10 or the residual below ``tol``.
    """
    weights = np.asarray(weights, float)
    if solver == "direct":
        fac = factor if factor is not None else PinnedLaplacianSolver(m, weights)
        F = fac.potential(omega)
        form, res = _finish(m, weights, omega, F)
        if res > tol:
            # one step of iterative refinement against rounding
            corr = fac.potential(form)
            F = F + corr
            form, res = _finish(m, weights, omega, F)
        return HarmonicForm(form, res, string_energy_1(m, weights, form), index, "direct", 1, F)
    if solver != "descent":
        raise ValueError(f"unknown solver {solver!r}")
    deg = np.bincount(m.edges.ravel(), np.r_[weights, weights], m.n_vertices)
    if dt is None:
        dt = 0.5 / float(deg.max())
    u, v = _edges(m)
    F = np.zeros(m.n_vertices)
    vals = omega.values.copy()
    energy = float(np.dot(weights, vals * vals))
    trace = [energy]
    it = 0
    res = np.inf
    for it in range(1, max_iter + 1):
        div = form_divergence(m, weights, vals)
        res = float(np.abs(div).max())
        if res < tol:
            break
        F += dt * div
        vals = omega.values + F[v] - F[u]
        e_new = float(np.dot(weights, vals * vals))
        trace.append(e_new)
        if not np.isfinite(e_new) or e_new > energy * (1 + 1e-12) + 1e-300:
            raise HarmonicError(f"descent diverged at iteration {it} (dt={dt:.3g})", trace)
        if energy - e_new < 1e-10 * max(energy, 1e-300):
            energy = e_new
            res = float(np.abs(form_divergence(m, weights, vals)).max())
            break
        energy = e_new
    form = OneForm(m, vals)
    return HarmonicForm(form, res, string_energy_1(m, weights, form), index, "descent", it, F,
                        tuple(trace))


def harmonic_basis(m, weights, forms, solver="direct", tol=1e-8, executor=None):
    """Diffuse each closed form; one factorization is shared by all forms."""
    fac = PinnedLaplacianSolver(m, weights) if solver == "direct" else None

    def run(item):
        i, w = item
        return diffuse_to_harmonic(m, weights, w, solver, tol, index=i, factor=fac)

    items = list(enumerate(forms))
    if executor is None:
        return [run(it) for it in items]
    return list(executor.map(run, items))
