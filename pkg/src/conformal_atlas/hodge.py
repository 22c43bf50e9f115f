"""Hodge star on harmonic 1-forms and holomorphic differentials."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import cotan_weights, euler_genus, face_areas
from .simplicial import FaceForm, OneForm, gamma


class HodgeError(RuntimeError):
    pass


@dataclass(frozen=True)
class HolomorphicForm:
    real: object                 # HarmonicForm
    imag: OneForm                # the star of the real part
    alpha: np.ndarray            # imag = sum_j alpha[j] * basis[j]
    index: int | None = None

    def periods(self, cycles):
        from .simplicial import integrate
        return np.array([integrate(self.real.form, c) + 1j * integrate(self.imag, c) for c in cycles])

    def to_json(self):
        return {
            "index": self.index,
            "alpha": [float(x) for x in self.alpha],
            "real": self.real.form.to_json(),
            "imag": self.imag.to_json(),
        }


@dataclass(frozen=True)
class HolomorphicSet:
    basis: object                # HomologyBasis
    dual: object                 # DualBasis
    harmonic: list               # 2g HarmonicForm
    forms: list                  # 2g HolomorphicForm
    independent: list            # indices of g complex-independent forms
    H: np.ndarray                # star matrix: column k holds alpha of form k
    A: np.ndarray                # wedge pairing used in the solves (integer)
    A_wedge: np.ndarray          # same pairing from face integrals
    weights: np.ndarray

    @property
    def genus(self):
        return len(self.independent)

    def selected(self):
        return [self.forms[i] for i in self.independent]


def star_faceform(m, ff):
    c = np.asarray(ff.coeffs)
    return FaceForm(m, np.stack([-c[:, 1], c[:, 0]], 1))


def wedge_integral(m, A, B, starred=False, areas=None):
    """``integral of A ^ B`` (or ``A ^ *B`` when starred) for per-face constant forms."""
    a = face_areas(m) if areas is None else areas
    f, g = A.coeffs[:, 0], A.coeffs[:, 1]
    p, q = B.coeffs[:, 0], B.coeffs[:, 1]
    if starred:
        return float(np.dot(f * p + g * q, a))
    return float(np.dot(f * q - g * p, a))


def wedge_matrix(m, faceforms, starred=False):
    a = face_areas(m)
    if not faceforms:
        return np.zeros((0, 0))
    X = np.stack([ff.coeffs for ff in faceforms], 0)       # (k, F, 2)
    if starred:
        return np.einsum("ifc,jfc,f->ij", X, X, a)
    return np.einsum("if,jf,f->ij", X[..., 0], X[..., 1], a) - np.einsum("if,jf,f->ij", X[..., 1], X[..., 0], a)


def dual_wedge_pairing(pairing):
    """Wedge pairing of the forms dual to cycles with intersection pairing ``pairing``."""
    P = np.asarray(pairing, float)
    return np.rint(np.linalg.inv(P).T).astype(np.int64)


def hodge_star_coeffs(m, basis, omega, A=None, faceforms=None):
    """Coefficients ``alpha`` with ``*omega = sum alpha_j basis_j``, from ``A alpha = b``.

    ``A_ij = integral basis_i ^ basis_j`` (wedge integrals unless given) and
    ``b_i = integral basis_i ^ *omega``.
    """
    if faceforms is None:
        faceforms = [gamma(m, w.form if hasattr(w, "form") else w) for w in basis]
    if A is None:
        A = wedge_matrix(m, faceforms)
    w = omega.form if hasattr(omega, "form") else omega
    G = gamma(m, w)
    areas = face_areas(m)
    b = np.array([wedge_integral(m, ff, G, True, areas) for ff in faceforms])
    A = np.asarray(A, float)
    if abs(np.linalg.det(A)) < 1e-12:
        raise HodgeError("wedge pairing is singular; forms are not a basis")
    return np.linalg.solve(A, b)


def star_matrix(m, faceforms, A):
    """(2g, 2g) matrix whose column k holds the star coefficients of form k."""
    A = np.asarray(A, float)
    B = wedge_matrix(m, faceforms, starred=True)          # B[i, k] = int w_i ^ *w_k
    if abs(np.linalg.det(A)) < 1e-12:
        raise HodgeError("wedge pairing is singular; forms are not a basis")
    return np.linalg.solve(A, B)


def select_independent(periods, g):
    """Pivoted complex Gram-Schmidt over columns; ties go to the smaller index."""
    P = np.asarray(periods, complex)
    cols = [P[:, k].copy() for k in range(P.shape[1])]
    chosen = []
    Q = []
    for _ in range(g):
        best, best_n = None, -1.0
        for k, c in enumerate(cols):
            if k in chosen:
                continue
            r = c.copy()
            for q in Q:
                r -= np.vdot(q, r) * q
            n = float(np.linalg.norm(r))
            if n > best_n * (1 + 1e-9):
                best, best_n = k, n
        if best is None or best_n < 1e-9:
            raise HodgeError("holomorphic forms do not span a g-dimensional space")
        r = cols[best].copy()
        for q in Q:
            r -= np.vdot(q, r) * q
        Q.append(r / np.linalg.norm(r))
        chosen.append(best)
    return sorted(chosen)


def holomorphic_forms(m, basis, dual, harmonic, pairing=None, weights=None):
    """Assemble ``zeta_k = omega_k + i * omega_k`` for harmonic forms dual to ``basis``."""
    g = len(harmonic) // 2
    ffs = [gamma(m, h.form) for h in harmonic]
    A_wedge = wedge_matrix(m, ffs)
    if pairing is None:
        from .homology import intersection_pairing
        pairing = intersection_pairing(m, list(basis.cycles))
    A = dual_wedge_pairing(pairing)
    H = star_matrix(m, ffs, A)
    vals = np.stack([h.form.values for h in harmonic], 1)
    forms = []
    for k, h in enumerate(harmonic):
        imag = OneForm(m, vals @ H[:, k])
        forms.append(HolomorphicForm(h, imag, H[:, k].copy(), k))
    # periods over the basis cycles: delta_ik + i H_ik for dual forms
    from .simplicial import integrate
    per = np.array([[integrate(h.form, c) for h in harmonic] for c in basis.cycles]) + 1j * (
        np.array([[integrate(f.imag, c) for f in forms] for c in basis.cycles]))
    indep = select_independent(per, g)
    return HolomorphicSet(basis, dual, list(harmonic), forms, indep, H, A, A_wedge,
                          np.asarray(weights) if weights is not None else None)


def holomorphic_basis(m, basis=None, weights=None, solver="direct", tol=1e-8, executor=None):
    """Homology, dual cohomology, harmonic diffusion and star for a closed mesh."""
    from .cohomology import dual_basis
    from .harmonic import harmonic_basis
    from .homology import handle_basis

    _, g = euler_genus(m)
    if g == 0:
        return HolomorphicSet(None, None, [], [], [], np.zeros((0, 0)), np.zeros((0, 0), np.int64),
                              np.zeros((0, 0)), None)
    if basis is None:
        basis = handle_basis(m)
    if weights is None:
        weights = cotan_weights(m)
    dual = dual_basis(m, basis)
    harm = harmonic_basis(m, weights, dual.forms, solver, tol, executor)
    return holomorphic_forms(m, basis, dual, harm, weights=weights)
