"""Period matrices and conformal-equivalence checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .homology import standard_symplectic
from .simplicial import integrate


class PeriodError(RuntimeError):
    pass


@dataclass(frozen=True)
class PeriodData:
    C: np.ndarray                 # intersection matrix used in CR = S
    S: np.ndarray
    R: np.ndarray
    P: np.ndarray                 # (2g, g) complex periods of the independent forms
    table: np.ndarray             # (2g, 2g) complex periods of all holomorphic forms
    c_sign: int                   # C = c_sign * pairing
    independent: list
    residuals: dict = field(default_factory=dict)

    @property
    def genus(self):
        return self.C.shape[0] // 2

    @property
    def tau(self):
        """Modulus ``int_b zeta / int_a zeta`` for genus one (None otherwise)."""
        if self.genus != 1:
            return None
        return complex(self.P[1, 0] / self.P[0, 0])

    def riemann_matrix(self):
        """``B A^-1`` with A, B the a- and b-cycle blocks of P (canonical bases)."""
        g = self.genus
        A, B = self.P[:g], self.P[g:]
        return B @ np.linalg.inv(A)

    def to_json(self):
        def mat(x):
            return np.asarray(x, float).tolist()

        out = {
            "genus": self.genus,
            "C": np.asarray(self.C, int).tolist(),
            "c_sign": self.c_sign,
            "S": mat(self.S),
            "R": mat(self.R),
            "P_real": mat(self.P.real),
            "P_imag": mat(self.P.imag),
            "table_real": mat(self.table.real),
            "table_imag": mat(self.table.imag),
            "independent": [int(i) for i in self.independent],
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }
        if self.genus == 1:
            out["tau"] = [self.tau.real, self.tau.imag]
        if self.genus >= 1:
            try:
                Om = self.riemann_matrix()
                out["riemann_real"] = mat(Om.real)
                out["riemann_imag"] = mat(Om.imag)
            except np.linalg.LinAlgError:
                pass
        return out


def dual_holomorphic_basis(pairing, H):
    """Recombine the forms so the real periods reproduce C; returns ``(C, S, c_sign)``.

    With forms dual to the basis, ``Re int_{e_i} zeta_k = delta_ik`` and
    ``Im int_{e_i} zeta_k = H_ik``.  The combination ``zeta C`` has real
    periods C and imaginary periods ``S = H C``.  The sign of C relative to the
    crossing pairing is the one that makes S positive definite.
    """
    P = np.asarray(pairing, np.int64)
    H = np.asarray(H, float)
    if P.size == 0:
        return P, np.zeros((0, 0)), 1
    best = None
    for sign in (1, -1):
        C = sign * P
        S = H @ C
        Ssym = 0.5 * (S + S.T)
        lam = float(np.linalg.eigvalsh(Ssym).min())
        if best is None or lam > best[3]:
            best = (C, S, sign, lam)
    C, S, sign, lam = best
    return C, S, sign


def period_matrix_R(C, S, tol=1e-3):
    """``R = C^-1 S`` with its diagnostics (``R^2 + I`` and symmetry of S)."""
    C = np.asarray(C, float)
    S = np.asarray(S, float)
    if abs(np.linalg.det(C)) < 0.5:
        raise PeriodError("intersection matrix is singular")
    R = np.linalg.solve(C, S)
    n = len(R)
    r2 = float(np.linalg.norm(R @ R + np.eye(n)))
    diag = {
        "R2_plus_I": r2,
        "S_asym": float(np.linalg.norm(S - S.T) / max(np.linalg.norm(S), 1e-300)),
        "S_min_eig": float(np.linalg.eigvalsh(0.5 * (S + S.T)).min()) if n else 0.0,
        "CR_minus_S": float(np.linalg.norm(C @ R - S)),
        "R2_ok": r2 < tol,
    }
    return R, diag


def period_table(basis, forms):
    """Complex periods ``int_{e_i} zeta_k`` for every cycle and every holomorphic form."""
    T = np.empty((len(basis.cycles), len(forms)), complex)
    for i, c in enumerate(basis.cycles):
        for k, z in enumerate(forms):
            T[i, k] = integrate(z.real.form, c) + 1j * integrate(z.imag, c)
    return T


def period_matrix_P(m, basis, holo):
    """(2g, len(holo)) periods of the given holomorphic forms over the basis cycles."""
    return period_table(basis, holo)


def period_data(m, holoset, pairing=None):
    """Assemble C, S, R and the complex period matrices from a holomorphic set."""
    basis = holoset.basis
    if pairing is None:
        from .homology import intersection_pairing
        pairing = intersection_pairing(m, list(basis.cycles))
    C, S, sign = dual_holomorphic_basis(pairing, holoset.H)
    R, diag = period_matrix_R(C, S)
    table = period_table(basis, holoset.forms)
    P = table[:, holoset.independent]
    diag["duality"] = float(np.abs(holoset.dual.residual - np.eye(len(C))).max()) if len(C) else 0.0
    diag["wedge_vs_integer"] = float(np.abs(holoset.A_wedge - holoset.A).max()) if len(C) else 0.0
    diag["harmonic_residual"] = max((h.residual for h in holoset.harmonic), default=0.0)
    diag.pop("R2_ok")
    return PeriodData(np.asarray(C, np.int64), S, R, P, table, sign, list(holoset.independent), diag)


@dataclass(frozen=True)
class Equivalence:
    equivalent: bool
    residual_R: float
    residual_C: float
    det: int
    symplectic: bool | None


def verify_equivalence(R1, C1, R2, C2, N, tol=1e-3):
    """Check ``N^-1 R1 N = R2`` and ``N^T C1 N = C2`` for a unimodular integer N.

    When both C are the standard symplectic matrix, N must also be symplectic.
    """
    N = np.asarray(N)
    if not np.allclose(N, np.rint(N)):
        raise PeriodError("N must be an integer matrix")
    N = np.rint(N).astype(np.int64)
    R1, R2 = np.asarray(R1, float), np.asarray(R2, float)
    C1, C2 = np.asarray(C1, np.int64), np.asarray(C2, np.int64)
    det = int(round(np.linalg.det(N))) if len(N) else 1
    if abs(det) != 1:
        return Equivalence(False, np.inf, np.inf, det, None)
    Ninv = np.linalg.inv(N.astype(float))
    rR = float(np.linalg.norm(Ninv @ R1 @ N - R2))
    rC = float(np.linalg.norm(N.T @ C1 @ N - C2))
    symp = None
    g = len(N) // 2
    J = standard_symplectic(g)
    if np.array_equal(C1, J) and np.array_equal(C2, J):
        symp = bool(np.array_equal(N.T @ J @ N, J))
    ok = rR < tol and rC < tol and symp is not False
    return Equivalence(bool(ok), rR, rC, det, symp)
