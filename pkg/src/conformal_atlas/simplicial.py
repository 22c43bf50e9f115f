"""Chains, cochains and the map from 1-cochains to per-face constant forms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .mesh import chart_coords


@dataclass(frozen=True)
class Chain:
    """Integer chain of dimension ``dim``; ``coeffs`` maps cell id -> nonzero int.

    1-chains use the reference edge orientation (low id -> high id).  ``loop``
    optionally records the vertex sequence when the chain is a simple closed walk.
    """

    dim: int
    coeffs: dict = field(default_factory=dict)
    loop: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        clean = {int(k): int(v) for k, v in self.coeffs.items() if int(v) != 0}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def from_vertex_loop(cls, m, verts):
        verts = [int(v) for v in verts]
        if len(verts) < 2:
            raise ValueError("loop needs at least two vertices")
        if verts[0] == verts[-1]:
            verts = verts[:-1]
        u = np.asarray(verts)
        v = np.roll(u, -1)
        e, s = m.edge_lookup(u, v)
        if (e < 0).any():
            i = int(np.flatnonzero(e < 0)[0])
            raise ValueError(f"({u[i]}, {v[i]}) is not an edge")
        c = {}
        for ei, si in zip(e.tolist(), s.tolist()):
            c[ei] = c.get(ei, 0) + si
        return cls(1, c, tuple(verts))

    @classmethod
    def from_vector(cls, dim, vec):
        vec = np.asarray(vec)
        nz = np.flatnonzero(vec)
        return cls(dim, {int(i): int(vec[i]) for i in nz})

    def to_vector(self, n):
        out = np.zeros(n, np.int64)
        for k, v in self.coeffs.items():
            out[k] = v
        return out

    def __add__(self, other):
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return Chain(self.dim, c)

    def __neg__(self):
        loop = None if self.loop is None else tuple(reversed(self.loop))
        return Chain(self.dim, {k: -v for k, v in self.coeffs.items()}, loop)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        return Chain(self.dim, {c: int(k) * v for c, v in self.coeffs.items()})

    def is_zero(self):
        return not self.coeffs


class OneForm:
    """Real 1-cochain, one value per undirected edge in reference orientation."""

    __slots__ = ("mesh", "values")

    def __init__(self, mesh, values):
        v = np.array(values, dtype=float)
        if v.shape != (mesh.n_edges,):
            raise ValueError(f"expected {mesh.n_edges} edge values, got {v.shape}")
        v.setflags(write=False)
        self.mesh = mesh
        self.values = v

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_edges))

    def on_halfedges(self):
        return self.mesh.he_sign * self.values[self.mesh.he_edge]

    def value(self, u, v):
        e, s = self.mesh.edge_index(u, v)
        return s * self.values[e]

    def face_sums(self):
        """Coboundary evaluated on every face (zero iff the form is closed)."""
        return self.on_halfedges().reshape(-1, 3).sum(1)

    def __add__(self, other):
        return OneForm(self.mesh, self.values + other.values)

    def __sub__(self, other):
        return OneForm(self.mesh, self.values - other.values)

    def __neg__(self):
        return OneForm(self.mesh, -self.values)

    def __mul__(self, k):
        return OneForm(self.mesh, self.values * float(k))

    __rmul__ = __mul__

    def to_json(self):
        return [[int(u), int(v), float(x)] for (u, v), x in zip(self.mesh.edges, self.values)]

    @classmethod
    def from_json(cls, mesh, data):
        vals = np.zeros(mesh.n_edges)
        for u, v, x in data:
            e, s = mesh.edge_index(int(u), int(v))
            vals[e] = s * float(x)
        return cls(mesh, vals)


@dataclass(frozen=True)
class FaceForm:
    """Per-face coefficients ``(f, g)`` of ``f dx + g dy`` in each face's chart."""

    mesh: object
    coeffs: np.ndarray

    def edge_integrals(self):
        """(F, 3) integrals along chart edges ``i -> i+1``."""
        C = chart_coords(self.mesh)
        e = C[:, [1, 2, 0]] - C
        return np.einsum("fij,fj->fi", e, self.coeffs)


def boundary_matrix(m, q):
    """Sparse integer boundary operator: q=1 is (V, E), q=2 is (E, F)."""
    if q == 1:
        E = m.n_edges
        rows = np.r_[m.edges[:, 0], m.edges[:, 1]]
        cols = np.r_[np.arange(E), np.arange(E)]
        data = np.r_[-np.ones(E, np.int64), np.ones(E, np.int64)]
        return sparse.csr_matrix((data, (rows, cols)), shape=(m.n_vertices, E))
    if q == 2:
        h = np.arange(3 * m.n_faces)
        return sparse.csr_matrix((m.he_sign, (m.he_edge, h // 3)), shape=(m.n_edges, m.n_faces))
    raise ValueError("q must be 1 or 2")


def boundary_of(m, chain):
    """Integer boundary of a 1- or 2-chain."""
    d = boundary_matrix(m, chain.dim)
    n = m.n_edges if chain.dim == 1 else m.n_faces
    return Chain.from_vector(chain.dim - 1, d @ chain.to_vector(n))


def coboundary_0(m, fvals):
    f = np.asarray(fvals, float)
    return OneForm(m, f[m.edges[:, 1]] - f[m.edges[:, 0]])


def integrate(omega, chain):
    """Pair a 1-cochain with a 1-chain using compensated summation."""
    if chain.dim != 1:
        raise ValueError("can only integrate a 1-form over a 1-chain")
    v = omega.values
    return math.fsum(c * v[e] for e, c in chain.coeffs.items())


def gamma(m, omega):
    """Least-squares constant covector per face reproducing the edge values.

    Exact (up to rounding) whenever the three values around the face sum to zero.
    """
    C = chart_coords(m)
    A = C[:, [1, 2, 0]] - C                       # (F, 3, 2)
    b = omega.on_halfedges().reshape(-1, 3)
    AtA = np.einsum("fki,fkj->fij", A, A)
    Atb = np.einsum("fki,fk->fi", A, b)
    return FaceForm(m, np.linalg.solve(AtA, Atb[..., None])[..., 0])


def pl_gradient(m, fvals):
    """Gradient of the piecewise-linear interpolant of vertex values, in chart coordinates."""
    f = np.asarray(fvals, float)[m.faces]        # (F, 3)
    C = chart_coords(m)
    twice_area = C[:, 1, 0] * C[:, 2, 1]
    g = np.zeros((m.n_faces, 2))
    for i in range(3):
        opp = C[:, (i + 2) % 3] - C[:, (i + 1) % 3]
        rot = np.stack([-opp[:, 1], opp[:, 0]], 1)
        g += f[:, i, None] * rot
    return g / twice_area[:, None]


def check_gamma_commutes(m, fvals):
    """Largest per-face distance between Gamma(delta f) and grad(f)."""
    lhs = gamma(m, coboundary_0(m, fvals)).coeffs
    rhs = pl_gradient(m, fvals)
    return float(np.max(np.linalg.norm(lhs - rhs, axis=1)))
