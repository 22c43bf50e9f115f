"""Procedural test surfaces: spheres, flat and curved tori, a genus-2 plate."""
from __future__ import annotations

import numpy as np

from .mesh import Mesh


def tetrahedron():
    V = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    F = [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]
    return Mesh(V, F)


def cube():
    V = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], float)
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    F = []
    for a, b, c, d in quads:
        F += [[a, b, c], [a, c, d]]
    return Mesh(V, F)


def icosphere(subdivisions=3, radius=1.0):
    t = (1.0 + 5 ** 0.5) / 2.0
    V = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    F = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    V = [np.asarray(v, float) / np.linalg.norm(v) for v in V]
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = V[a] + V[b]
                V.append(p / np.linalg.norm(p))
                cache[key] = len(V) - 1
            return cache[key]

        nf = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        F = nf
    return Mesh(radius * np.asarray(V), F)


def ellipsoid(a=2.0, b=1.0, c=1.0, subdivisions=3):
    s = icosphere(subdivisions)
    return Mesh(s.vertices * np.array([a, b, c]), s.faces)


def uv_sphere(n_lat=8, n_lon=16):
    """Latitude/longitude sphere; ring ``n_lat // 2`` is the equator when n_lat is even."""
    V = [[0.0, 0.0, 1.0]]
    for i in range(1, n_lat):
        th = np.pi * i / n_lat
        for j in range(n_lon):
            ph = 2 * np.pi * j / n_lon
            V.append([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    V.append([0.0, 0.0, -1.0])
    south = len(V) - 1

    def ring(i, j):
        return 1 + (i - 1) * n_lon + (j % n_lon)

    F = []
    for j in range(n_lon):
        F.append([0, ring(1, j), ring(1, j + 1)])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            F += [[a, c, d], [a, d, b]]
    for j in range(n_lon):
        F.append([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    return Mesh(np.asarray(V), F)


def _grid_faces(nx, ny):
    F = []
    for i in range(nx):
        for j in range(ny):
            a = i * ny + j
            b = ((i + 1) % nx) * ny + j
            c = ((i + 1) % nx) * ny + (j + 1) % ny
            d = i * ny + (j + 1) % ny
            F += [[a, b, c], [a, c, d]]
    return F


def flat_torus(nx, ny=None, lx=1.0, ly=1.0):
    """Grid torus isometric to the flat rectangle ``[0,lx) x [0,ly)`` glued periodically.

    Vertices sit on a Clifford-type torus in R^4, where every grid cell is an
    exact planar rectangle, so the intrinsic metric is flat.  Grid index
    ``(i, j)`` maps to vertex ``i*ny + j``; ``i`` runs along x.
    """
    ny = nx if ny is None else ny
    # chord length of a step equals the requested grid spacing
    rx = lx / nx / (2 * np.sin(np.pi / nx))
    ry = ly / ny / (2 * np.sin(np.pi / ny))
    u = 2 * np.pi * np.arange(nx) / nx
    v = 2 * np.pi * np.arange(ny) / ny
    U, W = np.meshgrid(u, v, indexing="ij")
    V = np.stack([rx * np.cos(U), rx * np.sin(U), ry * np.cos(W), ry * np.sin(W)], -1).reshape(-1, 4)
    return Mesh(V, _grid_faces(nx, ny))


def torus_of_revolution(nu, nv, R=2.0, r=1.0):
    """Donut in R^3; ``u`` goes around the axis, ``v`` around the tube."""
    u = 2 * np.pi * np.arange(nu) / nu
    v = 2 * np.pi * np.arange(nv) / nv
    U, W = np.meshgrid(u, v, indexing="ij")
    rho = R + r * np.cos(W)
    V = np.stack([rho * np.cos(U), rho * np.sin(U), r * np.sin(W)], -1).reshape(-1, 3)
    return Mesh(V, _grid_faces(nu, nv))


def torus_modulus(R, r):
    """Conformal modulus (tube period over axial period) of the exact torus of revolution."""
    return r / np.sqrt(R * R - r * r)


def grid_torus(n=4):
    return torus_of_revolution(n, n)


def _voxel_surface(solid):
    nx, ny, nz = solid.shape
    pad = np.zeros((nx + 2, ny + 2, nz + 2), bool)
    pad[1:-1, 1:-1, 1:-1] = solid
    quads = []
    for (i, j, k) in zip(*np.nonzero(solid)):
        I, J, K = i + 1, j + 1, k + 1
        if not pad[I + 1, J, K]:
            quads.append([(i + 1, j, k), (i + 1, j + 1, k), (i + 1, j + 1, k + 1), (i + 1, j, k + 1)])
        if not pad[I - 1, J, K]:
            quads.append([(i, j, k), (i, j, k + 1), (i, j + 1, k + 1), (i, j + 1, k)])
        if not pad[I, J + 1, K]:
            quads.append([(i, j + 1, k), (i, j + 1, k + 1), (i + 1, j + 1, k + 1), (i + 1, j + 1, k)])
        if not pad[I, J - 1, K]:
            quads.append([(i, j, k), (i + 1, j, k), (i + 1, j, k + 1), (i, j, k + 1)])
        if not pad[I, J, K + 1]:
            quads.append([(i, j, k + 1), (i + 1, j, k + 1), (i + 1, j + 1, k + 1), (i, j + 1, k + 1)])
        if not pad[I, J, K - 1]:
            quads.append([(i, j, k), (i, j + 1, k), (i + 1, j + 1, k), (i + 1, j, k)])
    ids = {}
    V, F = [], []
    for q in quads:
        idx = []
        for p in q:
            if p not in ids:
                ids[p] = len(V)
                V.append(p)
            idx.append(ids[p])
        a, b, c, d = idx
        F += [[a, b, c], [a, c, d]]
    return np.asarray(V, float), np.asarray(F, np.int64)


def _taubin(V, F, iterations, lam=0.5, mu=-0.53):
    n = len(V)
    e = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    from scipy import sparse

    A = sparse.csr_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    A = ((A + A.T) > 0).astype(float)
    deg = np.asarray(A.sum(1)).ravel()
    for _ in range(iterations):
        for s in (lam, mu):
            V = V + s * (A @ V / deg[:, None] - V)
    return V


def double_torus(resolution=2, smooth=20):
    """Genus-2 plate with two rectangular holes, voxel-built then Taubin-smoothed.

    Face count is about ``132 * resolution**2``.
    """
    r = int(resolution)
    solid = np.zeros((7 * r, 3 * r, r), bool)
    solid[:] = True
    solid[1 * r:3 * r, 1 * r:2 * r, :] = False
    solid[4 * r:6 * r, 1 * r:2 * r, :] = False
    V, F = _voxel_surface(solid)
    V = V / r
    V = _taubin(V, F, smooth)
    return Mesh(V, F)
