"""OBJ and PLY reading/writing."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import Mesh, MeshError


def _read_obj(path):
    verts, faces = [], []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                try:
                    verts.append([float(x) for x in parts[1:4]])
                except ValueError as exc:
                    raise MeshError("parse failure", cell=f"line {lineno}", detail=str(exc)) from None
                if len(verts[-1]) != 3:
                    raise MeshError("parse failure", cell=f"line {lineno}", detail="vertex needs 3 coordinates")
            elif tag == "f":
                idx = []
                for tok in parts[1:]:
                    try:
                        i = int(tok.split("/")[0])
                    except ValueError:
                        raise MeshError("parse failure", cell=f"line {lineno}", detail=tok) from None
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) != 3:
                    raise MeshError("non-triangular face", cell=f"line {lineno}",
                                    detail=f"{len(idx)} vertices")
                faces.append(idx)
    if not verts or not faces:
        raise MeshError("parse failure", detail="no vertices or faces")
    return np.asarray(verts, float), np.asarray(faces, np.int64)


def _read_ply(path):
    from plyfile import PlyData

    try:
        ply = PlyData.read(str(path))
        vx = ply["vertex"]
        V = np.stack([np.asarray(vx[c], float) for c in ("x", "y", "z")], 1)
        fe = ply["face"]
        name = "vertex_indices" if "vertex_indices" in fe.data.dtype.names else "vertex_index"
        raw = fe[name]
    except (KeyError, ValueError, IndexError, OSError) as exc:
        raise MeshError("parse failure", detail=str(exc)) from None
    faces = []
    for i, f in enumerate(raw):
        if len(f) != 3:
            raise MeshError("non-triangular face", cell=i, detail=f"{len(f)} vertices")
        faces.append([int(x) for x in f])
    return V, np.asarray(faces, np.int64)


def _compact(V, F):
    used = np.zeros(len(V), bool)
    used[F.ravel()] = True
    if used.all():
        return V, F
    remap = -np.ones(len(V), np.int64)
    remap[used] = np.arange(used.sum())
    return V[used], remap[F]


def load_mesh(path, format=None):
    """Read a closed triangle mesh from OBJ or PLY.

    Unreferenced vertices are dropped so ids come out dense.  Every other
    defect (quads, boundary, bad winding, non-manifold cells) raises
    :class:`MeshError` naming the offending cell.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if not path.exists():
        raise FileNotFoundError(str(path))
    if fmt == "obj":
        V, F = _read_obj(path)
    elif fmt == "ply":
        V, F = _read_ply(path)
    else:
        raise MeshError("unsupported format", cell=fmt)
    if F.min() < 0 or F.max() >= len(V):
        raise MeshError("vertex index out of range")
    V, F = _compact(V, F)
    return Mesh(V, F)


def save_obj(path, vertices, faces, uv=None, uv_faces=None):
    """Write OBJ; with ``uv`` adds ``vt`` records and ``f v/vt`` corners."""
    V = np.asarray(vertices, float)
    if V.shape[1] > 3:
        raise ValueError("OBJ holds 3D positions only")
    with open(path, "w", encoding="utf-8") as fh:
        for p in V:
            fh.write("v " + " ".join(f"{x:.17g}" for x in p) + "\n")
        if uv is not None:
            for t in np.asarray(uv, float):
                fh.write(f"vt {t[0]:.17g} {t[1]:.17g}\n")
            tf = faces if uv_faces is None else uv_faces
            for f, t in zip(np.asarray(faces), np.asarray(tf)):
                fh.write("f " + " ".join(f"{a + 1}/{b + 1}" for a, b in zip(f, t)) + "\n")
        else:
            for f in np.asarray(faces):
                fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def save_ply(path, vertices, faces, binary=False):
    from plyfile import PlyData, PlyElement

    V = np.asarray(vertices, float)
    vx = np.array([tuple(p) for p in V], dtype=[("x", "f8"), ("y", "f8"), ("z", "f8")])
    fc = np.empty(len(faces), dtype=[("vertex_indices", "i4", (3,))])
    fc["vertex_indices"] = np.asarray(faces, np.int32)
    PlyData([PlyElement.describe(vx, "vertex"), PlyElement.describe(fc, "face")],
            text=not binary).write(str(path))
