"""Compare the compiled and numpy kernel backends on a refined icosphere.

Usage: python benchmarks/bench_kernels.py [--level 5] [--repeat 20]
"""
import argparse
import importlib
import time

import numpy as np

from conformal_atlas import shapes
from conformal_atlas.mesh import cotan_weights
from conformal_atlas._core import _kernels_py


def _timeit(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def run(level=5, repeat=20):
    try:
        compiled = importlib.import_module("conformal_atlas._core._kernels")
    except ImportError:
        compiled = None
    m = shapes.icosphere(level)
    u = np.ascontiguousarray(m.edges[:, 0])
    v = np.ascontiguousarray(m.edges[:, 1])
    w = np.ascontiguousarray(cotan_weights(m))
    h = np.ascontiguousarray(m.vertices / np.linalg.norm(m.vertices, axis=1)[:, None])
    x = np.random.default_rng(0).standard_normal(m.n_edges)
    lap = _kernels_py.edge_laplacian(u, v, w, h)
    cases = {
        "edge_laplacian": lambda k: k.edge_laplacian(u, v, w, h),
        "edge_divergence": lambda k: k.edge_divergence(u, v, w, x, m.n_vertices),
        "sphere_step": lambda k: k.sphere_step(h.copy(), lap, 1e-3),
    }
    rows = []
    for name, call in cases.items():
        tp = _timeit(lambda: call(_kernels_py), repeat)
        if compiled is None:
            rows.append((name, tp, None, None))
            continue
        tc = _timeit(lambda: call(compiled), repeat)
        diff = float(np.abs(call(compiled) - call(_kernels_py)).max())
        rows.append((name, tp, tc, diff))
    print(f"icosphere level {level}: V={m.n_vertices} E={m.n_edges}")
    print(f"{'kernel':<16} {'python ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>10}")
    for name, tp, tc, diff in rows:
        if tc is None:
            print(f"{name:<16} {tp * 1e3:>10.3f} {'n/a':>10} {'':>8} {'':>10}")
        else:
            print(f"{name:<16} {tp * 1e3:>10.3f} {tc * 1e3:>10.3f} {tp / tc:>8.2f} {diff:>10.2e}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=20)
    a = ap.parse_args()
    run(a.level, a.repeat)
