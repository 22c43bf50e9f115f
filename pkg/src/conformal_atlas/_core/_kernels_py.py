"""Numpy reference implementations of the compiled kernels."""
import numpy as np


def edge_laplacian(u, v, w, f):
    """``out[i] = sum_j w_ij (f[i] - f[j])`` over the edge list, for 1D or 2D ``f``."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    d = f[u] - f[v]
    if f.ndim == 1:
        wd = w * d
        return np.bincount(u, wd, len(f)) - np.bincount(v, wd, len(f))
    wd = w[:, None] * d
    out = np.empty_like(f)
    for k in range(f.shape[1]):
        out[:, k] = np.bincount(u, wd[:, k], len(f)) - np.bincount(v, wd[:, k], len(f))
    return out


def edge_divergence(u, v, w, x, n):
    """``out[i] = sum over edges leaving i of w x  -  sum over edges entering i of w x``."""
    wx = np.asarray(w, np.float64) * np.asarray(x, np.float64)
    return np.bincount(u, wx, n) - np.bincount(v, wx, n)


def sphere_step(h, lap, dt):
    """One projected step ``h - dt * P_h(lap)`` followed by renormalization, in place."""
    radial = np.einsum("ij,ij->i", lap, h)
    h -= dt * (lap - radial[:, None] * h)
    h /= np.linalg.norm(h, axis=1)[:, None]
    return h
