"""Hot loops of the solvers: edge Laplacians, divergences and the sphere flow update.

The compiled module ``_kernels`` is used when it was built; otherwise the
numpy implementations in ``_kernels_py`` are used.  Set
``CONFORMAL_ATLAS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("CONFORMAL_ATLAS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

edge_laplacian = _impl.edge_laplacian
edge_divergence = _impl.edge_divergence
sphere_step = _impl.sphere_step

__all__ = ["BACKEND", "edge_laplacian", "edge_divergence", "sphere_step"]
