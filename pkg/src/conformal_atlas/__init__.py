"""Global conformal structure of closed triangle meshes.

Homology and cohomology bases, harmonic and holomorphic 1-forms, period
matrices, genus-zero spherical conformal maps and flat parametrizations.
"""
from .mesh import Mesh, MeshError, euler_genus
from .meshio import load_mesh

__version__ = "0.1.0"

__all__ = ["Mesh", "MeshError", "euler_genus", "load_mesh", "__version__"]
