import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_atlas import _core, shapes
from conformal_atlas._core import _kernels_py
from conformal_atlas.mesh import cotan_weights

compiled = pytest.importorskip("conformal_atlas._core._kernels")


def _edges(m):
    return (np.ascontiguousarray(m.edges[:, 0]), np.ascontiguousarray(m.edges[:, 1]),
            np.ascontiguousarray(cotan_weights(m)))


def test_compiled_backend_is_selected_by_default():
    assert _core.BACKEND == "cython"


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kernels_agree(seed):
    m = shapes.icosphere(2)
    u, v, w = _edges(m)
    r = np.random.default_rng(seed)
    f1 = r.standard_normal(m.n_vertices)
    f3 = np.ascontiguousarray(r.standard_normal((m.n_vertices, 3)))
    x = r.standard_normal(m.n_edges)
    for f in (f1, f3):
        assert np.allclose(compiled.edge_laplacian(u, v, w, f),
                           _kernels_py.edge_laplacian(u, v, w, f), atol=1e-12)
    assert np.allclose(compiled.edge_divergence(u, v, w, x, m.n_vertices),
                       _kernels_py.edge_divergence(u, v, w, x, m.n_vertices), atol=1e-12)
    h = m.vertices / np.linalg.norm(m.vertices, axis=1)[:, None]
    lap = _kernels_py.edge_laplacian(u, v, w, h)
    a = compiled.sphere_step(h.copy(), lap, 1e-3)
    b = _kernels_py.sphere_step(h.copy(), lap, 1e-3)
    assert np.allclose(a, b, atol=1e-14)


def _run(env_extra, code):
    env = dict(os.environ, **env_extra)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    return out.stdout.strip()


def test_env_var_forces_python_backend():
    code = "from conformal_atlas import _core; print(_core.BACKEND)"
    assert _run({"CONFORMAL_ATLAS_PURE_PYTHON": "1"}, code) == "python"


def test_pipeline_results_match_across_backends():
    code = ("import json; from conformal_atlas import shapes;"
            "from conformal_atlas.pipeline import PipelineConfig, result_json, run_pipeline;"
            "print(result_json(run_pipeline(shapes.torus_of_revolution(16, 8, 2.0, 1.0),"
            " PipelineConfig(cache=False))))")
    a = json.loads(_run({"CONFORMAL_ATLAS_PURE_PYTHON": "1"}, code))
    b = json.loads(_run({"CONFORMAL_ATLAS_PURE_PYTHON": "0"}, code))
    assert np.allclose(a["period"]["tau"], b["period"]["tau"], atol=1e-9)
