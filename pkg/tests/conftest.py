import functools

import numpy as np
import pytest

from conformal_atlas import shapes
from conformal_atlas.mesh import preprocess_negative_weights


@functools.lru_cache(maxsize=None)
def corpus_mesh(name):
    """Small meshes shared across tests; negative weights are already removed."""
    if name == "tetrahedron":
        return shapes.tetrahedron()
    if name == "cube":
        return shapes.cube()
    if name == "icosphere":
        return shapes.icosphere(2)
    if name == "ellipsoid":
        return preprocess_negative_weights(shapes.ellipsoid(2, 1, 1, 2))[0]
    if name == "flat_torus":
        return shapes.flat_torus(12)
    if name == "flat_torus_2x1":
        return shapes.flat_torus(24, 12, 2.0, 1.0)
    if name == "torus":
        return preprocess_negative_weights(shapes.torus_of_revolution(30, 15, 2.0, 1.0))[0]
    if name == "double_torus":
        return preprocess_negative_weights(shapes.double_torus(3))[0]
    raise KeyError(name)


CORPUS = ["tetrahedron", "cube", "icosphere", "ellipsoid", "flat_torus", "flat_torus_2x1",
          "torus", "double_torus"]
HIGHER_GENUS = ["flat_torus", "torus", "double_torus"]


@functools.lru_cache(maxsize=None)
def pipeline_result(name):
    from conformal_atlas.pipeline import PipelineConfig, run_pipeline

    return run_pipeline(corpus_mesh(name), PipelineConfig(cache=False))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
