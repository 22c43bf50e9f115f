import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_atlas import shapes
from conformal_atlas.mesh import Mesh, preprocess_negative_weights
from conformal_atlas.sphere_map import (SphereMapError, barycentric_embed, conformal_embed, degree,
                                        distortion, flipped_faces, gauss_map, inverse_stereographic,
                                        mobius, mobius_compose, project_tangent, solid_angles,
                                        sphere_mobius, stereographic, tangential_residual)

from conftest import corpus_mesh


def test_gauss_map_of_icosphere_is_near_identity():
    m = shapes.icosphere(3)
    h = gauss_map(m).positions
    assert np.abs(h - m.vertices).max() < 0.05
    assert np.allclose(np.linalg.norm(h, axis=1), 1)


def test_gauss_map_of_cube_is_degree_one():
    m = corpus_mesh("cube")
    h = gauss_map(m).positions
    assert degree(m, h) == 1


def test_gauss_map_rejects_higher_genus():
    with pytest.raises(SphereMapError):
        gauss_map(corpus_mesh("torus"))


def test_project_tangent_examples():
    v = np.array([0.0, 0.0, 1.0])
    assert np.allclose(project_tangent(v, [1, 2, 3]), [1, 2, 0])
    assert np.isclose(project_tangent(v, [1, 2, 3]) @ v, 0)
    assert np.allclose(project_tangent(v, [4, -1, 0]), [4, -1, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=6, max_size=6))
def test_project_tangent_is_orthogonal_and_idempotent(xs):
    v = np.array(xs[:3])
    x = np.array(xs[3:])
    if np.linalg.norm(v) < 1e-3:
        return
    p = project_tangent(v, x)
    assert abs(p @ v) <= 1e-9 * (1 + np.linalg.norm(x)) * np.linalg.norm(v)
    assert np.allclose(project_tangent(v, p), p, atol=1e-9 * (1 + np.linalg.norm(x)))


def test_barycentric_on_icosphere_is_near_fixed_point():
    m = shapes.icosphere(2)
    sm = barycentric_embed(m)
    assert np.allclose(np.linalg.norm(sm.positions, axis=1), 1, atol=1e-12)
    assert degree(m, sm.positions) == 1
    assert len(flipped_faces(m, sm.positions)) == 0
    assert sm.energy <= sm.trace[0]


def test_barycentric_on_tetrahedron_has_no_flips():
    m = corpus_mesh("tetrahedron")
    sm = barycentric_embed(m)
    assert len(flipped_faces(m, sm.positions)) == 0
    assert degree(m, sm.positions) == 1


def test_barycentric_huge_step_diverges():
    m = shapes.icosphere(2)
    with pytest.raises(SphereMapError) as ei:
        barycentric_embed(m, dt=10.0)
    assert len(ei.value.trace) >= 2


def test_conformal_embed_icosphere():
    m = shapes.icosphere(3)
    sm = conformal_embed(m)
    assert abs(sm.energy / (8 * np.pi) - 1) < 0.02
    assert np.abs(np.linalg.norm(sm.positions, axis=1) - 1).max() < 1e-9
    assert degree(m, sm.positions) == 1
    assert len(flipped_faces(m, sm.positions)) == 0
    # tangential residual of the cotangent Laplacian is small at the minimum
    assert tangential_residual(m, sm.positions) < 1e-2


def test_conformal_embed_ellipsoid_is_nearly_conformal():
    m = preprocess_negative_weights(shapes.ellipsoid(2, 1, 1, 3))[0]
    sm = conformal_embed(m)
    assert degree(m, sm.positions) == 1
    radial = m.vertices / np.linalg.norm(m.vertices, axis=1)[:, None]
    d = np.median(distortion(m, sm.positions))
    assert d < 1.1 and d < np.median(distortion(m, radial))


def test_explicit_flow_agrees_with_preconditioned():
    m = shapes.icosphere(2)
    a = conformal_embed(m)
    b = conformal_embed(m, precondition=False, eps=1e-9)
    assert abs(a.energy - b.energy) / a.energy < 1e-3


def test_conformal_rejects_negative_weights():
    m = shapes.ellipsoid(3, 1, 1, 2)
    with pytest.raises(SphereMapError):
        conformal_embed(m)


def test_solid_angles_of_octahedron():
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    F = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4], [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]
    m = Mesh(V, F)
    assert np.allclose(solid_angles(V, m.faces), np.pi / 2)
    assert degree(m, V) == 1
    assert degree(m, V * [1, 1, -1]) == -1


def test_stereographic_examples():
    assert stereographic([0, 0, 1]) == 0
    assert stereographic([1, 0, 0]) == 1
    with pytest.raises(ValueError):
        stereographic([0, 0, -1])


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_stereographic_roundtrip(z):
    p = inverse_stereographic(z)
    assert np.isclose(np.linalg.norm(p), 1)
    assert abs(stereographic(p) - z) <= 1e-9 * (1 + abs(z) ** 2)


def test_mobius_examples():
    assert mobius(2 + 1j, 1, 0, 0, 1) == 2 + 1j
    assert mobius(2, 0, 1, 1, 0) == 0.5
    with pytest.raises(ValueError):
        mobius(1, 1, 2, 2, 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                min_size=9, max_size=9))
def test_mobius_composition(c):
    m1, m2, z = tuple(c[:4]), tuple(c[4:8]), c[8]
    if abs(m1[0] * m1[3] - m1[1] * m1[2]) < 1e-2 or abs(m2[0] * m2[3] - m2[1] * m2[2]) < 1e-2:
        return
    inner = mobius(z, *m2)
    if not np.isfinite(inner) or abs(inner) > 1e6:
        return
    lhs = mobius(inner, *m1)
    rhs = mobius(z, *mobius_compose(m1, m2))
    if np.isfinite(lhs) and abs(lhs) < 1e6:
        assert abs(lhs - rhs) <= 1e-6 * (1 + abs(lhs))


def test_sphere_mobius_rotation_keeps_sphere_map_valid():
    m = shapes.icosphere(2)
    h = conformal_embed(m).positions
    # tilt off the vertex at the south pole, then rotate about z via z -> e^{i t} z
    c, s = np.cos(0.3), np.sin(0.3)
    h = h @ np.array([[1, 0, 0], [0, c, -s], [0, s, c]]).T
    assert (h[:, 2] > -1 + 1e-6).all()
    t = 0.7
    h2 = sphere_mobius(h, (np.exp(1j * t), 0, 0, 1))
    assert np.allclose(np.linalg.norm(h2, axis=1), 1)
    assert degree(m, h2) == 1


def test_different_initializations_agree_up_to_rotation():
    from scipy.linalg import orthogonal_procrustes
    from scipy.spatial.transform import Rotation

    m = preprocess_negative_weights(shapes.ellipsoid(2, 1, 1, 2))[0]
    a = conformal_embed(m).positions
    Q = Rotation.from_euler("xyz", [0.4, -0.9, 1.3]).as_matrix()
    b = conformal_embed(m, init=barycentric_embed(m).positions @ Q.T).positions
    R, _ = orthogonal_procrustes(b, a)
    assert np.abs(b @ R - a).max() < 1e-2
