import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conformal_atlas import shapes
from conformal_atlas.cohomology import dual_basis
from conformal_atlas.homology import (Chain, HomologyBasis, HomologyError, canonicalize_basis,
                                      curve_class, cut_mesh, flood_bounded_domain,
                                      fundamental_domain, handle_basis, homology_basis,
                                      integer_cocycles, class_vector, intersection_matrix,
                                      intersection_pairing, is_transversal, loop_length,
                                      perturb_transversal, shorten_cycle, standard_symplectic,
                                      symplectic_transform)
from conformal_atlas.mesh import euler_genus
from conformal_atlas.simplicial import boundary_of

from conftest import HIGHER_GENUS, corpus_mesh


@functools.lru_cache(maxsize=None)
def handles(name):
    m = corpus_mesh(name)
    b = handle_basis(m)
    return m, b, dual_basis(m, b)


def grid_loop(nx, ny, axis, k=0):
    """Vertex loop of the grid torus along x (axis 0) or y (axis 1) at offset k."""
    if axis == 0:
        return [i * ny + k for i in range(nx)]
    return [k * ny + j for j in range(ny)]


@pytest.mark.parametrize("name", ["tetrahedron", "flat_torus", "torus", "double_torus"])
def test_generator_count_and_cycles(name):
    m = corpus_mesh(name)
    _, g = euler_genus(m)
    b = homology_basis(m)
    assert len(b.cycles) == 2 * g
    for c in b.cycles:
        assert boundary_of(m, c).is_zero()
        assert c.loop is not None and len(set(c.loop)) == len(c.loop)
    assert abs(round(np.linalg.det(intersection_pairing(m, list(b.cycles))))) == (1 if g else 1)


def test_flat_torus_standard_pair_crossing():
    m = shapes.flat_torus(8)
    x = Chain.from_vertex_loop(m, grid_loop(8, 8, 0))
    y = Chain.from_vertex_loop(m, grid_loop(8, 8, 1))
    P = intersection_pairing(m, [x, y])
    assert P.tolist() == [[0, 1], [-1, 0]]
    # moving either loop to a parallel copy keeps the count
    y3 = Chain.from_vertex_loop(m, grid_loop(8, 8, 1, 3))
    assert intersection_pairing(m, [x, y3]).tolist() == [[0, 1], [-1, 0]]
    # parallel loops do not cross
    x5 = Chain.from_vertex_loop(m, grid_loop(8, 8, 0, 5))
    assert intersection_pairing(m, [x, x5]).tolist() == [[0, 0], [0, 0]]


@pytest.mark.parametrize("name", HIGHER_GENUS)
def test_pairing_is_antisymmetric_and_unimodular(name):
    m = corpus_mesh(name)
    im = intersection_matrix(m, homology_basis(m))
    P = im.pairing
    assert np.array_equal(P, -P.T)
    assert abs(im.det) == 1
    assert np.array_equal(im.C, P)


def test_duplicated_cycle_is_singular():
    m = corpus_mesh("torus")
    c = homology_basis(m).cycles[0]
    P = intersection_pairing(m, [c, c])
    assert np.linalg.det(P) == 0
    with pytest.raises(HomologyError):
        symplectic_transform(P)


def test_symplectic_transform_examples():
    J = standard_symplectic(1)
    assert np.array_equal(symplectic_transform(J), np.eye(2, dtype=int))
    with pytest.raises(HomologyError):
        symplectic_transform(np.array([[0, 2], [-2, 0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_symplectic_transform_reaches_standard_form(g, seed):
    # random unimodular change of a symplectic basis
    r = np.random.default_rng(seed)
    N = np.eye(2 * g, dtype=np.int64)
    for _ in range(6):
        i, j = r.choice(2 * g, 2, replace=False)
        E = np.eye(2 * g, dtype=np.int64)
        E[i, j] = r.integers(-2, 3)
        N = N @ E
    I = N.T @ standard_symplectic(g) @ N
    T = symplectic_transform(I)
    assert abs(round(np.linalg.det(T))) == 1
    assert np.array_equal(T.T @ I @ T, standard_symplectic(g))


def test_canonicalize_double_torus():
    m = corpus_mesh("double_torus")
    b = canonicalize_basis(m, homology_basis(m))
    assert b.canonical
    assert np.array_equal(intersection_pairing(m, list(b.cycles)), standard_symplectic(2))


@pytest.mark.parametrize("name", HIGHER_GENUS)
def test_handle_basis_is_canonical_and_disjoint(name):
    m, b, _ = handles(name)
    g = b.genus
    assert np.array_equal(intersection_pairing(m, list(b.cycles)), standard_symplectic(g))
    for k in range(g):
        for j in range(k + 1, g):
            handle_k = set(b.cycles[k].loop) | set(b.cycles[g + k].loop)
            handle_j = set(b.cycles[j].loop) | set(b.cycles[g + j].loop)
            assert not handle_k & handle_j


@pytest.mark.parametrize("name", ["tetrahedron", "flat_torus", "double_torus"])
def test_fundamental_domain_is_disk(name):
    m = corpus_mesh(name)
    fd = fundamental_domain(m)
    cm = fd.mesh
    assert cm.n_vertices - cm.n_edges + cm.n_faces == 1
    assert cm.n_faces == m.n_faces
    # one boundary loop that runs along every cut edge twice
    assert len(cm.boundary_loops()) == 1
    assert len(fd.boundary) == 2 * len(fd.cut_edges)


def test_grid_torus_domain():
    m = shapes.grid_torus(4)
    fd = fundamental_domain(m)
    assert fd.mesh.n_faces == 32
    assert fd.mesh.n_vertices - fd.mesh.n_edges + fd.mesh.n_faces == 1


def test_cut_mesh_without_cut_is_identity():
    m = corpus_mesh("flat_torus")
    cm, vmap = cut_mesh(m, np.zeros(m.n_edges, bool))
    assert np.array_equal(vmap, np.arange(m.n_vertices))
    assert np.array_equal(cm.faces, m.faces)


@pytest.mark.parametrize("name", HIGHER_GENUS)
def test_curve_class_of_basis_cycles(name):
    m, b, d = handles(name)
    n = len(b.cycles)
    for i, c in enumerate(b.cycles):
        cls = curve_class(m, list(d.forms), c)
        assert np.allclose(cls.values, np.eye(n)[i], atol=1e-6)
        twice = curve_class(m, list(d.forms), 2 * c)
        assert np.array_equal(twice.rounded, 2 * np.eye(n, dtype=int)[i])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_face_boundaries_are_null(seed):
    m, b, d = handles("double_torus")
    r = np.random.default_rng(seed)
    faces = r.choice(m.n_faces, size=int(r.integers(1, 40)), replace=False)
    coeff = r.integers(-3, 4, size=len(faces))
    chain = boundary_of(m, Chain(2, dict(zip(faces.tolist(), coeff.tolist()))))
    cls = curve_class(m, list(d.forms), chain)
    assert np.abs(cls.values).max() < 1e-6 and cls.is_zero


def test_integer_cocycles_are_dual_to_generators():
    m, b, d = handles("double_torus")
    gens = homology_basis(m)
    z = integer_cocycles(m, gens)
    n = len(gens.cycles)
    for i, c in enumerate(gens.cycles):
        assert np.array_equal(class_vector(m, z, c), np.eye(n, dtype=int)[i])
    # handle cycles expressed in generator coordinates form a unimodular matrix
    K = np.array([class_vector(m, z, c) for c in b.cycles])
    assert abs(round(np.linalg.det(K))) == 1


def test_flood_equator_gives_hemisphere():
    m = shapes.uv_sphere(8, 16)
    eq = [1 + 3 * 16 + j for j in range(16)]
    r = Chain.from_vertex_loop(m, eq)
    faces, cls = flood_bounded_domain(m, r)
    assert faces is not None
    assert boundary_of(m, Chain(2, {f: 1 for f in faces})) == r
    cz = m.vertices[m.faces[list(faces)]].mean(1)[:, 2]
    assert np.all(cz > 0) or np.all(cz < 0)
    assert len(faces) == m.n_faces // 2


def test_flood_small_loop_and_meridian():
    m, b, d = handles("torus")
    v = 100
    star = [int(x) for x in m.he_head[m.vertex_halfedges()[v]]]
    ring = Chain.from_vertex_loop(m, star)
    faces, cls = flood_bounded_domain(m, ring, list(d.forms))
    assert faces is not None and cls.is_zero
    assert boundary_of(m, Chain(2, {f: 1 for f in faces})) == ring
    faces, cls = flood_bounded_domain(m, b.cycles[0], list(d.forms))
    assert faces is None and not cls.is_zero


def test_shorten_removes_spike_and_keeps_class():
    m, b, d = handles("flat_torus")
    loop = list(b.cycles[0].loop)
    # detour: go out to a neighbour off the loop and come back along another edge
    v = loop[0]
    onloop = set(loop)
    nb = [int(x) for x in m.he_head[m.vertex_halfedges()[v]] if int(x) not in onloop]
    w1 = nb[0]
    w2 = next(int(x) for x in m.he_head[m.vertex_halfedges()[w1]]
              if int(x) not in onloop and int(x) != v and m.edge_lookup([int(x)], [loop[1]])[0][0] >= 0)
    spiked = [v, w1, w2] + loop[1:]
    c = Chain.from_vertex_loop(m, spiked)
    short = shorten_cycle(m, c)
    assert loop_length(m, short.loop) < loop_length(m, spiked)
    assert np.array_equal(curve_class(m, list(d.forms), short).rounded,
                          curve_class(m, list(d.forms), c).rounded)
    # a geodesic grid loop cannot be shortened
    again = shorten_cycle(m, b.cycles[0])
    assert np.isclose(loop_length(m, again.loop), loop_length(m, loop))


def test_perturb_transversal_separates_shared_edges():
    m = shapes.flat_torus(10)
    a = Chain.from_vertex_loop(m, grid_loop(10, 10, 0))
    basis = HomologyBasis((a, a))
    assert not is_transversal(m, basis)
    out = perturb_transversal(m, basis)
    assert is_transversal(m, out)
    assert not set(out.cycles[0].coeffs) & set(out.cycles[1].coeffs)
    # the pushoff stays in the same class
    z = integer_cocycles(m, homology_basis(m))
    assert np.array_equal(class_vector(m, z, out.cycles[1]), class_vector(m, z, a))
