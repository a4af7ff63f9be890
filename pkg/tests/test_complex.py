import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import circumcenter_2d, dual_edge_lengths, sort_sign, voronoi_areas
from dec_phs.complex import (
    build_complex,
    circumcenter,
    compute_dual_geometry,
    generate_interval_mesh,
    generate_square_diagonal_mesh,
    generate_strip_mesh,
    generate_two_triangle_mesh,
    is_well_centered,
    permutation_sign,
)
from dec_phs.errors import (
    DegenerateSimplex,
    Disconnected,
    InconsistentOrientation,
    NonManifold,
    NotWellCenterable,
)


@given(st.permutations(list(range(6))))
def test_permutation_sign_matches_inversion_parity(perm):
    assert permutation_sign(perm) == sort_sign(perm)


def test_simplex_ids_are_lexicographic():
    K, _ = generate_two_triangle_mesh()
    edges = [tuple(e) for e in K.simplices[1].tolist()]
    assert edges == sorted(edges) == [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]
    assert K.index_of((2, 1)) == 2


def test_oriented_faces_set_lower_orientation():
    K, _ = generate_two_triangle_mesh()
    assert K.simplex(1, K.index_of((0, 2))).oriented_vertices() == (2, 0)
    assert K.simplex(1, K.index_of((2, 3))).oriented_vertices() == (3, 2)
    assert K.simplex(1, K.index_of((0, 1))).oriented_vertices() == (0, 1)
    # second triangle keeps the counterclockwise orientation of (1, 3, 2)
    assert permutation_sign((1, 3, 2)) == K.orientation[2][1]


def test_counts_and_boundary_of_strip():
    K, _ = generate_strip_mesh(8, 8, 1.0, 1.0)
    assert [K.count(k) for k in range(3)] == [81, 208, 128]
    assert K.boundary_count(0) == 32 and K.boundary_count(1) == 32
    assert K.count(2) == 2 * 8 * 8


def test_boundary_of_surface_is_a_closed_loop():
    K, _ = generate_strip_mesh(4, 8, 1.0, 1.0)
    bc = K.boundary.complex
    assert bc.n == 1
    # every boundary vertex bounds exactly two boundary edges
    assert np.all(np.bincount(bc.simplices[1].ravel()) == 2)


def test_interval_trace_signs():
    K, _ = generate_interval_mesh(5)
    assert K.boundary.trace_sign[0].tolist() == [-1, 1]
    K2, _ = generate_two_triangle_mesh()
    assert np.all(K2.boundary.trace_sign[0] == 1)


@pytest.mark.parametrize(
    "vertices,tris,error",
    [
        ([[0, 0], [1, 0], [0.5, 1], [0.5, -1]], [(0, 1, 2), (0, 1, 3)], InconsistentOrientation),
        ([[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.5, 0.5]], [(0, 1, 2), (1, 0, 3), (0, 1, 4)], NonManifold),
        ([[0, 0], [1, 0], [0, 1]], [(0, 0, 1)], DegenerateSimplex),
        ([[0, 0], [1, 0], [2, 0]], [(0, 1, 2)], DegenerateSimplex),
        ([[0, 0], [1, 0], [0, 1], [2, 2], [3, 2], [2, 3]], [(0, 1, 2), (3, 4, 5)], Disconnected),
        ([[0, 0], [1, 0], [0, 1], [5, 5]], [(0, 1, 2)], Disconnected),
    ],
)
def test_invalid_complexes_rejected(vertices, tris, error):
    with pytest.raises(error):
        build_complex(vertices, tris)


def test_circumcenter_of_first_triangle():
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 1.5]])
    np.testing.assert_allclose(circumcenter(pts), circumcenter_2d(*pts), atol=1e-15)
    np.testing.assert_allclose(circumcenter(pts), [1.0, 5.0 / 12.0], atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=12))
def test_interval_dual_volumes_are_clipped_voronoi_segments(gaps):
    x = np.concatenate([[0.0], np.cumsum(gaps)])
    K = build_complex(x.reshape(-1, 1), [(i, i + 1) for i in range(len(gaps))])
    G = compute_dual_geometry(K)
    mids = 0.5 * (x[1:] + x[:-1])
    expected = np.diff(np.concatenate([[x[0]], mids, [x[-1]]]))
    np.testing.assert_allclose(G.dual_volume[0], expected, atol=1e-12)
    np.testing.assert_allclose(G.dual_volume[1], 1.0)
    assert G.dual_volume[0].sum() == pytest.approx(x[-1])


def test_uniform_interval_dual_volumes():
    _, G = generate_interval_mesh(50)
    np.testing.assert_allclose(G.dual_volume[0][[0, -1]], 0.01)
    np.testing.assert_allclose(G.dual_volume[0][1:-1], 0.02)


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.floats(0.8, 1.5))
def test_strip_dual_areas_match_clipped_voronoi(rows, cols, aspect):
    height = 1.0 * aspect * rows / cols
    try:
        K, G = generate_strip_mesh(rows, cols, 1.0, height)
    except NotWellCenterable:
        return
    np.testing.assert_allclose(G.dual_volume[0], voronoi_areas(K), atol=1e-12)
    np.testing.assert_allclose(G.dual_volume[1], dual_edge_lengths(K), atol=1e-12)
    assert G.dual_volume[0].sum() == pytest.approx(G.primal_volume[2].sum())


def test_two_triangle_geometry():
    K, G = generate_two_triangle_mesh()
    np.testing.assert_allclose(G.primal_volume[2], [1.5, 1.5])
    np.testing.assert_allclose(G.dual_volume[0], voronoi_areas(K), atol=1e-14)
    np.testing.assert_allclose(G.dual_volume[1], dual_edge_lengths(K), atol=1e-14)
    assert is_well_centered(K, G).ok


def test_square_diagonal_is_not_well_centered():
    K, G = generate_square_diagonal_mesh(3)
    report = is_well_centered(K, G)
    assert not report.ok and report.offenders[2] == list(range(K.count(2)))


def test_flat_strip_cannot_be_well_centered():
    with pytest.raises(NotWellCenterable):
        generate_strip_mesh(1, 8, 1.0, 0.05)


def test_complex_arrays_are_read_only():
    K, _ = generate_interval_mesh(3)
    with pytest.raises(ValueError):
        K.simplices[1][0, 0] = 7
