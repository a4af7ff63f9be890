import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dual_edge_lengths, incidence_bruteforce, voronoi_areas
from dec_phs import operators as ops
from dec_phs.cochain import Carrier, Cochain
from dec_phs.complex import (
    generate_interval_mesh,
    generate_square_diagonal_mesh,
    generate_strip_mesh,
    generate_two_triangle_mesh,
)
from dec_phs.errors import CarrierMismatch, DegreeMismatch, NotWellCentered


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6))
def test_identities_on_random_strips(rows, cols):
    K, _ = generate_strip_mesh(rows, cols, 1.0, rows / cols)
    assert all(v == 0 for v in ops.identity_residuals(K).values())
    for k in (1, 2):
        assert np.array_equal(ops.boundary_matrix(K, k).toarray(), incidence_bruteforce(K, k))


def test_interval_derivative_and_trace_pattern():
    K, _ = generate_interval_mesh(5)
    d0 = ops.coboundary(K, 0).toarray()
    assert np.array_equal(d0, np.eye(5, 6, 1, dtype=int) - np.eye(5, 6, dtype=int))
    assert np.array_equal(ops.dual_derivative(K, 0).toarray(), -d0.T)
    tr = ops.trace_matrix(K, 0).toarray()
    expected = np.zeros((2, 6), dtype=int)
    expected[0, 0], expected[1, 5] = -1, 1
    assert np.array_equal(tr, expected)
    assert np.array_equal(ops.dual_boundary_derivative(K, 0).toarray(), tr.T)


def test_two_triangle_hodge_stars():
    K, G = generate_two_triangle_mesh()
    np.testing.assert_allclose(ops.hodge(K, G, 2).matrix.diagonal(), [1 / 1.5, 1 / 1.5])
    np.testing.assert_allclose(ops.hodge(K, G, 0).matrix.diagonal(), voronoi_areas(K), atol=1e-14)
    lengths = np.linalg.norm(np.diff(K.vertices[K.simplices[1]], axis=1)[:, 0], axis=1)
    np.testing.assert_allclose(ops.hodge(K, G, 1).matrix.diagonal(), dual_edge_lengths(K) / lengths, atol=1e-14)
    for k in range(3):
        prod = ops.hodge(K, G, k).matrix @ ops.hodge_inv(K, G, k).matrix
        np.testing.assert_allclose(prod.diagonal(), 1.0)


def test_boundary_hodge_is_identity_in_one_dimension():
    K, G = generate_interval_mesh(7)
    np.testing.assert_array_equal(ops.boundary_hodge(K, G, 0).toarray(), np.eye(2))


def test_hodge_rejects_non_well_centered_mesh():
    K, G = generate_square_diagonal_mesh(2)
    with pytest.raises(NotWellCentered):
        ops.hodge(K, G, 1)


def test_operator_metadata_is_checked():
    K, _ = generate_two_triangle_mesh()
    d0, d1 = ops.coboundary(K, 0), ops.coboundary(K, 1)
    assert (d1 @ d0).domain == (Carrier.PRIMAL, 0)
    with pytest.raises(CarrierMismatch):
        d0 @ d1
    with pytest.raises(CarrierMismatch):
        d0 @ Cochain.zeros(K, Carrier.INTERIOR_DUAL, 0)
    with pytest.raises(DegreeMismatch):
        ops.coboundary(K, 2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["interval", "strip"]), st.integers(0, 2**32 - 1))
def test_summation_by_parts_random(kind, seed):
    K, _ = generate_interval_mesh(9) if kind == "interval" else generate_strip_mesh(2, 3, 1.0, 1.0)
    rng = np.random.default_rng(seed)
    n = K.n
    for k in range(1, n + 1):
        a = Cochain.random(K, Carrier.PRIMAL, k - 1, rng)
        bi = Cochain.random(K, Carrier.INTERIOR_DUAL, n - k, rng)
        bb = Cochain.random(K, Carrier.BOUNDARY_DUAL, n - k, rng)
        terms = ops.summation_by_parts_terms(a, bi, bb, K)
        assert abs(ops.summation_by_parts_residual(K, a, bi, bb)) <= 1e-12 * sum(map(abs, terms))


def test_summation_by_parts_checks_degrees():
    K, _ = generate_two_triangle_mesh()
    with pytest.raises(DegreeMismatch):
        ops.summation_by_parts_terms(
            Cochain.zeros(K, Carrier.PRIMAL, 0),
            Cochain.zeros(K, Carrier.INTERIOR_DUAL, 0),
            Cochain.zeros(K, Carrier.BOUNDARY_DUAL, 1),
            K,
        )
