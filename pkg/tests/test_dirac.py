import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from dec_phs import operators as ops
from dec_phs.cochain import Carrier
from dec_phs.complex import generate_interval_mesh, generate_strip_mesh, generate_two_triangle_mesh
from dec_phs.dirac import Variant, assemble_dirac, bilinear_pairing, valid_degrees, verify_dirac
from dec_phs.errors import DimensionMismatch, InvalidDegrees

KF, GF = generate_two_triangle_mesh()
KL, GL = generate_interval_mesh(6)


def dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def test_valid_degrees():
    assert valid_degrees(1) == [(1, 1)]
    assert valid_degrees(2) == [(1, 2), (2, 1)]
    with pytest.raises(InvalidDegrees):
        assemble_dirac(KF, GF, 1, 1, Variant.PRIMAL_STORED)


def test_wave_structure_blocks():
    D = assemble_dirac(KF, GF, 2, 1, Variant.PRIMAL_STORED)
    d0 = ops.coboundary(KF, 0).toarray()
    di1 = ops.dual_derivative(KF, 1).toarray()
    db1 = ops.dual_boundary_derivative(KF, 1).toarray()
    tr0 = ops.trace_matrix(KF, 0).toarray()
    # flows (f_p, f_q) = [[0, -d_i^1], [d^0, 0]] (e_p, e_q) - [d_b^1; 0] e_b, f_b = tr^0 e_p
    assert np.array_equal(dense(D.J), np.block([[np.zeros((4, 4)), -di1], [d0, np.zeros((5, 5))]]))
    assert np.array_equal(dense(D.B), np.vstack([-db1, np.zeros((5, 4))]))
    assert np.array_equal(dense(D.C), np.hstack([tr0, np.zeros((4, 5))]))
    assert D.flow_spaces[0] == (Carrier.INTERIOR_DUAL, 2)
    assert D.effort_spaces[2] == (Carrier.BOUNDARY_DUAL, 1)


@pytest.mark.parametrize("variant", list(Variant))
def test_telegraph_structure_blocks(variant):
    D = assemble_dirac(KL, GL, 1, 1, variant)
    d0 = ops.coboundary(KL, 0).toarray()
    di0 = ops.dual_derivative(KL, 0).toarray()
    db0 = ops.dual_boundary_derivative(KL, 0).toarray()
    tr0 = ops.trace_matrix(KL, 0).toarray()
    if variant is Variant.DUAL_STORED:
        # voltage-input line: [[0, d^0], [d_i^0, 0]], [0; d_b^0], e_b = -tr^0 e_q
        J = np.block([[np.zeros((6, 6)), d0], [di0, np.zeros((7, 7))]])
        B = np.vstack([np.zeros((6, 2)), db0])
        C = np.hstack([np.zeros((2, 6)), -tr0])
    else:
        # current-input line: [[0, d_i^0], [d^0, 0]], [d_b^0; 0], f_b = -tr^0 e_p
        J = np.block([[np.zeros((7, 7)), di0], [d0, np.zeros((6, 6))]])
        B = np.vstack([db0, np.zeros((6, 2))])
        C = np.hstack([-tr0, np.zeros((2, 6))])
    assert np.array_equal(dense(D.J), J)
    assert np.array_equal(dense(D.B), B)
    assert np.array_equal(dense(D.C), C)


def _structures():
    Ks, Gs = generate_strip_mesh(2, 3, 1.0, 1.0)
    out = []
    for K, G in [(KF, GF), (KL, GL), (Ks, Gs)]:
        for p, q in valid_degrees(K.n):
            for variant in Variant:
                out.append(assemble_dirac(K, G, p, q, variant))
    return out


STRUCTURES = _structures()


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(range(len(STRUCTURES))), st.integers(0, 2**32 - 1))
def test_sampled_pairs_are_isotropic(i, seed):
    D = STRUCTURES[i]
    rng = np.random.default_rng(seed)
    a, b = D.random_element(rng), D.random_element(rng)
    scale = sum(np.abs(x.values).sum() for x in a + b) ** 2
    assert abs(bilinear_pairing(D, a, b)) <= 1e-12 * scale


@pytest.mark.parametrize("i", range(len(STRUCTURES)))
def test_signed_bordered_matrix_is_skew_and_maximal(i):
    D = STRUCTURES[i]
    assert D.skew_residual() == 0
    rep = verify_dirac(D, samples=20)
    assert rep.ok and rep.graph_rank == sum(D.dims)


def test_element_checks_sizes():
    D = STRUCTURES[0]
    with pytest.raises(DimensionMismatch):
        D.element(np.zeros(1), np.zeros(D.n_q), np.zeros(D.n_b))


def test_corrupted_structure_fails_skewness():
    from dataclasses import replace

    D = STRUCTURES[0]
    J = D.J.copy().astype(np.int64)
    J.data[-1] *= -1
    bad = replace(D, J=J)
    assert bad.skew_residual() > 0
    assert not verify_dirac(bad, samples=10).ok
