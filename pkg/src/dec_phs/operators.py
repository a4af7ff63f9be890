"""Sparse discrete exterior calculus operators and their exact identities.

Incidence-type operators (boundary, coboundary, trace, dual derivatives)
carry integer entries; Hodge stars are real diagonal matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cochain import Carrier, Cochain, boundary_wedge_pair, cell_count, wedge_pair
from .complex import DualGeometry, SimplicialComplex
from .errors import CarrierMismatch, DegreeMismatch, DimensionMismatch, NotWellCentered

Space = tuple[Carrier, int]


@dataclass(frozen=True, eq=False)
class LinearOp:
    """Sparse matrix tagged with the cochain spaces it maps between."""

    matrix: sp.csr_matrix
    domain: Space
    codomain: Space

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other):
        if isinstance(other, LinearOp):
            if other.codomain != self.domain:
                raise CarrierMismatch(f"cannot compose {self.domain} after {other.codomain}")
            return LinearOp((self.matrix @ other.matrix).tocsr(), other.domain, self.codomain)
        if isinstance(other, Cochain):
            if (other.carrier, other.degree) != self.domain:
                raise CarrierMismatch(f"operator expects {self.domain}, got {(other.carrier, other.degree)}")
            return Cochain(self.codomain[0], self.codomain[1], self.matrix @ other.values, other.n)
        return self.matrix @ other

    def scaled(self, factor: float) -> "LinearOp":
        return LinearOp((factor * self.matrix).tocsr(), self.domain, self.codomain)


def _op(matrix, domain: Space, codomain: Space) -> LinearOp:
    m = sp.csr_matrix(matrix)
    m.sum_duplicates()
    m.eliminate_zeros()
    return LinearOp(m, domain, codomain)


def _check_range(k: int, lo: int, hi: int, what: str) -> None:
    if not (lo <= k <= hi):
        raise DegreeMismatch(f"{what}: degree {k} outside {lo}..{hi}")


def boundary_matrix(K: SimplicialComplex, k: int) -> LinearOp:
    """Incidence matrix from k-simplices to (k-1)-simplices."""
    _check_range(k, 1, K.n, "boundary_matrix")
    nk = K.count(k)
    rows = K.faces[k].ravel()
    cols = np.repeat(np.arange(nk), k + 1)
    data = K.face_signs[k].ravel()
    m = sp.coo_matrix((data, (rows, cols)), shape=(K.count(k - 1), nk), dtype=np.int64)
    return _op(m, (Carrier.PRIMAL, k), (Carrier.PRIMAL, k - 1))


def coboundary(K: SimplicialComplex, k: int) -> LinearOp:
    """Discrete exterior derivative on primal k-cochains."""
    _check_range(k, 0, K.n - 1, "coboundary")
    return _op(boundary_matrix(K, k + 1).matrix.T, (Carrier.PRIMAL, k), (Carrier.PRIMAL, k + 1))


def trace_matrix(K: SimplicialComplex, k: int) -> LinearOp:
    """Restriction of primal k-cochains to the boundary, with induced orientation signs."""
    _check_range(k, 0, K.n - 1, "trace_matrix")
    bc = K.boundary
    nb = bc.count(k)
    m = sp.coo_matrix(
        (bc.trace_sign[k], (np.arange(nb), bc.to_parent[k])), shape=(nb, K.count(k)), dtype=np.int64
    )
    return _op(m, (Carrier.PRIMAL, k), (Carrier.BOUNDARY_PRIMAL, k))


def dual_derivative(K: SimplicialComplex, j: int) -> LinearOp:
    """Interior dual derivative of degree j, the signed transpose of d^{n-j-1}."""
    n = K.n
    _check_range(j, 0, n - 1, "dual_derivative")
    k = n - j
    m = (-1) ** k * coboundary(K, k - 1).matrix.T
    return _op(m, (Carrier.INTERIOR_DUAL, j), (Carrier.INTERIOR_DUAL, j + 1))


def dual_boundary_derivative(K: SimplicialComplex, j: int) -> LinearOp:
    """Map from boundary dual j-cochains to interior dual (j+1)-cochains."""
    n = K.n
    _check_range(j, 0, n - 1, "dual_boundary_derivative")
    k = n - j
    m = (-1) ** (k - 1) * trace_matrix(K, k - 1).matrix.T
    return _op(m, (Carrier.BOUNDARY_DUAL, j), (Carrier.INTERIOR_DUAL, j + 1))


def boundary_coboundary(K: SimplicialComplex, k: int) -> LinearOp:
    """Exterior derivative on the boundary complex, in boundary ids."""
    bc = K.boundary.complex
    _check_range(k, 0, K.n - 2, "boundary_coboundary")
    m = boundary_matrix(bc, k + 1).matrix.T
    return _op(m, (Carrier.BOUNDARY_PRIMAL, k), (Carrier.BOUNDARY_PRIMAL, k + 1))


def _ratio(dual: np.ndarray, primal: np.ndarray, what: str) -> np.ndarray:
    bad = np.nonzero(dual <= 1e-14 * max(1.0, float(np.abs(dual).max(initial=0.0))))[0]
    if bad.size:
        raise NotWellCentered(f"{what}: nonpositive dual volume at cell {int(bad[0])}")
    return dual / primal


def hodge(K: SimplicialComplex, G: DualGeometry, k: int) -> LinearOp:
    """Diagonal Hodge star from primal k-cochains to interior dual (n-k)-cochains."""
    _check_range(k, 0, K.n, "hodge")
    d = _ratio(G.dual_volume[k], G.primal_volume[k], f"hodge {k}")
    return LinearOp(sp.diags(d, format="csr"), (Carrier.PRIMAL, k), (Carrier.INTERIOR_DUAL, K.n - k))


def hodge_inv(K: SimplicialComplex, G: DualGeometry, k: int) -> LinearOp:
    _check_range(k, 0, K.n, "hodge_inv")
    d = _ratio(G.dual_volume[k], G.primal_volume[k], f"hodge {k}")
    return LinearOp(sp.diags(1.0 / d, format="csr"), (Carrier.INTERIOR_DUAL, K.n - k), (Carrier.PRIMAL, k))


def boundary_hodge(K: SimplicialComplex, G: DualGeometry, k: int = 0) -> LinearOp:
    """Diagonal Hodge star of the boundary complex on boundary k-cochains."""
    _check_range(k, 0, K.n - 1, "boundary_hodge")
    ids = K.boundary.to_parent[k]
    d = _ratio(G.boundary_dual_volume[k], G.primal_volume[k][ids], f"boundary hodge {k}")
    return LinearOp(sp.diags(d, format="csr"), (Carrier.BOUNDARY_PRIMAL, k), (Carrier.BOUNDARY_DUAL, K.n - 1 - k))


# --------------------------------------------------------------- identities


def summation_by_parts_terms(alpha: Cochain, beta_i: Cochain, beta_b: Cochain, K: SimplicialComplex) -> tuple[float, float, float]:
    """The three pairings of the discrete integration-by-parts formula.

    Returns (interior, dual side, boundary) with
    interior + dual side = boundary for every admissible triple.
    """
    n = K.n
    if alpha.carrier is not Carrier.PRIMAL or beta_i.carrier is not Carrier.INTERIOR_DUAL:
        raise CarrierMismatch("expected a primal and an interior dual cochain")
    if beta_b.carrier is not Carrier.BOUNDARY_DUAL:
        raise CarrierMismatch("expected a boundary dual cochain")
    k = alpha.degree + 1
    if not (1 <= k <= n) or beta_i.degree != n - k or beta_b.degree != n - k:
        raise DegreeMismatch(
            f"need degrees (k-1, n-k, n-k); got ({alpha.degree}, {beta_i.degree}, {beta_b.degree}) for n={n}"
        )
    for c in (alpha, beta_i, beta_b):
        if len(c) != cell_count(K, c.carrier, c.degree):
            raise DimensionMismatch("cochain size does not match the complex")
    d = coboundary(K, k - 1)
    di = dual_derivative(K, n - k)
    db = dual_boundary_derivative(K, n - k)
    tr = trace_matrix(K, k - 1)
    interior = wedge_pair(d @ alpha, beta_i)
    dual_side = (-1) ** (k - 1) * wedge_pair(alpha, di @ beta_i + db @ beta_b)
    boundary = boundary_wedge_pair(tr @ alpha, beta_b)
    return interior, dual_side, boundary


def summation_by_parts_residual(K: SimplicialComplex, alpha: Cochain, beta_i: Cochain, beta_b: Cochain) -> float:
    a, b, c = summation_by_parts_terms(alpha, beta_i, beta_b, K)
    return a + b - c


def _maxabs(m) -> int:
    m = sp.csr_matrix(m)
    return int(abs(m).max()) if m.nnz else 0


def identity_residuals(K: SimplicialComplex) -> dict[str, int]:
    """Max-abs residuals of the exact integer identities for every valid degree."""
    n = K.n
    out: dict[str, int] = {}
    for k in range(1, n):
        out[f"boundary_{k}*boundary_{k + 1}"] = _maxabs(boundary_matrix(K, k).matrix @ boundary_matrix(K, k + 1).matrix)
    for k in range(0, n - 1):
        out[f"d^{k + 1}*d^{k}"] = _maxabs(coboundary(K, k + 1).matrix @ coboundary(K, k).matrix)
    for k in range(0, n):
        out[f"d^{k}-boundary_{k + 1}^T"] = _maxabs(coboundary(K, k).matrix - boundary_matrix(K, k + 1).matrix.T)
    for k in range(1, n + 1):
        di = dual_derivative(K, n - k).matrix
        out[f"d_i^{n - k}-signed_transpose"] = _maxabs(di - (-1) ** k * coboundary(K, k - 1).matrix.T)
        db = dual_boundary_derivative(K, n - k).matrix
        out[f"d_b^{n - k}-signed_transpose"] = _maxabs(db - (-1) ** (k - 1) * trace_matrix(K, k - 1).matrix.T)
    for j in range(0, n - 1):
        out[f"d_i^{j + 1}*d_i^{j}"] = _maxabs(dual_derivative(K, j + 1).matrix @ dual_derivative(K, j).matrix)
    for k in range(0, n - 1):
        lhs = trace_matrix(K, k + 1).matrix @ coboundary(K, k).matrix
        rhs = boundary_coboundary(K, k).matrix @ trace_matrix(K, k).matrix
        out[f"tr^{k + 1}*d^{k}-d_boundary*tr^{k}"] = _maxabs(lhs - rhs)
    for k in range(0, n):
        tr = trace_matrix(K, k).matrix
        nnz_rows = np.diff(tr.indptr)
        out[f"tr^{k}-rows_with_one_entry"] = int(np.abs(nnz_rows - 1).max()) if tr.shape[0] else 0
    return out
