"""Simplicial Dirac structures as graphs of block operators.

Two variants are supported.  ``PRIMAL_STORED`` takes efforts
(e_p primal, ê_q dual) and the boundary effort ê_b, and produces flows
(f̂_p dual, f_q primal) and the boundary flow f_b.  ``DUAL_STORED`` takes
(ê_p dual, e_q primal) and the boundary flow f̂_b, and produces
(f_p primal, f̂_q dual) and the boundary effort e_b.

The structure is the graph of the bordered map M = [[J, B], [C, 0]].  It is
isotropic for the power pairing iff S·M is skew, where S holds the graded
wedge signs of each effort/flow pair.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .cochain import Carrier, Cochain, boundary_wedge_pair, wedge_pair
from .complex import DualGeometry, SimplicialComplex
from .errors import DimensionMismatch, InvalidDegrees
from .linalg import rank


class Variant(enum.Enum):
    PRIMAL_STORED = "primal_stored"
    DUAL_STORED = "dual_stored"


Space = tuple[Carrier, int]


def _pair_sign(effort: Space, flow: Space, dim: int) -> int:
    """Sign turning the wedge pairing of effort and flow into a dot product."""
    if not effort[0].is_dual:
        return 1
    k = flow[1]
    return (-1) ** (k * (dim - k))


@dataclass(frozen=True, eq=False)
class SimplicialDirac:
    variant: Variant
    p: int
    q: int
    n: int
    J: sp.csr_matrix
    B: sp.csr_matrix
    C: sp.csr_matrix
    effort_spaces: tuple[Space, Space, Space]
    flow_spaces: tuple[Space, Space, Space]
    n_p: int
    n_q: int
    complex: SimplicialComplex = field(repr=False)

    @property
    def r(self) -> int:
        return self.p * self.q + 1

    @property
    def n_b(self) -> int:
        return self.B.shape[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        """(flow p-block, flow q-block, boundary port) sizes."""
        return self.n_p, self.n_q, self.n_b

    def bordered(self) -> sp.csr_matrix:
        nb = self.n_b
        corner = sp.csr_matrix((nb, nb), dtype=self.J.dtype)
        return sp.bmat([[self.J, self.B], [self.C, corner]], format="csr")

    def pairing_signs(self) -> np.ndarray:
        """Per-row signs S such that the power pairing equals eᵀ S f."""
        signs = []
        for slot, size in enumerate(self.dims):
            dim = self.n if slot < 2 else self.n - 1
            s = _pair_sign(self.effort_spaces[slot], self.flow_spaces[slot], dim)
            signs.append(np.full(size, s, dtype=np.int64))
        return np.concatenate(signs)

    def skew_residual(self) -> float:
        sm = sp.diags(self.pairing_signs()) @ self.bordered()
        res = (sm + sm.T).tocsr()
        return float(abs(res).max()) if res.nnz else 0.0

    def element(self, e_p, e_q, boundary_in) -> tuple[Cochain, ...]:
        """Structure element generated by two efforts and the free boundary variable.

        Returned in flow-then-effort order: three flows (p, q, boundary)
        followed by three efforts (p, q, boundary).
        """
        K = self.complex
        ins = [np.asarray(v, dtype=float).ravel() for v in (e_p, e_q, boundary_in)]
        if ins[0].size != self.n_p or ins[1].size != self.n_q or ins[2].size != self.n_b:
            raise DimensionMismatch("effort sizes do not match the structure")
        z = np.concatenate(ins)
        w = self.bordered() @ z
        outs = np.split(w, [self.n_p, self.n_p + self.n_q])
        flows = tuple(Cochain.on(K, *self.flow_spaces[i], outs[i]) for i in range(3))
        efforts = tuple(Cochain.on(K, *self.effort_spaces[i], ins[i]) for i in range(3))
        return flows + efforts

    def random_element(self, rng: np.random.Generator) -> tuple[Cochain, ...]:
        return self.element(
            rng.standard_normal(self.n_p), rng.standard_normal(self.n_q), rng.standard_normal(self.n_b)
        )


def assemble_dirac(K: SimplicialComplex, G: DualGeometry | None, p: int, q: int, variant: Variant) -> SimplicialDirac:
    """Block operators of the simplicial Dirac structure of degrees (p, q).

    The geometry argument is accepted for symmetry with the other
    assemblers; the structure itself is purely combinatorial.
    """
    n = K.n
    if p + q != n + 1 or not (1 <= p <= n) or not (1 <= q <= n):
        raise InvalidDegrees(f"(p, q) = ({p}, {q}) invalid for n = {n}: need p + q = n + 1 and 1 <= p, q <= n")
    r = p * q + 1
    if variant is Variant.PRIMAL_STORED:
        di = ops.dual_derivative(K, n - q).matrix
        db = ops.dual_boundary_derivative(K, n - q).matrix
        d = ops.coboundary(K, n - p).matrix
        tr = ops.trace_matrix(K, n - p).matrix
        n_p, n_q, nb = d.shape[1], d.shape[0], tr.shape[0]
        J = sp.bmat([[sp.csr_matrix((n_p, n_p), dtype=np.int64), (-1) ** r * di], [d, sp.csr_matrix((n_q, n_q), dtype=np.int64)]])
        B = sp.vstack([(-1) ** r * db, sp.csr_matrix((n_q, nb), dtype=np.int64)])
        C = sp.hstack([(-1) ** p * tr, sp.csr_matrix((nb, n_q), dtype=np.int64)])
        efforts = ((Carrier.PRIMAL, n - p), (Carrier.INTERIOR_DUAL, n - q), (Carrier.BOUNDARY_DUAL, n - q))
        flows = ((Carrier.INTERIOR_DUAL, p), (Carrier.PRIMAL, q), (Carrier.BOUNDARY_PRIMAL, n - p))
    else:
        d = ops.coboundary(K, n - q).matrix
        di = ops.dual_derivative(K, n - p).matrix
        db = ops.dual_boundary_derivative(K, n - p).matrix
        tr = ops.trace_matrix(K, n - q).matrix
        n_p, n_q, nb = d.shape[0], d.shape[1], tr.shape[0]
        J = sp.bmat([[sp.csr_matrix((n_p, n_p), dtype=np.int64), (-1) ** r * d], [di, sp.csr_matrix((n_q, n_q), dtype=np.int64)]])
        B = sp.vstack([sp.csr_matrix((n_p, nb), dtype=np.int64), db])
        C = sp.hstack([sp.csr_matrix((nb, n_p), dtype=np.int64), (-1) ** p * tr])
        efforts = ((Carrier.INTERIOR_DUAL, n - p), (Carrier.PRIMAL, n - q), (Carrier.BOUNDARY_DUAL, n - p))
        flows = ((Carrier.PRIMAL, p), (Carrier.INTERIOR_DUAL, q), (Carrier.BOUNDARY_PRIMAL, n - q))
    return SimplicialDirac(
        variant, p, q, n, sp.csr_matrix(J), sp.csr_matrix(B), sp.csr_matrix(C), efforts, flows, n_p, n_q, K
    )


def valid_degrees(n: int) -> list[tuple[int, int]]:
    return [(p, n + 1 - p) for p in range(1, n + 1)]


def bilinear_pairing(D: SimplicialDirac, elem1, elem2) -> float:
    """Symmetrized power pairing of two (flow, effort) tuples.

    Tuples hold three flows then three efforts, in the order produced by
    :meth:`SimplicialDirac.element`.
    """
    if len(elem1) != 6 or len(elem2) != 6:
        raise DimensionMismatch("pairing elements must have six components")

    def half(a, b):
        ea, fb = a[3:], b[:3]
        return wedge_pair(ea[0], fb[0]) + wedge_pair(ea[1], fb[1]) + boundary_wedge_pair(ea[2], fb[2])

    return half(elem1, elem2) + half(elem2, elem1)


def _pairing_scale(elem1, elem2) -> float:
    s = 0.0
    for a, b in ((elem1, elem2), (elem2, elem1)):
        for i in range(3):
            s += float(np.abs(a[3 + i].values).dot(np.abs(b[i].values)))
    return s


@dataclass(frozen=True)
class DiracReport:
    variant: str
    p: int
    q: int
    n: int
    skew_residual: float
    isotropy_max: float
    graph_rank: int
    flow_dim: int
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.skew_residual == 0 and self.isotropy_max < 1e-12 and self.graph_rank == self.flow_dim


def _reference_output_sign(D: SimplicialDirac) -> int | None:
    """Output-row sign used by the wave and both telegraph forms."""
    table = {
        (Variant.PRIMAL_STORED, 2, 1, 2): 1,
        (Variant.PRIMAL_STORED, 1, 1, 1): -1,
        (Variant.DUAL_STORED, 1, 1, 1): -1,
    }
    return table.get((D.variant, D.p, D.q, D.n))


def verify_dirac(D: SimplicialDirac, samples: int = 100, seed: int = 0) -> DiracReport:
    """Skewness, sampled isotropy and maximal dimension of a structure."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a, b = D.random_element(rng), D.random_element(rng)
        val = bilinear_pairing(D, a, b)
        worst = max(worst, abs(val) / max(_pairing_scale(a, b), 1e-300))
    M = D.bordered()
    graph = sp.vstack([M, sp.identity(M.shape[1], dtype=np.int64)])
    flow_dim = M.shape[0]
    notes = []
    expected = _reference_output_sign(D)
    if expected is not None:
        tr_block = D.C[:, : D.n_p] if D.variant is Variant.PRIMAL_STORED else D.C[:, D.n_p:]
        general = (-1) ** D.p
        if expected != general:
            notes.append(f"output sign {general:+d} differs from reference form {expected:+d}")
        elif tr_block.nnz == 0:
            notes.append("output block is empty")
    return DiracReport(
        D.variant.value, D.p, D.q, D.n, D.skew_residual(), worst, rank(graph), flow_dim, tuple(notes)
    )
