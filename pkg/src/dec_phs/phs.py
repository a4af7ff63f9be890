"""Explicit input-output port-Hamiltonian systems built on simplicial Dirac structures.

With flows f = -dx/dt and efforts e = S·∇H, where S holds the graded wedge
sign of each effort/flow pair, the Dirac relations give

    dx/dt = J ∇H + G u,     y = Gᵀ ∇H,     J = -M_int S,   G = -B

with J skew.  S differs from the identity only for dual-side efforts whose
pairing picks up a sign (for example the stress of the 2D wave model).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .complex import DualGeometry
from .dirac import SimplicialDirac, Variant
from .errors import DimensionMismatch, VariantMismatch
from .linalg import nullspace


@dataclass(frozen=True, eq=False)
class MaterialField:
    """Cell-wise constant positive coefficient."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size == 0 or not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError(f"material {self.name!r} must be finite and strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, name: str, value: float, cells: int = 1) -> "MaterialField":
        return cls(name, np.full(cells, float(value)))

    @classmethod
    def from_function(cls, name: str, func, midpoints: np.ndarray) -> "MaterialField":
        """Sample a continuous coefficient at cell midpoints (midpoint quadrature)."""
        pts = np.asarray(midpoints, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(name, np.array([func(*m) for m in pts], dtype=float))

    def on(self, cells: int) -> np.ndarray:
        """Per-cell values, broadcasting a single value to every cell."""
        if self.values.size == 1:
            return np.full(cells, float(self.values[0]))
        if self.values.size != cells:
            raise DimensionMismatch(f"material {self.name!r} has {self.values.size} values for {cells} cells")
        return self.values


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """H(x) = ½ (x_pᵀ Qp x_p + x_qᵀ Qq x_q) with diagonal Qp, Qq."""

    Qp: np.ndarray
    Qq: np.ndarray
    materials: dict = field(default_factory=dict)
    strict: bool = True

    def __post_init__(self):
        for name in ("Qp", "Qq"):
            v = np.array(getattr(self, name), dtype=float).ravel()
            if not np.all(np.isfinite(v)) or np.any(v < 0) or (self.strict and np.any(v == 0)):
                raise ValueError(f"{name} must be {'strictly ' if self.strict else ''}positive")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def diagonal(self) -> np.ndarray:
        return np.concatenate([self.Qp, self.Qq])

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (self.diagonal * x))

    def gradient(self, x) -> np.ndarray:
        return self.diagonal * np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class PortHamiltonianSystem:
    """Linear system dx/dt = (J - R) Q x + G u with output y = Goutᵀ Q x.

    ``partition`` lists the sizes of the state blocks (p-state, q-state and,
    for closed loops, the controller state).
    """

    J: sp.csr_matrix
    G: sp.csr_matrix
    Gout: sp.csr_matrix
    Q: sp.csr_matrix
    partition: tuple[int, ...]
    port_labels: tuple[int, ...]
    R: sp.csr_matrix | None = None
    dirac: SimplicialDirac | None = None
    geometry: DualGeometry | None = None
    kind: str = "generic"
    symbols: tuple[str, ...] = ("x_p", "x_q")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        nx = self.J.shape[0]
        if self.J.shape != (nx, nx) or self.Q.shape != (nx, nx):
            raise DimensionMismatch("J and Q must be square and of equal size")
        if self.G.shape[0] != nx or self.Gout.shape != self.G.shape:
            raise DimensionMismatch("input/output matrices do not match the state size")
        if sum(self.partition) != nx:
            raise DimensionMismatch(f"partition {self.partition} does not add up to {nx}")

    @property
    def nx(self) -> int:
        return self.J.shape[0]

    @property
    def nu(self) -> int:
        return self.G.shape[1]

    @cached_property
    def A(self) -> sp.csr_matrix:
        S = self.J if self.R is None else self.J - self.R
        return sp.csr_matrix(S @ self.Q)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float)

    def energy(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (self.Q @ x))

    def rhs(self, x, u) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.G @ np.asarray(u, dtype=float)

    def output(self, x) -> np.ndarray:
        return self.Gout.T @ self.gradient(x)

    def block(self, x, i: int) -> np.ndarray:
        start = sum(self.partition[:i])
        return np.asarray(x)[start:start + self.partition[i]]


def energy(sys: PortHamiltonianSystem, x) -> float:
    return sys.energy(x)


def power_residual(sys: PortHamiltonianSystem, x, u, relative: bool = False) -> float:
    """|∇Hᵀ(J∇H + Gu) - yᵀu| for the lossless part of the dynamics."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    g = sys.gradient(x)
    Jg = sys.J @ g
    Gu = sys.G @ u
    y = sys.output(x)
    res = abs(float(g @ Jg + g @ Gu - y @ u))
    if not relative:
        return res
    scale = float(np.abs(g) @ (abs(sys.J) @ np.abs(g)) + np.abs(g) @ np.abs(Gu) + np.abs(y) @ np.abs(u))
    return res / scale if scale > 0 else res


def assemble_phs(
    D: SimplicialDirac,
    H: QuadraticHamiltonian,
    *,
    geometry: DualGeometry | None = None,
    kind: str = "generic",
    symbols: tuple[str, str] = ("x_p", "x_q"),
    meta: dict | None = None,
) -> PortHamiltonianSystem:
    """Lift a Dirac structure and a quadratic Hamiltonian to explicit dynamics."""
    if H.Qp.size != D.n_p or H.Qq.size != D.n_q:
        raise DimensionMismatch(
            f"Hamiltonian blocks ({H.Qp.size}, {H.Qq.size}) do not match flow dims ({D.n_p}, {D.n_q})"
        )
    signs = D.pairing_signs()
    s_int = sp.diags(signs[: D.n_p + D.n_q].astype(float))
    J = sp.csr_matrix(-(D.J.astype(float) @ s_int))
    G = sp.csr_matrix(-D.B.astype(float))
    # collocated output equals the Dirac output row up to the boundary pairing sign
    s_b = float(signs[-1]) if D.n_b else 1.0
    from_dirac = s_b * (D.C.astype(float) @ s_int)
    if (abs(from_dirac - G.T)).max() != 0:
        raise AssertionError("collocated output disagrees with the Dirac output row")
    labels = tuple(int(i) for i in D.complex.boundary.to_parent[D.flow_spaces[2][1]])
    return PortHamiltonianSystem(
        J=J,
        G=G,
        Gout=G.copy(),
        Q=sp.diags(H.diagonal, format="csr"),
        partition=(D.n_p, D.n_q),
        port_labels=labels,
        dirac=D,
        geometry=geometry,
        kind=kind,
        symbols=tuple(symbols),
        meta=dict(meta or {}, hamiltonian=H),
    )


# ------------------------------------------------------------ conservation


@dataclass(frozen=True, eq=False)
class ConservationLaw:
    """Linear law C(x) = cᵀx with dC/dt = boundary_mapᵀ u."""

    block: str
    coefficients: np.ndarray
    boundary_map: np.ndarray

    def value(self, x) -> float:
        return float(self.coefficients @ np.asarray(x, dtype=float))


def _require_dirac(sys: PortHamiltonianSystem) -> SimplicialDirac:
    if sys.dirac is None:
        raise VariantMismatch("system was not assembled from a Dirac structure")
    return sys.dirac


def conservation_laws(sys: PortHamiltonianSystem) -> list[ConservationLaw]:
    """Linear conservation laws of an open system, one state block at a time."""
    D = _require_dirac(sys)
    K, n, p, q = D.complex, D.n, D.p, D.q
    n_p, n_q = D.n_p, D.n_q
    laws: list[ConservationLaw] = []

    def full(block: str, c: np.ndarray) -> np.ndarray:
        v = np.zeros(n_p + n_q)
        if block == "p":
            v[:n_p] = c
        else:
            v[n_p:] = c
        return v

    if D.variant is Variant.PRIMAL_STORED:
        tr = ops.trace_matrix(K, n - p).matrix.astype(float)
        for c in nullspace(ops.coboundary(K, n - p).matrix).T:
            fb = -((-1) ** (q * (p + 1))) * (tr @ c)
            laws.append(ConservationLaw("p", full("p", c), fb))
        for c in nullspace(ops.dual_derivative(K, n - q).matrix).T:
            laws.append(ConservationLaw("q", full("q", c), np.zeros(D.n_b)))
    else:
        tr = ops.trace_matrix(K, n - q).matrix.astype(float)
        for c in nullspace(ops.dual_derivative(K, n - p).matrix).T:
            laws.append(ConservationLaw("p", full("p", c), np.zeros(D.n_b)))
        for c in nullspace(ops.coboundary(K, n - q).matrix).T:
            fb = (-1) ** p * (tr @ c)
            laws.append(ConservationLaw("q", full("q", c), fb))
    return laws


# --------------------------------------------------------------- feedback


def passivation_feedback(sys: PortHamiltonianSystem) -> np.ndarray:
    """Gain F of the resistive boundary termination u = F y.

    The boundary effort is set proportional to the boundary flow through
    the boundary Hodge star, with the sign that makes the supplied power
    -f_bᵀ *_b f_b non-positive.
    """
    D = _require_dirac(sys)
    if D.variant is not Variant.PRIMAL_STORED:
        raise VariantMismatch("passivation feedback needs a primal-stored system")
    if sys.geometry is None:
        raise VariantMismatch("system carries no geometry for the boundary Hodge star")
    n, p, q = D.n, D.p, D.q
    star_b = ops.boundary_hodge(D.complex, sys.geometry, n - p).toarray()
    s_b = int(D.pairing_signs()[-1])
    # y = s_b f_b and ê_b = (-1)^((n-p)(n-q)-1) *_b f_b
    return (-1) ** ((n - p) * (n - q) - 1) * s_b * star_b


def with_output_feedback(sys: PortHamiltonianSystem, gain: np.ndarray) -> PortHamiltonianSystem:
    """Close u = gain·y + v; v remains available as an external input."""
    gain = np.asarray(gain, dtype=float)
    if gain.shape != (sys.nu, sys.nu):
        raise DimensionMismatch("feedback gain must be square in the port count")
    sym = 0.5 * (gain + gain.T)
    skew = 0.5 * (gain - gain.T)
    J = sp.csr_matrix(sys.J + sys.G @ sp.csr_matrix(skew) @ sys.Gout.T)
    R = sp.csr_matrix(-(sys.G @ sp.csr_matrix(sym) @ sys.Gout.T))
    if sys.R is not None:
        R = sp.csr_matrix(R + sys.R)
    return replace(sys, J=J, R=R, meta=dict(sys.meta, feedback_gain=gain))


# ------------------------------------------------------------- controllers


@dataclass(frozen=True, eq=False)
class Controller:
    """Integrator controller dζ/dt = gc u_c, y_c = gcᵀ Qc ζ."""

    gc: np.ndarray
    Hc: np.ndarray

    def __post_init__(self):
        gc = np.atleast_2d(np.array(self.gc, dtype=float))
        hc = np.array(self.Hc, dtype=float).ravel()
        if hc.size != gc.shape[0]:
            raise DimensionMismatch("Hc diagonal must have one entry per controller state")
        if not np.all(np.isfinite(gc)) or not np.all(np.isfinite(hc)) or np.any(hc < 0):
            raise ValueError("controller data must be finite with nonnegative Hc")
        object.__setattr__(self, "gc", gc)
        object.__setattr__(self, "Hc", hc)

    @property
    def m(self) -> int:
        return self.gc.shape[0]


def close_loop(sys: PortHamiltonianSystem, ctrl: Controller) -> PortHamiltonianSystem:
    """Power-preserving interconnection u_c = y, u = -y_c (+ external input).

    The plant input channel stays open as an external input so the
    closed loop can still be driven.
    """
    D = _require_dirac(sys)
    if D.variant is not Variant.PRIMAL_STORED:
        raise VariantMismatch("controller interconnection expects a primal-stored plant")
    if len(sys.partition) != 2:
        raise VariantMismatch("plant is already interconnected")
    if ctrl.gc.shape[1] != sys.nu:
        raise DimensionMismatch(f"gc has {ctrl.gc.shape[1]} columns but the plant has {sys.nu} ports")
    gc = sp.csr_matrix(ctrl.gc)
    m = ctrl.m
    J = sp.bmat([[sys.J, -(sys.G @ gc.T)], [gc @ sys.Gout.T, sp.csr_matrix((m, m))]], format="csr")
    G = sp.vstack([sys.G, sp.csr_matrix((m, sys.nu))], format="csr")
    Gout = sp.vstack([sys.Gout, sp.csr_matrix((m, sys.nu))], format="csr")
    Q = sp.block_diag([sys.Q, sp.diags(ctrl.Hc)], format="csr")
    return PortHamiltonianSystem(
        J=J,
        G=G,
        Gout=Gout,
        Q=Q,
        partition=tuple(sys.partition) + (m,),
        port_labels=sys.port_labels,
        dirac=D,
        geometry=sys.geometry,
        kind=sys.kind + "+controller",
        symbols=tuple(sys.symbols) + ("zeta",),
        meta=dict(sys.meta, plant=sys, controller=ctrl),
    )


def closed_loop_casimirs(closed: PortHamiltonianSystem) -> np.ndarray:
    """Basis (columns) of linear Casimirs cᵀx of a closed loop, cᵀJ_cl = 0.

    The p-block must lie in ker d ∩ ker(gc·tr); the q-block and the
    controller block solve the coupled kernel condition jointly.
    """
    if "controller" not in closed.meta:
        raise VariantMismatch("not a closed-loop system")
    D = closed.dirac
    ctrl: Controller = closed.meta["controller"]
    K, n, p, q = D.complex, D.n, D.p, D.q
    n_p, n_q, m = D.n_p, D.n_q, ctrl.m
    d = ops.coboundary(K, n - p).matrix.toarray().astype(float)
    tr = ops.trace_matrix(K, n - p).matrix.toarray().astype(float)
    di = ops.dual_derivative(K, n - q).matrix.toarray().astype(float)
    db = ops.dual_boundary_derivative(K, n - q).matrix.toarray().astype(float)
    s_q = float(D.pairing_signs()[n_p])

    p_basis = nullspace(np.vstack([d, ctrl.gc @ tr]))
    qz_basis = nullspace(np.hstack([di, -s_q * db @ ctrl.gc.T]))
    cols = []
    for c in p_basis.T:
        v = np.zeros(n_p + n_q + m)
        v[:n_p] = c
        cols.append(v)
    for c in qz_basis.T:
        v = np.zeros(n_p + n_q + m)
        v[n_p:] = c
        cols.append(v)
    return np.array(cols).T if cols else np.zeros((n_p + n_q + m, 0))
