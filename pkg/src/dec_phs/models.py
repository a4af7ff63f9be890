"""Concrete models: 2D wave equation, 1D telegraph line and LC-ladder views."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .complex import DualGeometry, SimplicialComplex, generate_interval_mesh
from .dirac import Variant, assemble_dirac
from .errors import DimensionMismatch, VariantMismatch
from .phs import MaterialField, PortHamiltonianSystem, QuadraticHamiltonian, assemble_phs


class Causality(enum.Enum):
    VOLTAGE_INPUT = "voltage"
    CURRENT_INPUT = "current"


class LineEnds(enum.Enum):
    SHORT_SHORT = "short-short"
    OPEN_OPEN = "open-open"
    SHORT_OPEN = "short-open"


def build_wave2d(K: SimplicialComplex, G: DualGeometry, mu: MaterialField, E: MaterialField) -> PortHamiltonianSystem:
    """Linear 2D wave equation with momentum on dual cells and strain on edges.

    Inputs are the boundary stresses, outputs the boundary velocities at
    the boundary vertices.
    """
    if K.n != 2:
        raise DimensionMismatch(f"wave model needs a 2D complex, got n={K.n}")
    star0 = ops.hodge(K, G, 0).matrix.diagonal()
    star1 = ops.hodge(K, G, 1).matrix.diagonal()
    mu_v = mu.on(K.count(0))
    e_v = E.on(K.count(1))
    H = QuadraticHamiltonian(1.0 / (mu_v * star0), e_v * star1, {"mu": mu, "E": E})
    D = assemble_dirac(K, G, 2, 1, Variant.PRIMAL_STORED)
    return assemble_phs(D, H, geometry=G, kind="wave2d", symbols=("p_hat", "eps"))


def build_telegraph(
    K: SimplicialComplex,
    G: DualGeometry,
    C: MaterialField,
    L: MaterialField,
    causality: Causality = Causality.VOLTAGE_INPUT,
) -> PortHamiltonianSystem:
    """Lossless transmission line in either causality.

    Voltage input: charge on primal edges, flux on dual cells, boundary
    voltages in and currents out.  Current input: charge on dual cells,
    flux on primal edges, boundary currents in and voltages out.  In each
    case ``C`` and ``L`` are given per cell of the carrier they live on.
    """
    if K.n != 1:
        raise DimensionMismatch(f"telegraph model needs a 1D complex, got n={K.n}")
    causality = Causality(causality)
    star0 = ops.hodge(K, G, 0).matrix.diagonal()
    star1 = ops.hodge(K, G, 1).matrix.diagonal()
    if causality is Causality.VOLTAGE_INPUT:
        cap = C.on(K.count(1))
        ind = L.on(K.count(0))
        H = QuadraticHamiltonian(star1 / cap, 1.0 / (star0 * ind), {"C": C, "L": L})
        D = assemble_dirac(K, G, 1, 1, Variant.DUAL_STORED)
        symbols = ("q", "phi_hat")
    else:
        cap = C.on(K.count(0))
        ind = L.on(K.count(1))
        H = QuadraticHamiltonian(1.0 / (star0 * cap), star1 / ind, {"C": C, "L": L})
        D = assemble_dirac(K, G, 1, 1, Variant.PRIMAL_STORED)
        symbols = ("q_hat", "phi")
    return assemble_phs(
        D, H, geometry=G, kind="telegraph", symbols=symbols, meta={"causality": causality}
    )


def telegraph_line(n_edges: int, length: float = 1.0, C: float = 1.0, L: float = 1.0, causality=Causality.VOLTAGE_INPUT):
    """Uniform telegraph model on an interval mesh."""
    K, G = generate_interval_mesh(n_edges, length)
    return build_telegraph(K, G, MaterialField.uniform("C", C), MaterialField.uniform("L", L), causality)


@dataclass(frozen=True)
class LCLadder:
    inductances: np.ndarray
    capacitances: np.ndarray
    causality: Causality

    @property
    def ports(self) -> str:
        if self.causality is Causality.VOLTAGE_INPUT:
            return "voltage in / current out"
        return "current in / voltage out"


def extract_lc_ladder(sys: PortHamiltonianSystem) -> LCLadder:
    """Lumped element values read off the energy matrix (value = 1 / Q_ii)."""
    if sys.kind != "telegraph":
        raise VariantMismatch("LC ladders exist only for telegraph systems")
    diag = sys.Q.diagonal()
    n_p = sys.partition[0]
    charge, flux = 1.0 / diag[:n_p], 1.0 / diag[n_p:]
    return LCLadder(inductances=flux, capacitances=charge, causality=sys.meta["causality"])


def closure_for(sys: PortHamiltonianSystem) -> LineEnds:
    """Homogeneous end condition imposed by a zero input."""
    if sys.meta.get("causality") is Causality.VOLTAGE_INPUT:
        return LineEnds.SHORT_SHORT
    return LineEnds.OPEN_OPEN


def analytic_spectrum_telegraph(n_modes: int, length: float, Lc: float, Cc: float, bc: LineEnds) -> list[float]:
    """Angular eigenfrequencies of a uniform lossless line."""
    if n_modes <= 0:
        return []
    c = 1.0 / math.sqrt(Lc * Cc)
    bc = LineEnds(bc)
    shift = 0.5 if bc is LineEnds.SHORT_OPEN else 0.0
    return [(k - shift) * math.pi * c / length for k in range(1, n_modes + 1)]


def discrete_spectrum(sys: PortHamiltonianSystem, zero_tol: float = 1e-9) -> np.ndarray:
    """Positive angular frequencies of dx/dt = J Q x with the inputs held at zero."""
    if sys.R is not None and sys.R.nnz and abs(sys.R).max() > 0:
        raise VariantMismatch("spectrum needs a lossless system")
    q = sys.Q.diagonal()
    if np.any(q <= 0):
        raise ValueError("energy matrix must be positive definite")
    root = np.sqrt(q)
    S = (sp.diags(root) @ sys.J @ sp.diags(root)).toarray()
    lam = np.linalg.eigvalsh(1j * S)
    top = float(np.abs(lam).max()) if lam.size else 0.0
    pos = np.sort(lam[lam > zero_tol * max(top, 1.0)])
    return pos


def lowest_frequency_error(n_edges: int, causality=Causality.VOLTAGE_INPUT, length: float = 1.0) -> float:
    sys = telegraph_line(n_edges, length, causality=causality)
    exact = analytic_spectrum_telegraph(1, length, 1.0, 1.0, closure_for(sys))[0]
    return abs(float(discrete_spectrum(sys)[0]) - exact)


def observed_orders(resolutions, errors) -> list[float | None]:
    """Order between consecutive resolutions; the first entry is None."""
    out: list[float | None] = [None]
    for (n0, e0), (n1, e1) in zip(zip(resolutions, errors), zip(resolutions[1:], errors[1:])):
        out.append(math.log(e0 / e1) / math.log(n1 / n0) if e0 > 0 and e1 > 0 else None)
    return out


def _cells_of(K: SimplicialComplex, G: DualGeometry, carrier, degree: int):
    """Representative points and measures of the cells a state block lives on."""
    from .cochain import Carrier

    if carrier is Carrier.PRIMAL:
        return G.circumcenters[degree], G.primal_volume[degree]
    k = K.n - degree
    return G.circumcenters[k], G.dual_volume[k]


def smooth_initial_state(sys: PortHamiltonianSystem) -> np.ndarray:
    """Half-sine bump integrated over the cells of the first state block.

    The remaining blocks start at zero.  The bump vanishes on the bounding
    box of the mesh, so it carries almost no grid-scale content.
    """
    D = sys.dirac
    if D is None or sys.geometry is None:
        raise VariantMismatch("smooth initial state needs a geometric system")
    K, G = D.complex, sys.geometry
    pts, vol = _cells_of(K, G, *D.flow_spaces[0])
    lo, hi = K.vertices.min(axis=0), K.vertices.max(axis=0)
    bump = np.prod(np.sin(np.pi * (pts - lo) / (hi - lo)), axis=1)
    x = np.zeros(sys.nx)
    x[: D.n_p] = bump * vol
    return x
