"""Discrete exterior calculus and port-Hamiltonian models on simplicial meshes."""
from .complex import (
    BoundaryComplex,
    DualGeometry,
    SimplicialComplex,
    build_complex,
    compute_dual_geometry,
    generate_interval_mesh,
    generate_square_diagonal_mesh,
    generate_strip_mesh,
    generate_two_triangle_mesh,
    is_well_centered,
)
from .cochain import Carrier, Cochain, boundary_wedge_pair, wedge_pair
from .dirac import SimplicialDirac, Variant, assemble_dirac, verify_dirac
from .integrate import InputSignal, Trajectory, simulate, step_leapfrog, step_midpoint
from .models import (
    Causality,
    LineEnds,
    build_telegraph,
    build_wave2d,
    discrete_spectrum,
    extract_lc_ladder,
    telegraph_line,
)
from .phs import (
    Controller,
    MaterialField,
    PortHamiltonianSystem,
    QuadraticHamiltonian,
    assemble_phs,
    close_loop,
    closed_loop_casimirs,
    conservation_laws,
    energy,
    passivation_feedback,
    power_residual,
    with_output_feedback,
)
