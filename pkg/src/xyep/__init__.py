"""Exact solution toolkit for the open non-Hermitian anisotropic XY chain."""

__version__ = "0.1.0"

from .chain import (
    ChainSpec,
    ModeVector,
    SpectralPoint,
    boundary_polynomial,
    build_quasi_hamiltonian,
    eps_of_x,
    gamma_to_lambda,
    lambda_to_gamma,
    mode_vector_poly,
    mode_vector_trig,
    momentum_residual,
    quasi_energies,
    x_of_eps,
)
from .basis import (
    BiorthogonalBasis,
    OperatorCoefficients,
    anticommutator,
    assemble_basis,
    many_body_energies,
    operator_coefficients,
    pairing_structure,
    vacuum_energy,
)
from .ep import (
    EPRecord,
    JordanDecomposition,
    ep_ground_energy,
    ep_state_catalog,
    generalized_eigenvector,
    jordan_decomposition,
    locate_eps,
    reference_ep_gammas,
)
from .oracle import (
    build_ep_states,
    build_spin_hamiltonian,
    ed_eigen,
    geometric_multiplicities,
    l4_closed_form,
    match_spectra,
    realize_operator,
)
from .polyalg import (
    DensePoly,
    IntBivarPoly,
    chebyshev_u_poly,
    poly_derivative,
    poly_eval,
    poly_roots,
    resultant_eliminate_x,
)
from .topology import (
    LoopResult,
    OverlapGrid,
    branch_scaling_probe,
    overlap_grid,
    phase_rigidity,
    sheet_stitch,
    track_loop,
)

__all__ = [name for name in dir() if not name.startswith("_")]
