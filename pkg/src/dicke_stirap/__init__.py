"""Collective STIRAP preparation of Dicke states in trapped-ion chains.

The package simulates a chain of three-level ions sharing a centre-of-mass
phonon mode, driven globally by two delayed Gaussian pulses on the red
sideband.  Dynamics are solved in the permutation-symmetric subspace and
cross-checked against a brute-force full Hilbert space simulator.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    AmbiguityError,
    ConsistencyError,
    DegenerateInputError,
    DomainError,
    IntegrationError,
    StiffnessError,
    TruncationError,
)
from .symbasis import (
    SymmetricBasis,
    SymmetricState,
    dimension,
    enumerate_basis,
    expand_to_computational,
    full_coupled_dimension,
    norm_coefficient,
)
from .hamiltonian import (
    DriveParams,
    HamiltonianSample,
    build_chain_matrix,
    build_symmetric_hamiltonian,
    coupling_lambda,
    pulse_envelopes,
)
from .darkstate import (
    DarkVector,
    dark_coefficients,
    dark_trajectory,
    dark_uniqueness,
    verify_dark,
)
from .spectrum import (
    SpectrumSample,
    determinant,
    e1_closed_form,
    instantaneous_spectrum,
    z_roots,
)
from .propagator import (
    PreparationResult,
    Trajectory,
    adiabatic_projection,
    fidelity,
    manifold_populations,
    prepare_dicke,
    propagate,
)

__all__ = [
    "__version__",
    "AccuracyError",
    "AmbiguityError",
    "ConsistencyError",
    "DegenerateInputError",
    "DomainError",
    "IntegrationError",
    "StiffnessError",
    "TruncationError",
    "SymmetricBasis",
    "SymmetricState",
    "dimension",
    "enumerate_basis",
    "expand_to_computational",
    "full_coupled_dimension",
    "norm_coefficient",
    "DriveParams",
    "HamiltonianSample",
    "build_chain_matrix",
    "build_symmetric_hamiltonian",
    "coupling_lambda",
    "pulse_envelopes",
    "DarkVector",
    "dark_coefficients",
    "dark_trajectory",
    "dark_uniqueness",
    "verify_dark",
    "SpectrumSample",
    "determinant",
    "e1_closed_form",
    "instantaneous_spectrum",
    "z_roots",
    "PreparationResult",
    "Trajectory",
    "adiabatic_projection",
    "fidelity",
    "manifold_populations",
    "prepare_dicke",
    "propagate",
]
