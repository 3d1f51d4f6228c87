"""Observational entropy of closed quantum systems and spinless-fermion chain experiments."""

__version__ = "0.1.0"

from .coarsegrain import (  # noqa: E402
    CoarseGraining,
    DiagonalPartition,
    IdentityCoarseGraining,
    VectorGrouping,
    energy_coarse_graining,
    identity_coarse_graining,
    local_energy_product_coarse_graining,
    positional_coarse_graining,
    refines,
    state_induced_coarse_graining,
    tensor_product,
)
from .entropy import (  # noqa: E402
    canonical_entropy,
    dos_entropy,
    entanglement_entropy,
    kl_identity_check,
    macrostate_distribution,
    match_beta,
    observational_entropy,
    s_diag,
    s_foe,
    s_xe,
    von_neumann_entropy,
)
from .fockspace import BinPartition, FockBasis, LatticeSpec, enumerate_basis  # noqa: E402
from .model import ModelParams, build_hamiltonian, decompose_blocks  # noqa: E402
from .spectral import SpectralDecomposition, diagonalize, evolve_state, group_degenerate  # noqa: E402
from .states import Ensemble  # noqa: E402

__all__ = [
    "BinPartition",
    "CoarseGraining",
    "DiagonalPartition",
    "Ensemble",
    "FockBasis",
    "IdentityCoarseGraining",
    "LatticeSpec",
    "ModelParams",
    "SpectralDecomposition",
    "VectorGrouping",
    "build_hamiltonian",
    "canonical_entropy",
    "decompose_blocks",
    "diagonalize",
    "dos_entropy",
    "energy_coarse_graining",
    "entanglement_entropy",
    "enumerate_basis",
    "evolve_state",
    "group_degenerate",
    "identity_coarse_graining",
    "kl_identity_check",
    "local_energy_product_coarse_graining",
    "macrostate_distribution",
    "match_beta",
    "observational_entropy",
    "positional_coarse_graining",
    "refines",
    "s_diag",
    "s_foe",
    "s_xe",
    "state_induced_coarse_graining",
    "tensor_product",
    "von_neumann_entropy",
]
