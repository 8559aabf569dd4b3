"""Effective homology from admissible discrete vector fields."""

from .core_complex import (AlgebraicCellularComplex, BasisMembershipError, Cell, CellularComplex, Chain,
                           ChainMorphism, ContractError, InternalConsistencyError, InvalidComplexError,
                           Report, apply_morphism, boundary, finite_complex, incidence, verify_d_squared)
from .reduction import (NilpotencyError, Perturbation, Reduction, boundary_preimage, compose_reductions,
                        identity_reduction, lift_cycle, perturb, project_cycle, verify_reduction)

__version__ = "0.1.0"
