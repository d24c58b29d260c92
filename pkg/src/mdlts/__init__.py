"""Exact computations for modified λ-differential Lie triple systems."""

from __future__ import annotations

from .cochain import (
    PAPER,
    STRENGTHENED,
    ClosureError,
    CochainComplex,
    Limits,
    MDCochain,
    NotInSubspaceError,
    ResourceLimitError,
    TensorCochain,
    constrained_basis,
    delta,
    operator_matrix,
    partial,
    phi,
)
from .cohomology import (
    CohomologyReport,
    NotACocycleError,
    coboundary_preimage,
    cohomology,
    cohomology_class,
    in_cochain_space,
    is_cocycle,
)
from .deformation import (
    FormalIsomorphism,
    IsomorphismError,
    TruncatedDeformation,
    apply_isomorphism,
    compose_isomorphisms,
    equivalent_infinitesimals_check,
    infinitesimal,
    rigidity_report,
    trivialize_first_order,
    verify_deformation,
)
from .extension import (
    AbelianExtension,
    ExtensionCocycle,
    ExtensionError,
    are_equivalent,
    build_extension,
    check_extension,
    extract,
    shift_section,
    with_section,
)
from .io import ParseError, SystemFile, emit, load, parse
from .linalg import Matrix, NoSolutionError, nullspace, rank, rref, solve
from .lts import (
    MDLTS,
    LieAlgebra,
    ModifiedDifferential,
    Representation,
    TripleSystem,
    ValidationReport,
    adjoint_rep,
    check_homomorphism,
    dual_rep,
    lts_from_lie_algebra,
    scale_mdo,
    semidirect_product,
    shift_to_derivation,
    validate_lie_algebra,
    validate_lts,
    validate_mdlts,
    validate_mdo,
    validate_rep,
)

__version__ = "0.1.0"
