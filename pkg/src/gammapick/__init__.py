"""gammapick: Pick interpolation, realization and extension on the symmetrized bidisk.

The package decides interpolation feasibility with checkable certificates
(finitely supported decompositions on the primal side, admissible kernels on
the dual side), realizes interpolants as colligation transfer functions,
computes extremal norms by certified bisection, and audits the von Neumann
inequality over subordinate operator pairs.
"""

from .certificates import (
    DecompositionCertificate,
    DualCertificate,
    FeasibilityVerdict,
    PickProblem,
    pick_matrix,
    verify_decomposition,
    verify_dual,
)
from .errors import (
    CertificateError,
    ConeMembershipError,
    DomainError,
    GammaPickError,
    LinalgError,
    NotPSDError,
    UndecidedError,
)
from .extension import (
    ExtensionResult,
    SubordinatePair,
    calculus_norm,
    extend,
    subordinate_pair,
    von_neumann_audit,
)
from .geometry import GPoint, gpoint, is_member, phi, sample_g, sup_phi, symmetrize
from .hardy import HardyCheckReport, kernel_identity_check, szego_admissibility_check
from .kernels import (
    AdmissibilityReport,
    KernelMatrix,
    NodeSet,
    admissibility_report,
    antisym_kernel,
    b_alpha,
    normalize_diag,
    random_admissible,
    szego,
)
from .linalg import eigh, pencil_max, psd_factor, psd_project
from .realization import (
    Colligation,
    RealizedFunction,
    build_colligation,
    evaluate,
    evaluate_scaled,
    gns_vectors,
    norm_audit,
    realize,
)
from .solver import (
    ExtremalResult,
    SolverConfig,
    dual_search,
    extremal_norm,
    solve_feasibility,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "CertificateError",
    "Colligation",
    "ConeMembershipError",
    "DecompositionCertificate",
    "DomainError",
    "DualCertificate",
    "ExtensionResult",
    "ExtremalResult",
    "FeasibilityVerdict",
    "GPoint",
    "GammaPickError",
    "HardyCheckReport",
    "KernelMatrix",
    "LinalgError",
    "NodeSet",
    "NotPSDError",
    "PickProblem",
    "RealizedFunction",
    "SolverConfig",
    "SubordinatePair",
    "UndecidedError",
    "admissibility_report",
    "antisym_kernel",
    "b_alpha",
    "build_colligation",
    "calculus_norm",
    "dual_search",
    "eigh",
    "evaluate",
    "evaluate_scaled",
    "extend",
    "extremal_norm",
    "gns_vectors",
    "gpoint",
    "is_member",
    "kernel_identity_check",
    "norm_audit",
    "normalize_diag",
    "pencil_max",
    "phi",
    "pick_matrix",
    "psd_factor",
    "psd_project",
    "random_admissible",
    "realize",
    "sample_g",
    "solve_feasibility",
    "subordinate_pair",
    "sup_phi",
    "symmetrize",
    "szego",
    "szego_admissibility_check",
    "verify_decomposition",
    "verify_dual",
    "von_neumann_audit",
]
