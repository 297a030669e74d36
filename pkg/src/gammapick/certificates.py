"""Problems, certificates and solver-independent verification.

Nothing in this module calls the solver: verification recomputes every
quantity from the certificate payload and the problem data alone (phi values,
Schur products, eigenvalues), so an emitted certificate can be re-checked by
an auditor that never trusts the search path that produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import CertificateError
from .kernels import (
    KernelMatrix,
    NodeSet,
    admissibility_report,
    coefficient_stack,
)
from .linalg import eigh, eigh_stack, frob, hermitize


@dataclass(frozen=True)
class PickProblem:
    """Interpolation data: nodes lambda_i in G and targets w_i.

    Targets must sit in the closed unit disk for the feasibility question;
    extremal-norm queries accept arbitrary finite targets.
    """

    nodes: NodeSet
    targets: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.targets, dtype=complex).reshape(-1)
        if w.size != len(self.nodes):
            raise ValueError(
                f"{len(self.nodes)} nodes but {w.size} targets"
            )
        if not np.all(np.isfinite(w.view(float))):
            raise ValueError("targets contain non-finite values")
        object.__setattr__(self, "targets", w)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes.to_json(),
            "targets": jsonio.cvector_to_pairs(self.targets),
        }

    @staticmethod
    def from_json(obj) -> "PickProblem":
        nodes = NodeSet.from_json(obj["nodes"])
        targets = jsonio.pairs_to_cvector(obj["targets"])
        return PickProblem(nodes, targets)


def scaled_pick_target(problem: PickProblem, scale: float) -> np.ndarray:
    """The matrix (scale^2 - w_i conj(w_j)) the decomposition must reproduce."""
    w = problem.targets
    return hermitize(scale**2 - w[:, None] * np.conj(w)[None, :])


def pick_matrix(problem: PickProblem, k: KernelMatrix, scale: float = 1.0) -> np.ndarray:
    """Entrywise (scale^2 - w_i conj(w_j)) k(i, j); Hermitian."""
    if scale <= 0.0:
        raise ValueError(f"scale must be positive, got {scale}")
    _check_same_nodes(problem.nodes, k.nodes)
    return hermitize(scaled_pick_target(problem, scale) * k.gram)


def _check_same_nodes(a: NodeSet, b: NodeSet, tol: float = 1e-12) -> None:
    if len(a) != len(b):
        raise CertificateError(f"node-set size mismatch: {len(a)} vs {len(b)}")
    for i, (x, y) in enumerate(zip(a.points, b.points)):
        if max(abs(x.s - y.s), abs(x.p - y.p)) > tol:
            raise CertificateError(f"node {i} differs between problem and kernel")


@dataclass(frozen=True)
class DecompositionCertificate:
    """Finitely supported primal certificate: PSD blocks over boundary alphas.

    Witnesses scale^2 - w_i conj(w_j) = sum_m E_m o Gamma_m with
    E_m(i,j) = 1 - phi(alpha_m, lambda_i) conj(phi(alpha_m, lambda_j)) up to
    ``residual`` in Frobenius norm.
    """

    alphas: np.ndarray
    blocks: tuple[np.ndarray, ...]
    residual: float
    scale: float

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=complex).reshape(-1)
        if len(self.blocks) != a.size:
            raise ValueError("one block per alpha support point required")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(
            self, "blocks", tuple(hermitize(b) for b in self.blocks)
        )

    @property
    def support(self) -> int:
        return len(self.blocks)

    def to_json(self) -> dict:
        n = self.blocks[0].shape[0] if self.blocks else 0
        return {
            "type": "decomposition",
            "scale": self.scale,
            "residual": self.residual,
            "block_dim": n,
            "alphas": jsonio.cvector_to_pairs(self.alphas),
            "blocks": [jsonio.cmatrix_to_rowmajor(b) for b in self.blocks],
        }

    @staticmethod
    def from_json(obj) -> "DecompositionCertificate":
        if obj.get("type") != "decomposition":
            raise CertificateError("not a decomposition certificate")
        n = int(obj["block_dim"])
        alphas = jsonio.pairs_to_cvector(obj["alphas"])
        blocks = tuple(
            jsonio.rowmajor_to_cmatrix(b, n, n) for b in obj["blocks"]
        )
        return DecompositionCertificate(
            alphas=alphas,
            blocks=blocks,
            residual=float(obj["residual"]),
            scale=float(obj["scale"]),
        )


@dataclass(frozen=True)
class DualCertificate:
    """Admissible kernel whose Pick matrix at ``scale`` has a negative eigenvalue."""

    kernel: KernelMatrix
    violation: float
    witness: np.ndarray
    admissibility_slack: float
    scale: float

    def to_json(self) -> dict:
        return {
            "type": "dual",
            "scale": self.scale,
            "violation": self.violation,
            "admissibility_slack": self.admissibility_slack,
            "witness": jsonio.cvector_to_pairs(self.witness),
            "kernel": self.kernel.to_json(),
        }

    @staticmethod
    def from_json(obj) -> "DualCertificate":
        if obj.get("type") != "dual":
            raise CertificateError("not a dual certificate")
        return DualCertificate(
            kernel=KernelMatrix.from_json(obj["kernel"]),
            violation=float(obj["violation"]),
            witness=jsonio.pairs_to_cvector(obj["witness"]),
            admissibility_slack=float(obj["admissibility_slack"]),
            scale=float(obj["scale"]),
        )


def load_certificate(obj):
    kind = obj.get("type")
    if kind == "decomposition":
        return DecompositionCertificate.from_json(obj)
    if kind == "dual":
        return DualCertificate.from_json(obj)
    raise CertificateError(f"unknown certificate type {kind!r}")


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of one feasibility question; exactly one certificate is present."""

    feasible: bool
    primal: DecompositionCertificate | None
    dual: DualCertificate | None
    iterations: int
    wall_time: float

    def __post_init__(self):
        if (self.primal is None) == (self.dual is None):
            raise ValueError("exactly one of primal/dual must be present")
        if self.feasible != (self.primal is not None):
            raise ValueError("feasible verdicts carry primal certificates only")

    def to_json(self) -> dict:
        # wall_time stays out of the JSON: emitted files must be reproducible
        # byte-for-byte; timings live in the run manifest instead.
        return {
            "feasible": self.feasible,
            "iterations": self.iterations,
            "primal": self.primal.to_json() if self.primal else None,
            "dual": self.dual.to_json() if self.dual else None,
        }


@dataclass(frozen=True)
class DecompositionCheck:
    residual: float
    min_block_eig: float
    ok: bool


@dataclass(frozen=True)
class DualCheck:
    violation: float
    admissibility_slack: float
    diag_deviation: float
    kernel_min_eig: float
    ok: bool


def decomposition_coefficients(nodes: NodeSet, alphas: np.ndarray) -> np.ndarray:
    """E_m stacks for a certificate's alpha support (recomputed from scratch)."""
    return coefficient_stack(nodes, alphas)


def verify_decomposition(
    problem: PickProblem,
    cert: DecompositionCertificate,
    residual_tol: float = 1e-6,
    block_tol: float = 1e-9,
) -> DecompositionCheck:
    """Re-verify a primal certificate from its payload alone."""
    n = problem.n
    for b in cert.blocks:
        if b.shape != (n, n):
            raise CertificateError(
                f"block shape {b.shape} does not match problem size {n}"
            )
    target = scaled_pick_target(problem, cert.scale)
    if cert.support == 0:
        residual = frob(target)
        min_eig = 0.0
    else:
        E = decomposition_coefficients(problem.nodes, cert.alphas)
        blocks = np.stack(cert.blocks)
        total = np.einsum("mij,mij->ij", E, blocks)
        residual = frob(total - target)
        min_eig = float(min(eigh_stack(np.stack(cert.blocks))[0][:, 0]))
    ok = residual <= residual_tol and min_eig >= -block_tol
    return DecompositionCheck(residual=residual, min_block_eig=min_eig, ok=ok)


def verify_dual(
    problem: PickProblem,
    cert: DualCertificate,
    violation_tol: float = 1e-6,
    slack_tol: float = -1e-8,
    admiss_grid: int = 256,
    strict_tol: float = 1e-10,
) -> DualCheck:
    """Re-verify a dual certificate: admissibility sweep plus Pick violation."""
    _check_same_nodes(problem.nodes, cert.kernel.nodes)
    report = admissibility_report(cert.kernel, alpha_grid=admiss_grid)
    pick = pick_matrix(problem, cert.kernel, cert.scale)
    w, v = eigh(pick)
    violation = float(-w[0])
    kernel_min = float(eigh(cert.kernel.gram)[0][0])
    ok = (
        violation >= violation_tol
        and report.slack >= slack_tol
        and report.diag_deviation <= 1e-8
        and kernel_min >= 0.5 * strict_tol
    )
    return DualCheck(
        violation=violation,
        admissibility_slack=report.slack,
        diag_deviation=report.diag_deviation,
        kernel_min_eig=kernel_min,
        ok=ok,
    )
