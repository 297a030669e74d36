"""Norm-preserving extension from finite node sets and von Neumann audits.

Given values on finitely many interior nodes, the extremal norm rho is the
smallest sup norm an interpolating holomorphic function can have; the
extension interpolant realizes it (up to the bisection bracket).  The
operator-theoretic side pairs each strictly positive admissible kernel delta
with the commuting matrices S, P acting on the span of its columns by

    S* delta(., j) = conj(s_j) delta(., j),    P* delta(., j) = conj(p_j) delta(., j),

a Gamma-contraction subordinate to the nodes.  Functional calculus of such a
pair is determined by node values alone, and its operator norm is the pencil
extreme sqrt(max eig of ((w_i conj(w_j)) o delta, delta)); the audit checks
calculus_norm <= rho across random cone members, with equality approached by
the near-extremal dual kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .certificates import DualCertificate, PickProblem
from .errors import ConeMembershipError
from .kernels import (
    KernelMatrix,
    NodeSet,
    admissibility_report,
    phi_matrix,
    random_admissible,
)
from .linalg import eigh, hermitize, pencil_max
from .realization import (
    RealizedFunction,
    evaluate_many,
    norm_audit,
    realize,
    with_audit,
)
from .solver import ExtremalResult, SolverConfig, extremal_norm, feasible_certificate_at


@dataclass(frozen=True)
class SubordinatePair:
    """Commuting matrices (S, P) subordinate to a node set, in the delta-column basis."""

    nodes: NodeSet
    delta: KernelMatrix
    S_matrix: np.ndarray
    P_matrix: np.ndarray
    contraction_max: float

    def to_json(self) -> dict:
        n = len(self.nodes)
        return {
            "delta": self.delta.to_json(),
            "S": jsonio.cmatrix_to_rowmajor(self.S_matrix),
            "P": jsonio.cmatrix_to_rowmajor(self.P_matrix),
            "contraction_max": self.contraction_max,
        }


def _phi_operator_norms(delta: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Operator norms of (2 alpha P - S)(2 - alpha S)^{-1} on H_delta per alpha.

    In the delta-column basis the operator has diagonal entries phi(alpha, node_j),
    so the squared norm is the pencil extreme of ((phi_i conj(phi_j)) o delta, delta).
    """
    out = np.empty(phis.shape[0])
    for idx in range(phis.shape[0]):
        row = phis[idx]
        numer = hermitize((row[:, None] * np.conj(row)[None, :]) * delta)
        out[idx] = np.sqrt(max(pencil_max(numer, delta), 0.0))
    return out


def subordinate_pair(
    delta: KernelMatrix,
    strict_tol: float = 1e-10,
    audit_grid: int = 128,
) -> SubordinatePair:
    """Build the subordinate Gamma-contraction attached to a cone member.

    Raises :class:`ConeMembershipError` when delta fails strict positivity,
    unit diagonal, the admissibility sweep, or the boundary contraction audit.
    """
    gram = delta.gram
    n = len(delta.nodes)
    lam_min = float(eigh(gram)[0][0])
    if lam_min < strict_tol:
        raise ConeMembershipError(
            f"delta is not strictly positive definite: lambda_min = {lam_min:.3e}"
        )
    diag_dev = float(np.abs(np.diag(gram) - 1.0).max())
    if diag_dev > 1e-8:
        raise ConeMembershipError(f"delta diagonal deviates from 1 by {diag_dev:.3e}")
    report = admissibility_report(delta)
    if report.slack < -1e-8:
        worst = min(
            [("phi sweep", report.min_eig_overall)] + list(report.per_constraint),
            key=lambda kv: kv[1],
        )
        raise ConeMembershipError(
            f"delta fails cone membership: worst constraint {worst[0]!r} "
            f"with residual {worst[1]:.3e}"
        )

    s = delta.nodes.s_array()
    p = delta.nodes.p_array()
    # delta [S] = diag(s) delta  <=>  S* delta(., j) = conj(s_j) delta(., j)
    S = np.linalg.solve(gram, s[:, None] * gram)
    P = np.linalg.solve(gram, p[:, None] * gram)

    thetas = np.arange(audit_grid) * (2.0 * np.pi / audit_grid)
    phis = phi_matrix(delta.nodes, np.exp(1j * thetas))
    norms = _phi_operator_norms(gram, phis)
    cmax = float(norms.max())
    if cmax > 1.0 + 1e-8:
        raise ConeMembershipError(
            f"pair fails the Gamma-contraction audit: max norm {cmax:.12f}"
        )
    return SubordinatePair(
        nodes=delta.nodes,
        delta=delta,
        S_matrix=S,
        P_matrix=P,
        contraction_max=cmax,
    )


def calculus_norm(pair: SubordinatePair, values) -> float:
    """Operator norm of f(S, P) where f takes the given values at the nodes."""
    w = np.asarray(values, dtype=complex).reshape(-1)
    n = len(pair.nodes)
    if w.size != n:
        raise ValueError(f"expected {n} values, got {w.size}")
    delta = pair.delta.gram
    numer = hermitize((w[:, None] * np.conj(w)[None, :]) * delta)
    return float(np.sqrt(max(pencil_max(numer, delta), 0.0)))


@dataclass(frozen=True)
class AuditSummary:
    trials: int
    max_ratio: float
    extremal_ratio: float | None

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "max_ratio": self.max_ratio,
            "extremal_ratio": self.extremal_ratio,
        }


@dataclass(frozen=True)
class ExtensionResult:
    """Extremal extension of finite node data with its audit trail."""

    nodes: NodeSet
    values: np.ndarray
    rho: float
    interpolant: RealizedFunction
    audit: AuditSummary
    extremal_kernel: DualCertificate | None
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes.to_json(),
            "values": jsonio.cvector_to_pairs(self.values),
            "rho": self.rho,
            "interpolant": self.interpolant.to_json(),
            "audit": self.audit.to_json(),
            "extremal_kernel": (
                self.extremal_kernel.to_json() if self.extremal_kernel else None
            ),
            "warnings": list(self.warnings),
        }

    @staticmethod
    def from_json(obj) -> "ExtensionResult":
        audit = obj["audit"]
        return ExtensionResult(
            nodes=NodeSet.from_json(obj["nodes"]),
            values=jsonio.pairs_to_cvector(obj["values"]),
            rho=float(obj["rho"]),
            interpolant=RealizedFunction.from_json(obj["interpolant"]),
            audit=AuditSummary(
                trials=int(audit["trials"]),
                max_ratio=float(audit["max_ratio"]),
                extremal_ratio=(
                    float(audit["extremal_ratio"])
                    if audit.get("extremal_ratio") is not None
                    else None
                ),
            ),
            extremal_kernel=(
                DualCertificate.from_json(obj["extremal_kernel"])
                if obj.get("extremal_kernel")
                else None
            ),
            warnings=tuple(obj.get("warnings", ())),
        )


def _constant_zero_interpolant() -> RealizedFunction:
    from .realization import Colligation

    col = Colligation(
        alphas=np.zeros(0, dtype=complex),
        block_dims=(),
        A=0.0 + 0.0j,
        B=np.zeros(0, dtype=complex),
        C=np.zeros(0, dtype=complex),
        D=np.zeros((0, 0), dtype=complex),
        isometry_defect=0.0,
    )
    return RealizedFunction(col, scale=1.0)


def extend(
    nodes: NodeSet, values, config: SolverConfig = SolverConfig()
) -> ExtensionResult:
    """Extremal extension: rho by certified bisection, interpolant by realization.

    The interpolant is realized at rho(1 + rho_tol/2), inside the audit
    envelope rho(1 + 1e-4); the reported certificates bracket rho at
    rho(1 +- 10 rho_tol) as produced by the extremal-norm search.
    """
    values = np.asarray(values, dtype=complex).reshape(-1)
    problem = PickProblem(nodes, values)
    if np.all(np.abs(values) == 0.0):
        fn = _constant_zero_interpolant()
        summary = AuditSummary(trials=0, max_ratio=0.0, extremal_ratio=None)
        return ExtensionResult(
            nodes=nodes,
            values=values,
            rho=0.0,
            interpolant=fn,
            audit=summary,
            extremal_kernel=None,
        )

    ext: ExtremalResult = extremal_norm(problem, config)
    rho = ext.rho
    t_g = rho * (1.0 + 0.5 * config.rho_tol)
    cert_g = feasible_certificate_at(problem, t_g, config)
    fn = realize(problem, cert_g)
    fn = with_audit(fn, config.audit_samples, config.seed)

    warnings = list(ext.warnings)
    interp_err = float(
        np.abs(t_g * evaluate_many(fn, list(nodes.points)) - values).max()
    )
    if interp_err > 1e-6:
        warnings.append(f"interpolation defect {interp_err:.3e} exceeds 1e-6")
    observed = fn.norm_audit_result[1] * t_g if fn.norm_audit_result else 0.0
    if observed > rho * (1.0 + 1e-4):
        warnings.append(f"norm audit {observed:.8g} exceeds rho(1+1e-4)")

    result = ExtensionResult(
        nodes=nodes,
        values=values,
        rho=rho,
        interpolant=fn,
        audit=AuditSummary(trials=0, max_ratio=0.0, extremal_ratio=None),
        extremal_kernel=ext.extremal_kernel,
        warnings=tuple(warnings),
    )
    summary = von_neumann_summary(result, config.audit_trials, config.seed)
    return ExtensionResult(
        nodes=result.nodes,
        values=result.values,
        rho=result.rho,
        interpolant=result.interpolant,
        audit=summary,
        extremal_kernel=result.extremal_kernel,
        warnings=result.warnings,
    )


def von_neumann_audit(
    result: ExtensionResult, trials: int, seed: int
) -> tuple[float, KernelMatrix]:
    """Max of calculus_norm/rho over random subordinate pairs, with the worst kernel.

    The near-extremal dual kernel, when the extension carries one, joins the
    pool; the von Neumann inequality caps every ratio at 1 while the extremal
    kernel pushes it back up to 1 within the bisection bracket.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if result.rho <= 0.0:
        raise ValueError("audit needs rho > 0 (non-constant-zero data)")
    max_ratio = -np.inf
    worst = None
    for t in range(trials):
        delta = random_admissible(result.nodes, seed=(seed, t), mix=3)
        pair = subordinate_pair(delta)
        ratio = calculus_norm(pair, result.values) / result.rho
        if ratio > max_ratio:
            max_ratio = ratio
            worst = delta
    if result.extremal_kernel is not None:
        delta = result.extremal_kernel.kernel
        pair = subordinate_pair(delta)
        ratio = calculus_norm(pair, result.values) / result.rho
        if ratio > max_ratio:
            max_ratio = ratio
            worst = delta
    return float(max_ratio), worst


def von_neumann_summary(result: ExtensionResult, trials: int, seed: int) -> AuditSummary:
    if trials < 1 or result.rho <= 0.0:
        return AuditSummary(trials=0, max_ratio=0.0, extremal_ratio=None)
    max_ratio, _ = von_neumann_audit(result, trials, seed)
    extremal_ratio = None
    if result.extremal_kernel is not None:
        pair = subordinate_pair(result.extremal_kernel.kernel)
        extremal_ratio = calculus_norm(pair, result.values) / result.rho
    return AuditSummary(trials=trials, max_ratio=max_ratio, extremal_ratio=extremal_ratio)
