"""Feasibility, certificates and extremal norm for Pick problems on the symmetrized bidisk.

Primal phase: decide whether (scale^2 - w_i conj(w_j)) decomposes as
sum_m E_m o Gamma_m with PSD blocks over a boundary alpha-grid, by Dykstra
alternating projections between the product PSD cone and the affine slice.
The affine projection is closed-form: the normal operator of the constraint
map is entrywise multiplication by W = sum_m |E_m|^2, which is strictly
positive because |phi| < 1 at interior nodes.

Dual phase: minimize the Farkas functional sum_ij T_ij k_ij over Hermitian k
with E_m o k >= 0 on the grid and tr k = n.  A negative minimum separates the
target from the primal cone and, after diagonal renormalization (a congruence,
so it preserves the Schur inequalities and the violation's sign), yields an
admissible kernel whose Pick matrix has a negative eigenvalue.  The search
runs a small log-barrier Newton method: iterates stay strictly inside the
cone, the duality-gap bound certifies when no grid certificate exists, and
near-critical scales resolve to full precision.  Certificates are always
re-verified by a full admissibility sweep; a failed sweep pins the offending
alpha into the constraint set and the solve repeats (bounded exchange).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .certificates import (
    DecompositionCertificate,
    DualCertificate,
    FeasibilityVerdict,
    PickProblem,
    scaled_pick_target,
    verify_dual,
)
from .errors import UndecidedError
from .kernels import (
    KernelMatrix,
    admissibility_report,
    coefficient_stack,
    normalize_diag,
    szego_gram,
)
from .linalg import eigh, frob, hermitize, psd_project_stack


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the feasibility solver and the extremal-norm bisection."""

    alpha_grid: int = 64
    primal_tol: float = 1e-8
    cert_tol: float = 1e-11
    dual_tol: float = 1e-6
    rho_tol: float = 1e-4
    strict_tol: float = 1e-10
    admiss_grid: int = 256
    refine_tol: float = 1e-10
    max_iter: int = 20000
    probe_iter: int = 4000
    seed: int = 0
    audit_trials: int = 20
    audit_samples: int = 4096
    threads: int = 0

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @staticmethod
    def from_json(obj) -> "SolverConfig":
        known = {f: obj[f] for f in SolverConfig.__dataclass_fields__ if f in obj}
        return SolverConfig(**known)


def boundary_alphas(count: int) -> np.ndarray:
    thetas = np.arange(count) * (2.0 * np.pi / count)
    return np.exp(1j * thetas)


# ---------------------------------------------------------------------------
# primal: Dykstra between the PSD product cone and the affine constraint slice


@dataclass
class _PrimalOutcome:
    status: str  # "feasible" | "stalled"
    blocks: np.ndarray  # (M, n, n), PSD to machine precision
    residual: float
    iterations: int


def _dykstra(
    E: np.ndarray,
    target: np.ndarray,
    tol: float,
    max_iter: int,
    X0: np.ndarray | None = None,
    stall_window: int = 200,
    stall_factor: float = 0.995,
) -> _PrimalOutcome:
    M = E.shape[0]
    Ebar = np.conj(E)
    W = np.sum(np.abs(E) ** 2, axis=0)
    B = 1.0 / E  # entrywise inverses of the E_m: the b_alpha grams, all PSD

    X = B * (target[None, :, :] / M) if X0 is None else X0.copy()
    P = np.zeros_like(X)

    best_res = np.inf
    best_blocks = X
    history: list[float] = []
    iters = 0
    for iters in range(1, max_iter + 1):
        Y = psd_project_stack(X + P)
        P = X + P - Y
        total = np.einsum("mij,mij->ij", E, Y)
        gap = total - target
        res = frob(gap)
        if res < best_res:
            best_res = res
            best_blocks = Y
        if res <= tol:
            return _PrimalOutcome("feasible", Y, res, iters)
        history.append(best_res)
        if len(history) > stall_window:
            old = history[-stall_window - 1]
            if best_res > stall_factor * old and best_res > 10.0 * tol:
                break
        X = Y - Ebar * ((gap / W)[None, :, :])
    return _PrimalOutcome("stalled", best_blocks, best_res, iters)


def _shifted_warm_start(
    blocks: np.ndarray, E: np.ndarray, t_old: float, t_new: float
) -> np.ndarray:
    """Reuse blocks solved at t_old as a start at t_new.

    The all-ones matrix decomposes exactly as sum_m E_m o (B_m / M), so adding
    (t_new^2 - t_old^2) B_m / M keeps the affine constraint satisfied; for
    upward shifts it even keeps the blocks PSD.
    """
    M = blocks.shape[0]
    B = 1.0 / E
    return blocks + ((t_new**2 - t_old**2) / M) * B


def _compress_support(
    E: np.ndarray,
    alphas: np.ndarray,
    target: np.ndarray,
    blocks: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Shrink the certificate support greedily by block trace.

    A small support keeps the GNS space (and every later resolvent solve)
    small.  Falls back to the full support when no restricted run converges.
    """
    M, n, _ = blocks.shape
    traces = np.real(np.einsum("mii->m", blocks))
    order = np.argsort(-traces, kind="stable")
    iters_used = 0
    for size in (2 * n, 4 * n, 8 * n):
        if size >= M:
            break
        keep = np.sort(order[:size])
        out = _dykstra(E[keep], target, tol, max_iter, X0=blocks[keep])
        iters_used += out.iterations
        if out.status == "feasible":
            return alphas[keep], out.blocks, out.residual, iters_used
    out = _dykstra(E, target, tol, max_iter, X0=blocks)
    iters_used += out.iterations
    if out.status == "feasible":
        return alphas, out.blocks, out.residual, iters_used
    total = np.einsum("mij,mij->ij", E, blocks)
    return alphas, blocks, frob(total - target), iters_used


def _prune_zero_blocks(
    alphas: np.ndarray, blocks: np.ndarray, keep_tol: float = 1e-14
) -> tuple[np.ndarray, np.ndarray]:
    traces = np.real(np.einsum("mii->m", blocks))
    total = float(np.sum(traces))
    keep = traces > keep_tol * max(total, 1.0)
    if not np.any(keep):
        keep[int(np.argmax(traces))] = True
    return alphas[keep], blocks[keep]


def _build_primal_certificate(
    problem: PickProblem,
    scale: float,
    alphas: np.ndarray,
    blocks: np.ndarray,
    config: SolverConfig,
) -> tuple[DecompositionCertificate, int]:
    """Tighten, compress and package a feasible Dykstra iterate."""
    target = scaled_pick_target(problem, scale)
    tol = config.cert_tol * max(1.0, frob(target))
    E = coefficient_stack(problem.nodes, alphas)
    out = _dykstra(E, target, tol, config.max_iter, X0=blocks)
    iters = out.iterations
    alphas2, blocks2, residual, extra = _compress_support(
        E, alphas, target, out.blocks, max(tol, out.residual), config.max_iter
    )
    iters += extra
    alphas3, blocks3 = _prune_zero_blocks(alphas2, blocks2)
    E3 = coefficient_stack(problem.nodes, alphas3)
    total = np.einsum("mij,mij->ij", E3, blocks3)
    residual = frob(total - target)
    cert = DecompositionCertificate(
        alphas=alphas3,
        blocks=tuple(blocks3),
        residual=residual,
        scale=scale,
    )
    return cert, iters


# ---------------------------------------------------------------------------
# dual: log-barrier Newton minimization of the Farkas functional


@lru_cache(maxsize=16)
def _hermitian_basis(n: int) -> np.ndarray:
    """Real basis of the n x n Hermitian matrices, diagonal units first."""
    mats = []
    for i in range(n):
        m = np.zeros((n, n), dtype=complex)
        m[i, i] = 1.0
        mats.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = 1.0
            m[j, i] = 1.0
            mats.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = 1j
            m[j, i] = -1j
            mats.append(m)
    return np.stack(mats)


def _coords_of(k: np.ndarray) -> np.ndarray:
    n = k.shape[0]
    out = [np.real(k[i, i]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out.append(np.real(k[i, j]))
            out.append(np.imag(k[i, j]))
    return np.array(out)


@dataclass
class _BarrierOutcome:
    kernel: np.ndarray  # trace-normalized Hermitian kernel
    objective: float  # Farkas functional at the final central point
    gap: float  # duality-gap bound: objective - gap <= true minimum


def _barrier_min_farkas(
    T: np.ndarray,
    E_lmi: np.ndarray,
    k0: np.ndarray,
    dual_tol: float,
) -> _BarrierOutcome:
    """min sum_ij T_ij k_ij  s.t.  k >= 0, E_m o k >= 0 (grid), tr k = n.

    Standard log-det barrier with damped Newton centering.  k0 must be
    strictly feasible; (szego + identity)/2 always is, since E_m o I is a
    positive diagonal matrix.
    """
    n = T.shape[0]
    Hb = _hermitian_basis(n)
    d = Hb.shape[0]
    cons = np.concatenate([np.ones((1, n, n), dtype=complex), E_lmi], axis=0)
    A = cons[:, None, :, :] * Hb[None, :, :, :]  # (M1, d, n, n)
    M1 = cons.shape[0]
    nu = M1 * n

    lvec = np.real(np.einsum("ij,aij->a", T, Hb))
    cvec = np.real(np.einsum("aii->a", Hb))

    def F_of(x):
        return np.einsum("a,maij->mij", x, A)

    def min_eig_all(x):
        F = F_of(x)
        F = 0.5 * (F + np.conj(np.swapaxes(F, 1, 2)))
        return float(np.linalg.eigvalsh(F)[:, 0].min())

    def f_t(x, tbar):
        F = F_of(x)
        sign, logdet = np.linalg.slogdet(F)
        if np.any(np.real(sign) <= 0.5):
            return np.inf
        return tbar * float(lvec @ x) - float(np.sum(np.real(logdet)))

    x = _coords_of(k0)
    if min_eig_all(x) <= 0.0:
        # fall back to the always-strictly-feasible identity start
        x = _coords_of(np.eye(n, dtype=complex))

    ell = float(lvec @ x)
    tbar = nu / max(abs(ell), 1.0)
    gap = nu / tbar
    for _stage in range(40):
        for _newton in range(60):
            F = F_of(x)
            try:
                Finv = np.linalg.inv(F)
            except np.linalg.LinAlgError:
                break
            G = np.einsum("mij,majk->maik", Finv, A)
            grad = tbar * lvec - np.real(np.einsum("maii->a", G))
            Hm = np.real(np.einsum("maik,mbki->ab", G, G))
            kkt = np.zeros((d + 1, d + 1))
            kkt[:d, :d] = Hm + 1e-13 * np.eye(d)
            kkt[:d, d] = cvec
            kkt[d, :d] = cvec
            rhs = np.zeros(d + 1)
            rhs[:d] = -grad
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            dx = sol[:d]
            lam2 = float(dx @ Hm @ dx)
            f0 = f_t(x, tbar)
            gd = float(grad @ dx)
            step = 1.0
            for _ in range(60):
                xn = x + step * dx
                if min_eig_all(xn) > 0.0 and f_t(xn, tbar) <= f0 + 0.25 * step * gd:
                    break
                step *= 0.5
            else:
                break
            x = x + step * dx
            if lam2 / 2.0 <= 1e-11:
                break
        ell = float(lvec @ x)
        gap = nu / tbar
        if gap <= max(0.02 * abs(ell), 0.25 * n * dual_tol, 1e-12):
            break
        tbar *= 10.0
    k = np.einsum("a,aij->ij", x, Hb)
    return _BarrierOutcome(kernel=hermitize(k), objective=ell, gap=gap)


def _unit_diag_congruence(k: np.ndarray) -> np.ndarray:
    d = np.real(np.diag(k))
    scale = 1.0 / np.sqrt(np.maximum(d, 1e-300))
    return hermitize(k * scale[:, None] * scale[None, :])


def _dual_search_impl(
    problem: PickProblem,
    scale: float,
    config: SolverConfig,
    seed: int = 0,
) -> tuple[DualCertificate | None, float]:
    """Returns (certificate or None, best violation bound seen)."""
    nodes = problem.nodes
    n = problem.n
    T = scaled_pick_target(problem, scale)
    sz = normalize_diag(KernelMatrix(nodes, szego_gram(nodes))).gram
    k0 = 0.5 * (sz + np.eye(n, dtype=complex))
    k0 *= n / np.real(np.trace(k0))

    extra_alphas: list[complex] = []
    best_bound = 0.0
    for _round in range(3):
        base = boundary_alphas(config.alpha_grid)
        alphas = (
            np.concatenate([base, np.array(extra_alphas, dtype=complex)])
            if extra_alphas
            else base
        )
        E_lmi = coefficient_stack(nodes, alphas)
        out = _barrier_min_farkas(T, E_lmi, k0, config.dual_tol)
        best_bound = max(best_bound, -out.objective / n)
        if out.objective > -0.5 * n * config.dual_tol:
            # even the grid relaxation admits no usefully negative functional
            return None, best_bound
        k = _unit_diag_congruence(out.kernel)
        w, v = eigh(hermitize(T * k))
        violation = float(-w[0])
        if violation < config.dual_tol:
            return None, max(best_bound, violation)
        kernel = KernelMatrix(nodes, k)
        report = admissibility_report(
            kernel, alpha_grid=config.admiss_grid, refine_tol=config.refine_tol
        )
        if report.slack >= -1e-8:
            cert = DualCertificate(
                kernel=kernel,
                violation=violation,
                witness=v[:, 0],
                admissibility_slack=report.slack,
                scale=scale,
            )
            check = verify_dual(
                problem,
                cert,
                violation_tol=config.dual_tol,
                admiss_grid=config.admiss_grid,
                strict_tol=config.strict_tol,
            )
            if check.ok:
                return cert, max(best_bound, violation)
            return None, max(best_bound, violation)
        extra_alphas.append(report.worst_alpha)
    return None, best_bound


def dual_search(
    problem: PickProblem,
    scale: float,
    config: SolverConfig = SolverConfig(),
    seed: int = 0,
) -> DualCertificate | None:
    """Look for an admissible kernel violating the Pick condition at ``scale``.

    Returns a certificate only when the candidate passes an independent full
    admissibility sweep with slack >= -1e-8 and violation >= config.dual_tol;
    absence of a certificate is a valid answer, not an error.
    """
    cert, _ = _dual_search_impl(problem, scale, config, seed)
    return cert


# ---------------------------------------------------------------------------
# feasibility verdicts and the extremal norm


def _probe(
    problem: PickProblem,
    scale: float,
    config: SolverConfig,
    warm_blocks: tuple[float, np.ndarray] | None = None,
    budget: int | None = None,
    refine: bool = True,
):
    """Classify one scale.

    Returns ('feasible', (alphas, blocks, iters)), ('infeasible', dual_cert)
    or ('unknown', (best_primal_residual, best_dual_violation)).
    """
    target = scaled_pick_target(problem, scale)
    tol = config.primal_tol * max(1.0, frob(target))
    budget = budget or config.probe_iter
    best_primal = np.inf
    best_vio = 0.0
    grids = (config.alpha_grid, 4 * config.alpha_grid) if refine else (config.alpha_grid,)
    for M in grids:
        alphas = boundary_alphas(M)
        E = coefficient_stack(problem.nodes, alphas)
        X0 = None
        if warm_blocks is not None and warm_blocks[1].shape[0] == M:
            X0 = _shifted_warm_start(warm_blocks[1], E, warm_blocks[0], scale)
        out = _dykstra(E, target, tol, budget, X0=X0)
        if out.status == "feasible":
            return "feasible", (alphas, out.blocks, out.iterations)
        best_primal = min(best_primal, out.residual)
        dual, vio = _dual_search_impl(problem, scale, config, config.seed)
        best_vio = max(best_vio, vio)
        if dual is not None:
            return "infeasible", dual
    return "unknown", (best_primal, best_vio)


def solve_feasibility(
    problem: PickProblem, scale: float, config: SolverConfig = SolverConfig()
) -> FeasibilityVerdict:
    """Decide interpolation feasibility at ``scale`` with a certificate either way.

    Raises :class:`UndecidedError` when neither a primal decomposition nor a
    verified dual kernel is found after one alpha-grid refinement.
    """
    if scale <= 0.0:
        raise ValueError(f"scale must be positive, got {scale}")
    t0 = time.perf_counter()
    status, payload = _probe(problem, scale, config, budget=config.max_iter)
    if status == "feasible":
        alphas, blocks, iters = payload
        cert, extra = _build_primal_certificate(problem, scale, alphas, blocks, config)
        return FeasibilityVerdict(
            feasible=True,
            primal=cert,
            dual=None,
            iterations=iters + extra,
            wall_time=time.perf_counter() - t0,
        )
    if status == "infeasible":
        return FeasibilityVerdict(
            feasible=False,
            primal=None,
            dual=payload,
            iterations=0,
            wall_time=time.perf_counter() - t0,
        )
    best_primal, best_vio = payload
    raise UndecidedError(
        f"undecided at scale {scale:.8g}: primal residual {best_primal:.3e}, "
        f"best dual violation {best_vio:.3e}; widen the grid or loosen tolerances",
        best_primal,
        best_vio,
    )


@dataclass(frozen=True)
class ExtremalResult:
    """Extremal norm with two-sided certificates.

    ``rho`` is the smallest scale certified feasible (upper bracket end of the
    bisection); the primal certificate sits at rho(1 + 10 rho_tol) and the
    near-extremal dual kernel, when the search converges, at
    rho(1 - 10 rho_tol).
    """

    rho: float
    certificate_at_rho_plus: DecompositionCertificate
    extremal_kernel: DualCertificate | None
    warnings: tuple[str, ...]
    iterations: int

    def to_json(self) -> dict:
        return {
            "rho": self.rho,
            "warnings": list(self.warnings),
            "iterations": self.iterations,
            "certificate_at_rho_plus": self.certificate_at_rho_plus.to_json(),
            "extremal_kernel": (
                self.extremal_kernel.to_json() if self.extremal_kernel else None
            ),
        }


def _zero_data_result(problem: PickProblem) -> ExtremalResult:
    cert = DecompositionCertificate(
        alphas=np.array([1.0 + 0.0j]),
        blocks=(np.zeros((problem.n, problem.n), dtype=complex),),
        residual=0.0,
        scale=0.0,
    )
    return ExtremalResult(
        rho=0.0,
        certificate_at_rho_plus=cert,
        extremal_kernel=None,
        warnings=(),
        iterations=0,
    )


def extremal_norm(
    problem: PickProblem, config: SolverConfig = SolverConfig()
) -> ExtremalResult:
    """Bisection on the certified feasibility predicate.

    The bracket is genuinely two-sided: 'feasible' moves come with primal
    decompositions (true upper bounds via the realization) and 'infeasible'
    moves only ever come from fully verified admissible kernels (true lower
    bounds), so the returned interval always contains the extremal norm.
    """
    w = problem.targets
    if np.all(np.abs(w) == 0.0):
        return _zero_data_result(problem)

    warnings: list[str] = []
    iterations = 0
    lo = float(np.max(np.abs(w)))
    warm: tuple[float, np.ndarray] | None = None

    status, payload = _probe(problem, lo, config)
    if status == "feasible":
        hi = lo
        alphas, blocks, iters = payload
        warm = (lo, blocks)
        iterations += iters
    else:
        if status == "unknown":
            warnings.append(f"probe undecided at bracket start {lo:.8g}")
        hi = max(1.0, 1.25 * lo)
        for _ in range(60):
            status, payload = _probe(problem, hi, config, warm_blocks=warm)
            if status == "feasible":
                alphas, blocks, iters = payload
                warm = (hi, blocks)
                iterations += iters
                break
            hi *= 2.0
        else:
            raise UndecidedError(
                f"no feasible scale found after 60 doublings (last tried {hi:.3e})",
                np.inf,
                0.0,
            )
        while hi - lo > config.rho_tol * hi:
            mid = 0.5 * (lo + hi)
            status, payload = _probe(problem, mid, config, warm_blocks=warm)
            if status == "feasible":
                alphas, blocks, iters = payload
                warm = (mid, blocks)
                iterations += iters
                hi = mid
            elif status == "infeasible":
                lo = mid
            else:
                warnings.append(f"probe undecided at {mid:.8g}; stopping bisection early")
                break

    rho = hi
    if abs(rho - 1.0) < config.rho_tol:
        warnings.append("rho within rho_tol of 1: open vs closed unit ball undecidable")

    eps = 10.0 * config.rho_tol
    t_plus = rho * (1.0 + eps)
    status, payload = _probe(
        problem, t_plus, config, warm_blocks=warm, budget=config.max_iter
    )
    if status != "feasible":
        raise UndecidedError(
            f"could not reproduce feasibility at rho(1+eps) = {t_plus:.8g}", np.inf, 0.0
        )
    alphas, blocks, iters = payload
    iterations += iters
    cert_plus, extra = _build_primal_certificate(problem, t_plus, alphas, blocks, config)
    iterations += extra

    t_minus = rho * (1.0 - eps)
    extremal_kernel = None
    if t_minus > 0.0:
        extremal_kernel = dual_search(problem, t_minus, config, seed=config.seed)

    return ExtremalResult(
        rho=rho,
        certificate_at_rho_plus=cert_plus,
        extremal_kernel=extremal_kernel,
        warnings=tuple(warnings),
        iterations=iterations,
    )


def feasible_certificate_at(
    problem: PickProblem,
    scale: float,
    config: SolverConfig = SolverConfig(),
    warm: tuple[float, np.ndarray] | None = None,
) -> DecompositionCertificate:
    """Certificate-grade decomposition at a scale known (or expected) to be feasible."""
    status, payload = _probe(
        problem, scale, config, warm_blocks=warm, budget=config.max_iter
    )
    if status != "feasible":
        raise UndecidedError(f"no primal certificate at scale {scale:.8g}", np.inf, 0.0)
    alphas, blocks, _ = payload
    cert, _ = _build_primal_certificate(problem, scale, alphas, blocks, config)
    return cert
