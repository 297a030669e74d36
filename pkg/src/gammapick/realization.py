"""Colligations: from decomposition certificates to evaluable interpolants.

A certificate at scale t gives PSD blocks Gamma_m over boundary alphas with

    t^2 - w_i conj(w_j) = sum_m (1 - phi_m(i) conj(phi_m(j))) Gamma_m(i, j).

Dividing by t^2 and Gram-factoring the rescaled blocks (GNS step) produces
node embeddings h_i with

    1 + <Z_i h_i, Z_j h_j> = (w_i/t) conj(w_j/t) + <h_i, h_j>,

Z_i = blockdiag(phi_m(i) I_{r_m}).  The two families therefore have equal
Grams and a unitary V = [[A, B], [C, D]] can map (1, Z_i h_i) to (w_i/t, h_i);
its transfer function A + B Z (I - D Z)^{-1} C is a unit-ball holomorphic
function interpolating the normalized targets.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import jsonio
from .certificates import DecompositionCertificate, PickProblem
from .errors import CertificateError, DomainError, LinalgError
from .geometry import GPoint, sample_g
from .kernels import NodeSet, phi_matrix
from .linalg import frob, hermitize, psd_factor


@dataclass(frozen=True)
class Colligation:
    """Block unitary V = [[A, B], [C, D]] plus the alpha support it acts over."""

    alphas: np.ndarray
    block_dims: tuple[int, ...]
    A: complex
    B: np.ndarray  # row vector (dim,)
    C: np.ndarray  # column vector (dim,)
    D: np.ndarray  # (dim, dim)
    isometry_defect: float
    map_defect: float = 0.0

    def __post_init__(self):
        dim = int(sum(self.block_dims))
        if self.B.shape != (dim,) or self.C.shape != (dim,) or self.D.shape != (dim, dim):
            raise ValueError("colligation block shapes are inconsistent with block_dims")
        if not (self.isometry_defect <= 1e-8):
            raise ValueError(
                f"colligation is not an isometry: defect {self.isometry_defect:.3e}"
            )

    @property
    def state_dim(self) -> int:
        return int(sum(self.block_dims))

    def to_json(self) -> dict:
        return {
            "alphas": jsonio.cvector_to_pairs(self.alphas),
            "block_dims": list(self.block_dims),
            "A": jsonio.complex_to_pair(self.A),
            "B": jsonio.cvector_to_pairs(self.B),
            "C": jsonio.cvector_to_pairs(self.C),
            "D": jsonio.cmatrix_to_rowmajor(self.D),
            "isometry_defect": self.isometry_defect,
            "map_defect": self.map_defect,
        }

    @staticmethod
    def from_json(obj) -> "Colligation":
        dims = tuple(int(d) for d in obj["block_dims"])
        dim = int(sum(dims))
        return Colligation(
            alphas=jsonio.pairs_to_cvector(obj["alphas"]),
            block_dims=dims,
            A=jsonio.pair_to_complex(obj["A"]),
            B=jsonio.pairs_to_cvector(obj["B"]),
            C=jsonio.pairs_to_cvector(obj["C"]),
            D=jsonio.rowmajor_to_cmatrix(obj["D"], dim, dim),
            isometry_defect=float(obj["isometry_defect"]),
            map_defect=float(obj.get("map_defect", 0.0)),
        )


@dataclass(frozen=True)
class RealizedFunction:
    """A realized interpolant: unit-ball transfer function times ``scale``."""

    colligation: Colligation
    scale: float
    norm_audit_result: tuple[int, float] | None = None

    def to_json(self) -> dict:
        out = {
            "colligation": self.colligation.to_json(),
            "scale": self.scale,
        }
        if self.norm_audit_result is not None:
            out["norm_audit"] = {
                "grid_size": self.norm_audit_result[0],
                "observed_sup": self.norm_audit_result[1],
            }
        return out

    @staticmethod
    def from_json(obj) -> "RealizedFunction":
        audit = obj.get("norm_audit")
        return RealizedFunction(
            colligation=Colligation.from_json(obj["colligation"]),
            scale=float(obj["scale"]),
            norm_audit_result=(
                (int(audit["grid_size"]), float(audit["observed_sup"]))
                if audit
                else None
            ),
        )


def gns_vectors(
    cert: DecompositionCertificate, nodes: NodeSet, rank_tol: float = 1e-10
) -> tuple[list[np.ndarray], np.ndarray]:
    """Gram factors L_m of the certificate blocks and stacked node embeddings.

    Row i of the returned (n, sum r_m) matrix is the embedding h_i; its Gram
    reproduces sum_m Gamma_m entrywise.
    """
    n = len(nodes)
    factors: list[np.ndarray] = []
    for idx, block in enumerate(cert.blocks):
        try:
            factors.append(psd_factor(block, rank_tol))
        except Exception as exc:
            raise CertificateError(f"block {idx} failed Gram factorization: {exc}") from exc
    if factors:
        h = np.hstack([L if L.size else np.zeros((n, 0), dtype=complex) for L in factors])
    else:
        h = np.zeros((n, 0), dtype=complex)
    return factors, h


def build_colligation(
    problem: PickProblem,
    cert: DecompositionCertificate,
    gram_tol: float = 1e-6,
    rank_cutoff: float = 1e-10,
) -> Colligation:
    """Lurking-isometry construction from a decomposition certificate.

    Orthonormalizes the families u_i = (1, Z_i h_i) and v_i = (w_i/t, h_i) by
    SVD with a relative rank cutoff, matches coordinates by orthogonal
    Procrustes and completes both bases to a unitary on the whole space.
    """
    t = cert.scale
    if t <= 0.0:
        raise CertificateError("build_colligation needs a certificate at positive scale")
    w_hat = problem.targets / t
    blocks_hat = tuple(b / (t * t) for b in cert.blocks)
    cert_hat = DecompositionCertificate(
        alphas=cert.alphas, blocks=blocks_hat, residual=cert.residual / (t * t), scale=1.0
    )
    factors, h = gns_vectors(cert_hat, problem.nodes, rank_tol=max(rank_cutoff, 1e-13))
    dims = tuple(L.shape[1] for L in factors)
    keep = [m for m, r in enumerate(dims) if r > 0]
    alphas = cert.alphas[keep]
    factors = [factors[m] for m in keep]
    dims = tuple(L.shape[1] for L in factors)
    R = int(sum(dims))
    n = problem.n

    phi_vals = phi_matrix(problem.nodes, alphas) if R else np.zeros((0, n), dtype=complex)
    # z_i: the diagonal of Z at node i, phi_m(i) repeated r_m times
    if R:
        z_nodes = np.concatenate(
            [np.repeat(phi_vals[m_idx, :].reshape(1, n), dims[m_idx], axis=0) for m_idx in range(len(dims))],
            axis=0,
        ).T  # (n, R)
        h = np.hstack([L for L in factors])
    else:
        z_nodes = np.zeros((n, 0), dtype=complex)
        h = np.zeros((n, 0), dtype=complex)

    U = np.vstack([np.ones((1, n), dtype=complex), (z_nodes * h).T])  # (1+R, n)
    Vv = np.vstack([w_hat.reshape(1, n), h.T])

    gram_u = U.conj().T @ U
    gram_v = Vv.conj().T @ Vv
    gram_err = np.abs(gram_u - gram_v)
    worst = np.unravel_index(int(np.argmax(gram_err)), gram_err.shape)
    if gram_err[worst] > gram_tol:
        raise CertificateError(
            f"Gram mismatch {gram_err[worst]:.3e} at node pair {tuple(int(x) for x in worst)}; "
            "certificate residual is too loose for realization"
        )

    dim = 1 + R
    qu, su, _ = np.linalg.svd(U, full_matrices=True)
    qv, sv, _ = np.linalg.svd(Vv, full_matrices=True)
    smax = max(float(su[0]) if su.size else 0.0, float(sv[0]) if sv.size else 0.0, 1e-30)
    r = max(
        int(np.sum(su > rank_cutoff * smax)),
        int(np.sum(sv > rank_cutoff * smax)),
    )
    r = min(r, dim, n)
    a_coords = qu[:, :r].conj().T @ U  # (r, n)
    b_coords = qv[:, :r].conj().T @ Vv
    # orthogonal Procrustes: unitary Omega minimizing |Omega a - b|_F
    m_small = b_coords @ a_coords.conj().T
    uu, _, vvh = np.linalg.svd(m_small)
    omega = uu @ vvh
    V_full = qv[:, :r] @ omega @ qu[:, :r].conj().T + qv[:, r:] @ qu[:, r:].conj().T

    defect = float(np.linalg.norm(V_full.conj().T @ V_full - np.eye(dim), 2))
    map_defect = float(np.abs(V_full @ U - Vv).max()) if n else 0.0

    return Colligation(
        alphas=alphas,
        block_dims=dims,
        A=complex(V_full[0, 0]),
        B=V_full[0, 1:].copy(),
        C=V_full[1:, 0].copy(),
        D=V_full[1:, 1:].copy(),
        isometry_defect=defect,
        map_defect=map_defect,
    )


def realize(problem: PickProblem, cert: DecompositionCertificate) -> RealizedFunction:
    return RealizedFunction(build_colligation(problem, cert), scale=cert.scale)


def _z_diagonal(col: Colligation, points: list[GPoint]) -> np.ndarray:
    """Diagonals of Z(x) for a batch of points, shape (batch, state_dim)."""
    if col.state_dim == 0:
        return np.zeros((len(points), 0), dtype=complex)
    s = np.array([pt.s for pt in points], dtype=complex)
    p = np.array([pt.p for pt in points], dtype=complex)
    a = col.alphas.reshape(-1, 1)
    phis = (2.0 * a * p[None, :] - s[None, :]) / (2.0 - a * s[None, :])  # (M, batch)
    reps = np.repeat(np.arange(len(col.block_dims)), col.block_dims)
    return phis[reps, :].T  # (batch, R)


def evaluate_many(fn: RealizedFunction, points: list[GPoint], chunk: int = 512) -> np.ndarray:
    """Unit-ball transfer-function values at a batch of interior points."""
    col = fn.colligation
    R = col.state_dim
    if R == 0:
        return np.full(len(points), complex(col.A), dtype=complex)
    out = np.empty(len(points), dtype=complex)
    eye = np.eye(R, dtype=complex)
    for start in range(0, len(points), chunk):
        batch = points[start : start + chunk]
        z = _z_diagonal(col, batch)  # (b, R)
        zmax = np.abs(z).max(axis=1)
        # |D| <= 1 for a unitary colligation, so (1+zmax)/(1-zmax) bounds the
        # resolvent conditioning; reject points too close to the boundary.
        bad = zmax >= 1.0 - 2e-12
        if np.any(bad):
            raise LinalgError(
                "resolvent conditioning exceeds 1e12 at a sample too close to the boundary"
            )
        mats = eye[None, :, :] - col.D[None, :, :] * z[:, None, :]
        rhs = np.broadcast_to(col.C[:, None], (len(batch), R, 1))
        ys = np.linalg.solve(mats, rhs)[:, :, 0]
        out[start : start + len(batch)] = col.A + np.einsum("j,bj->b", col.B, z * ys)
    return out


def evaluate(fn: RealizedFunction, x: GPoint) -> complex:
    """A + B Z(x) (I - D Z(x))^{-1} C; the resolvent exists since |Z(x)| < 1."""
    return complex(evaluate_many(fn, [x])[0])


def evaluate_scaled(fn: RealizedFunction, x: GPoint) -> complex:
    """The user-facing interpolant value scale * f(x)."""
    return fn.scale * evaluate(fn, x)


def norm_audit(fn: RealizedFunction, samples: int, seed: int) -> float:
    """Monte-Carlo lower bound of the unit-ball sup norm over seeded samples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = sample_g(samples, seed)
    vals = evaluate_many(fn, pts)
    return float(np.abs(vals).max())


def with_audit(fn: RealizedFunction, samples: int, seed: int) -> RealizedFunction:
    observed = norm_audit(fn, samples, seed)
    return replace(fn, norm_audit_result=(samples, observed))
