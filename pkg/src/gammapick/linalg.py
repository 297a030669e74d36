"""Dense complex-Hermitian matrix substrate.

Everything downstream (kernel cones, the feasibility solver, realizations)
reduces to Hermitian eigendecompositions, PSD projection/factorization and
generalized-pencil extremes of matrices no larger than a few hundred rows, so
plain LAPACK via numpy is the right backend.  All functions are pure and all
inputs are treated as immutable.
"""

from __future__ import annotations

import numpy as np

from .errors import LinalgError, NotPSDError

DEFAULT_TOL = 1e-10


def hermitize(a: np.ndarray) -> np.ndarray:
    """Exact Hermitian average (a + a*)/2; storage-level symmetry enforcement."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    return float(np.abs(a - a.conj().T).max(initial=0.0)) <= tol * scale


def frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))


def eigh(m: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors unitary (columns).  Raises :class:`LinalgError` if the input
    is not Hermitian or LAPACK fails to converge.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise LinalgError(f"eigh expects a square matrix, got shape {m.shape}")
    if not is_hermitian(m):
        dev = float(np.abs(m - m.conj().T).max())
        raise LinalgError(f"eigh expects a Hermitian matrix (deviation {dev:.3e})")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        residual = frob(m)
        raise LinalgError(f"eigendecomposition did not converge (norm {residual:.3e}): {exc}") from exc
    return w, v


def eigh_stack(ms: np.ndarray):
    """Batched eigh over a (..., n, n) stack; no validation (internal hot path)."""
    return np.linalg.eigh(ms)


def psd_project(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: eigenvalue clipping at zero."""
    w, v = eigh(m)
    w = np.maximum(w, 0.0)
    return hermitize((v * w) @ v.conj().T)


def psd_project_stack(ms: np.ndarray) -> np.ndarray:
    """Batched PSD projection of a (..., n, n) Hermitian stack."""
    w, v = np.linalg.eigh(ms)
    w = np.maximum(w, 0.0)
    out = np.einsum("...ik,...k,...jk->...ij", v, w, v.conj())
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))


def min_eig(m: np.ndarray) -> float:
    w, _ = eigh(m)
    return float(w[0])


def psd_factor(m: np.ndarray, rank_tol: float = DEFAULT_TOL) -> np.ndarray:
    """Gram factor L with L L* = m, m PSD up to rank_tol.

    Eigenvalues below ``rank_tol * lambda_max`` count as zero, so L has
    dim x r columns with r the numerical rank.  Raises :class:`NotPSDError`
    when the smallest eigenvalue dips below ``-rank_tol``.
    """
    w, v = eigh(m)
    lam_min = float(w[0])
    if lam_min < -rank_tol:
        raise NotPSDError(
            f"matrix is not PSD within tolerance {rank_tol:.3e}: lambda_min = {lam_min:.6e}",
            lam_min,
        )
    lam_max = float(w[-1])
    cutoff = rank_tol * max(lam_max, 0.0)
    keep = w > cutoff
    L = v[:, keep] * np.sqrt(np.maximum(w[keep], 0.0))
    return L


def pencil_max(a: np.ndarray, b: np.ndarray) -> float:
    """Largest generalized eigenvalue of the Hermitian pencil (a, b), b > 0.

    Equals ``lambda_max(b^{-1/2} a b^{-1/2})``, the supremum of
    (x* a x)/(x* b x) over nonzero x.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise LinalgError(f"pencil_max shape mismatch: {a.shape} vs {b.shape}")
    wb, vb = eigh(b)
    lam_min_b = float(wb[0])
    if lam_min_b <= 0.0:
        raise NotPSDError(
            f"pencil_max needs b strictly positive definite: lambda_min = {lam_min_b:.6e}",
            lam_min_b,
        )
    inv_sqrt = (vb / np.sqrt(wb)) @ vb.conj().T
    whitened = hermitize(inv_sqrt @ a @ inv_sqrt)
    w, _ = eigh(whitened)
    return float(w[-1])
