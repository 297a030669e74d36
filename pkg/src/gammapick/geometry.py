"""The open symmetrized bidisk as a computational domain.

The domain is G = { (z1 + z2, z1 z2) : |z1| < 1, |z2| < 1 }, coordinatized by
the sum s and product p of a pair of unit-disk points.  Membership is decided
through the parametrized coordinate functions

    phi(alpha, s, p) = (2 alpha p - s) / (2 - alpha s),   |alpha| <= 1:

(s, p) lies in G exactly when |phi(alpha, s, p)| < 1 for every alpha in the
closed unit disk.  Since phi is holomorphic in alpha on a neighbourhood of the
closed disk whenever |s| < 2, the supremum is attained on |alpha| = 1 and the
membership test is a one-dimensional boundary search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GPoint:
    """A certified interior point of the symmetrized bidisk.

    ``margin`` is 1 - sup_{|alpha|<=1} |phi(alpha, s, p)|, strictly positive
    for interior points.
    """

    s: complex
    p: complex
    margin: float

    def __post_init__(self):
        if not (self.margin > 0.0):
            raise DomainError(
                f"GPoint requires a positive membership margin, got {self.margin:.3e}"
            )
        if not (abs(self.s) < 2.0 and abs(self.p) < 1.0):
            raise DomainError(
                f"GPoint requires |s| < 2 and |p| < 1, got |s| = {abs(self.s):.6f}, "
                f"|p| = {abs(self.p):.6f}"
            )

    def coords(self) -> tuple[complex, complex]:
        return (self.s, self.p)


def symmetrize(z1: complex, z2: complex) -> tuple[complex, complex]:
    """Symmetrization map (z1, z2) -> (z1 + z2, z1 * z2)."""
    z1 = complex(z1)
    z2 = complex(z2)
    return (z1 + z2, z1 * z2)


def phi(alpha: complex, s: complex, p: complex) -> complex:
    """Parametrized coordinate function (2 alpha p - s) / (2 - alpha s)."""
    alpha = complex(alpha)
    s = complex(s)
    p = complex(p)
    den = 2.0 - alpha * s
    if abs(den) < 1e-14:
        raise DomainError(
            f"phi denominator 2 - alpha*s vanished (|den| = {abs(den):.3e}); "
            "the point is outside the closure of G or |alpha| > 1"
        )
    return (2.0 * alpha * p - s) / den


def _phi_on_circle(thetas: np.ndarray, s: complex, p: complex) -> np.ndarray:
    alphas = np.exp(1j * thetas)
    return (2.0 * alphas * p - s) / (2.0 - alphas * s)


def _abs_phi_theta(theta: float, s: complex, p: complex) -> float:
    alpha = complex(np.cos(theta), np.sin(theta))
    return abs((2.0 * alpha * p - s) / (2.0 - alpha * s))


def sup_phi(
    s: complex, p: complex, refine_tol: float = 1e-10, initial_grid: int = 1024
) -> tuple[float, complex]:
    """Supremum of |phi(alpha, s, p)| over the closed alpha-disk, with witness.

    By the maximum-modulus principle (phi is holomorphic in alpha past the
    closed disk when |s| < 2) the supremum sits on |alpha| = 1, so we scan the
    circle densely and refine the best angle by golden-section search.
    """
    s = complex(s)
    p = complex(p)
    if abs(s) >= 2.0:
        raise DomainError(f"sup_phi requires |s| < 2, got |s| = {abs(s):.6f}")
    thetas = np.arange(initial_grid) * (TWO_PI / initial_grid)
    vals = np.abs(_phi_on_circle(thetas, s, p))
    best = int(np.argmax(vals))
    step = TWO_PI / initial_grid
    lo = thetas[best] - step
    hi = thetas[best] + step

    # Golden-section on -|phi|; the modulus is smooth in theta so ~60
    # iterations push the bracket far below any practical refine_tol.
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = _abs_phi_theta(c, s, p)
    fd = _abs_phi_theta(d, s, p)
    for _ in range(60):
        if b - a < 1e-13:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = _abs_phi_theta(c, s, p)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = _abs_phi_theta(d, s, p)
    theta_star = c if fc >= fd else d
    val_star = max(fc, fd)
    grid_best = float(vals[best])
    if grid_best > val_star:
        theta_star = float(thetas[best])
        val_star = grid_best
    witness = complex(np.cos(theta_star), np.sin(theta_star))
    return float(val_star), witness


def is_member(s: complex, p: complex, refine_tol: float = 1e-10) -> tuple[bool, float]:
    """Membership in G with margin 1 - sup|phi|.

    Classification is strict (no tolerance slack); callers apply their own
    slack to the margin.  For |s| >= 2 the phi family has a pole on the closed
    alpha-disk, so the point is reported as a non-member with margin -inf.
    """
    s = complex(s)
    p = complex(p)
    if abs(s) >= 2.0:
        return False, float("-inf")
    sup, _ = sup_phi(s, p, refine_tol)
    member = sup < 1.0
    return member, 1.0 - sup


def gpoint(s: complex, p: complex, refine_tol: float = 1e-10) -> GPoint:
    """Certified construction of an interior point; raises DomainError outside G."""
    member, margin = is_member(s, p, refine_tol)
    if not member:
        raise DomainError(
            f"({s}, {p}) is not in the open symmetrized bidisk (margin {margin:.6e})"
        )
    return GPoint(complex(s), complex(p), margin)


def _disk_points(rng: np.random.Generator, count: int) -> np.ndarray:
    # radius sqrt(uniform) x uniform angle: area-uniform on the disk
    r = np.sqrt(rng.uniform(0.0, 1.0, size=count))
    theta = rng.uniform(0.0, TWO_PI, size=count)
    return r * np.exp(1j * theta)


def sample_g(count: int, seed: int) -> list[GPoint]:
    """Deterministic area-uniform pushforward samples of G.

    Draws (z1, z2) uniformly from the open unit disk and symmetrizes; every
    output is a certified member.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    z1 = _disk_points(rng, count)
    z2 = _disk_points(rng, count)
    out = []
    for a, b in zip(z1, z2):
        s, p = symmetrize(complex(a), complex(b))
        out.append(gpoint(s, p))
    return out
