"""Hardy-space cross-checks, executable rather than proved.

Two facts are exercised numerically: the antisymmetric bidisk kernel agrees
with the Szego kernel of the symmetrized bidisk through the symmetrization
map,

    antisym(z, w) = 1/2 (z1 - z2) conj(w1 - w2) szego(pi(z), pi(w)),

(the 1/2 absorbing the Jacobian normalization), and the normalized Szego Gram
over any finite node set passes the admissibility sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import gpoint, symmetrize
from .kernels import (
    KernelMatrix,
    NodeSet,
    admissibility_report,
    normalize_diag,
    szego_gram,
)


@dataclass(frozen=True)
class HardyCheckReport:
    samples: int
    max_identity_error: float
    admissibility_min_eig: float
    node_set_sizes: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "max_identity_error": self.max_identity_error,
            "admissibility_min_eig": self.admissibility_min_eig,
            "node_set_sizes": list(self.node_set_sizes),
        }

    @property
    def ok(self) -> bool:
        return (
            self.max_identity_error <= 1e-10
            and self.admissibility_min_eig >= -1e-9
        )


def _disk(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return r * np.exp(1j * theta)


def kernel_identity_check(
    samples: int, seed: int, radius: float = 0.95
) -> HardyCheckReport:
    """Max error of the antisym/Szego identity over seeded bidisk pairs.

    Every tenth sample is forced near the diagonal z1 = z2, where both sides
    vanish linearly; below magnitude 1e-8 the comparison switches to absolute
    error to avoid dividing by a vanishing reference.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    z1 = _disk(rng, samples, radius)
    z2 = _disk(rng, samples, radius)
    w1 = _disk(rng, samples, radius)
    w2 = _disk(rng, samples, radius)
    near = np.arange(samples) % 10 == 9
    z2 = np.where(near, z1 + 1e-7 * np.exp(1j * rng.uniform(0, 2 * np.pi, samples)), z2)

    left = (z1 - z2) * np.conj(w1 - w2)
    for zi in (z1, z2):
        for wj in (w1, w2):
            left = left / (1.0 - zi * np.conj(wj))
    left = left / 2.0

    s1 = z1 + z2
    p1 = z1 * z2
    s2c = np.conj(w1 + w2)
    p2c = np.conj(w1 * w2)
    den = (1.0 - p1 * p2c) ** 2 - (s1 - s2c * p1) * (s2c - s1 * p2c)
    right = 0.5 * (z1 - z2) * np.conj(w1 - w2) / den

    scale = np.maximum(np.abs(left), np.abs(right))
    diff = np.abs(left - right)
    err = np.where(scale < 1e-8, diff, diff / np.maximum(scale, 1e-300))
    return HardyCheckReport(
        samples=samples,
        max_identity_error=float(err.max()),
        admissibility_min_eig=0.0,
        node_set_sizes=(),
    )


def szego_admissibility_check(
    node_sets: int, max_n: int, seed: int
) -> HardyCheckReport:
    """Admissibility sweep of the normalized Szego Gram over random node sets."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    rng = np.random.default_rng(seed)
    worst = np.inf
    sizes = []
    for idx in range(node_sets):
        n = int(rng.integers(1, max_n + 1))
        pts = []
        while len(pts) < n:
            z1, z2 = _disk(rng, 2, 0.97)
            try:
                cand = gpoint(*symmetrize(complex(z1), complex(z2)))
                trial = NodeSet(tuple(pts + [cand]))
            except ValueError:
                continue
            pts.append(cand)
        nodes = NodeSet(tuple(pts))
        k = normalize_diag(KernelMatrix(nodes, szego_gram(nodes)))
        report = admissibility_report(k)
        worst = min(worst, report.slack)
        sizes.append(n)
    return HardyCheckReport(
        samples=0,
        max_identity_error=0.0,
        admissibility_min_eig=float(worst),
        node_set_sizes=tuple(sizes),
    )


def combined_check(
    samples: int, node_sets: int, max_n: int, seed: int
) -> HardyCheckReport:
    ident = kernel_identity_check(samples, seed)
    admiss = szego_admissibility_check(node_sets, max_n, seed + 1)
    return HardyCheckReport(
        samples=samples,
        max_identity_error=ident.max_identity_error,
        admissibility_min_eig=admiss.admissibility_min_eig,
        node_set_sizes=admiss.node_set_sizes,
    )
