"""Maslov index of transverse boundary triples.

The index of (p1, p2, p3) is computed by moving (p1, p3) to (0, infinity)
with a symplectic element and taking the signature of the image of p2.  The
orientation is pinned by beta(0, I_k, inf) = 2k - n where I_k is the
diagonal matrix with k entries +1 and n - k entries -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotMaximal, NotTransverse
from .matcore import DEFAULT_TOL, Tolerance, factor_signature, signature
from .symplectic import (
    BoundaryPoint,
    SpMat,
    diag_symplectic,
    moebius_act,
    shear_symplectic,
    swap_symplectic,
    translation_symplectic,
    transverse,
)

__all__ = [
    "Triple",
    "indefinite_identity",
    "normalize_pair",
    "maslov",
    "is_maximal",
    "normalize_maximal_triple",
]


def indefinite_identity(n: int, k: int) -> np.ndarray:
    """diag(1_k, -1_{n-k})."""
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}")
    return np.diag(np.concatenate([np.ones(k), -np.ones(n - k)]))


@dataclass(frozen=True, eq=False)
class Triple:
    """Three pairwise transverse boundary points."""

    p1: BoundaryPoint
    p2: BoundaryPoint
    p3: BoundaryPoint

    def __post_init__(self):
        pts = (self.p1, self.p2, self.p3)
        for i in range(3):
            for j in range(i + 1, 3):
                if not transverse(pts[i], pts[j]):
                    raise NotTransverse(f"points {i + 1} and {j + 1} are not transverse")

    def points(self) -> tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint]:
        return (self.p1, self.p2, self.p3)


def normalize_pair(p1: BoundaryPoint, p3: BoundaryPoint,
                   tol: Tolerance = DEFAULT_TOL) -> SpMat:
    """A symplectic g with g.p1 = 0 and g.p3 = infinity.

    Built from at most three elementary moves: a swap if p1 is infinite, a
    translation taking p1 to 0, and a shear X -> X(WX+I)^{-1} killing the
    image of p3.
    """
    if not transverse(p1, p3, tol):
        raise NotTransverse("cannot normalize a non-transverse pair")
    if p1.is_infinity:
        n = p3.value.shape[0]
        g = swap_symplectic(n)
    else:
        n = p1.value.shape[0]
        g = translation_symplectic(-p1.value, tol)
    q3 = moebius_act(g, p3, tol)
    if not q3.is_infinity:
        # q3 is invertible because it is transverse to 0
        g = shear_symplectic(-np.linalg.inv(q3.value), tol) @ g
    return g


def maslov(t: Triple, tol: Tolerance = DEFAULT_TOL) -> int:
    """The Maslov index, an integer in [-n, n] of the same parity as n."""
    g = normalize_pair(t.p1, t.p3, tol)
    q2 = moebius_act(g, t.p2, tol)
    if q2.is_infinity:
        raise NotTransverse("middle point maps to infinity under normalization")
    return signature(q2.value, tol)


def is_maximal(t: Triple, tol: Tolerance = DEFAULT_TOL) -> bool:
    n = next(p.value.shape[0] for p in t.points() if not p.is_infinity)
    return maslov(t, tol) == n


def normalize_maximal_triple(t: Triple, tol: Tolerance = DEFAULT_TOL) -> SpMat:
    """An h taking a maximal triple to the standard triple (0, e, inf).

    After normalizing the outer pair, the middle point is positive definite;
    conjugating by diag(M^{-1}, M^T) with its Cholesky factor M finishes.
    """
    g = normalize_pair(t.p1, t.p3, tol)
    q2 = moebius_act(g, t.p2, tol)
    if q2.is_infinity:
        raise NotTransverse("middle point maps to infinity under normalization")
    n = q2.value.shape[0]
    m, k = factor_signature(q2.value, tol)
    if k != n:
        raise NotMaximal(f"triple has index {2 * k - n}, expected {n}")
    return diag_symplectic(np.linalg.inv(m)) @ g
