"""Dense real matrix kernels with explicit tolerance bands.

All higher modules funnel their numerics through here: symmetric signatures,
spectral classification against the unit circle, the discrete Stein equation
A^T P A - P = Q, similarity witnesses, and indefinite square-root factors.

Matrices are plain float64 ``numpy`` arrays.  Comparisons are relative with
floor one: ``|a - b| <= tol * max(1, |a|, |b|)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NearSingular, ResonantSpectrum, Singular

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "CircleClass",
    "as_matrix",
    "norm_inf",
    "rel_bound",
    "check_finite",
    "sym_part",
    "is_symmetric",
    "require_symmetric",
    "require_invertible",
    "smallest_singular_value",
    "signature",
    "spectral_radius",
    "circle_class",
    "stein_solve",
    "similarity_witness",
    "factor_signature",
]


@dataclass(frozen=True)
class Tolerance:
    """Tolerance bands shared across the library.

    eq_tol            relative comparison tolerance,
    series_tol        convergence/residual tolerance for linear matrix
                      equations (must not exceed eq_tol),
    unit_circle_band  half-width of the band around |lambda| = 1 used when
                      classifying spectra.
    """

    eq_tol: float = 1e-9
    series_tol: float = 1e-12
    unit_circle_band: float = 1e-8

    def __post_init__(self):
        if not (self.eq_tol > 0 and self.series_tol > 0 and self.unit_circle_band > 0):
            raise ValueError("all tolerances must be strictly positive")
        if self.series_tol > self.eq_tol:
            raise ValueError("series_tol must not exceed eq_tol")


DEFAULT_TOL = Tolerance()


class CircleClass(enum.Enum):
    CONTRACTING = "contracting"
    HAS_UNIT_MODULUS_EIGENVALUE = "has_unit_modulus_eigenvalue"
    EXPANDING = "expanding"
    MIXED = "mixed"


def as_matrix(x) -> np.ndarray:
    """Coerce scalars / nested lists to a square float64 matrix."""
    m = np.atleast_2d(np.asarray(x, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def norm_inf(m) -> float:
    """Largest absolute entry (the norm used in all residual bounds)."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def rel_bound(tol: float, *values) -> float:
    """Return tol * max(1, |values|...) where values may be matrices."""
    scale = 1.0
    for v in values:
        scale = max(scale, norm_inf(v))
    return tol * scale


def check_finite(m: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def sym_part(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def is_symmetric(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> bool:
    return norm_inf(m - m.T) <= rel_bound(tol.eq_tol, m)


def require_symmetric(m, tol: Tolerance = DEFAULT_TOL, what: str = "matrix") -> np.ndarray:
    """Validate symmetry within tolerance and return the symmetrised copy."""
    m = as_matrix(m)
    check_finite(m)
    if not is_symmetric(m, tol):
        raise ValueError(f"{what} is not symmetric within tolerance "
                         f"(defect {norm_inf(m - m.T):.3e})")
    return sym_part(m)


def smallest_singular_value(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[-1]) if s.size else 0.0


def require_invertible(m, tol: Tolerance = DEFAULT_TOL, what: str = "matrix") -> np.ndarray:
    m = as_matrix(m)
    check_finite(m)
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= tol.eq_tol * max(1.0, s[0]):
        raise Singular(f"{what} is singular within tolerance "
                       f"(sigma_min = {s[-1]:.3e}, sigma_max = {s[0]:.3e})")
    return m


def signature(s, tol: Tolerance = DEFAULT_TOL) -> int:
    """Number of positive minus number of negative eigenvalues.

    Raises NearSingular when some eigenvalue sits inside the zero band
    eq_tol * ||s||_2; such a spectrum signals a degenerate configuration
    upstream and must not be silently rounded to a sign.
    """
    s = require_symmetric(s, tol, "signature input")
    eigs = np.linalg.eigvalsh(s)
    scale = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if scale == 0.0:
        raise NearSingular("zero matrix has no signature")
    band = tol.eq_tol * scale
    if np.any(np.abs(eigs) <= band):
        raise NearSingular(
            f"eigenvalue inside zero band (band {band:.3e}, "
            f"closest {np.min(np.abs(eigs)):.3e})")
    return int(np.sum(eigs > 0) - np.sum(eigs < 0))


def spectral_radius(x) -> float:
    x = as_matrix(x)
    check_finite(x)
    return float(np.max(np.abs(np.linalg.eigvals(x)))) if x.size else 0.0


def circle_class(x, tol: Tolerance = DEFAULT_TOL) -> CircleClass:
    """Position of the spectrum relative to the unit circle.

    The band [1-b, 1+b] with b = tol.unit_circle_band decides "on the
    circle"; any eigenvalue inside it dominates the classification.
    """
    x = require_invertible(x, tol, "circle_class input")
    moduli = np.abs(np.linalg.eigvals(x))
    band = tol.unit_circle_band
    if np.any(np.abs(moduli - 1.0) <= band):
        return CircleClass.HAS_UNIT_MODULUS_EIGENVALUE
    if np.all(moduli < 1.0 - band):
        return CircleClass.CONTRACTING
    if np.all(moduli > 1.0 + band):
        return CircleClass.EXPANDING
    return CircleClass.MIXED


def _stein_kron_solve(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    # row-major vec: vec(A^T P A) = (A^T (x) A^T) vec(P)
    n = a.shape[0]
    k = np.kron(a.T, a.T) - np.eye(n * n)
    p = np.linalg.solve(k, q.reshape(-1)).reshape(n, n)
    # two rounds of iterative refinement; the glued conjugations downstream
    # amplify any residual left here
    for _ in range(2):
        r = a.T @ p @ a - p - q
        p = p - np.linalg.solve(k, r.reshape(-1)).reshape(n, n)
    return sym_part(p)


def _stein_series(a: np.ndarray, q: np.ndarray, tol: Tolerance) -> np.ndarray:
    # P = -sum_i (A^T)^i Q A^i, valid for contracting A
    term = q.copy()
    acc = q.copy()
    bound = rel_bound(tol.series_tol, q)
    for _ in range(100_000):
        term = a.T @ term @ a
        acc += term
        if norm_inf(term) <= bound:
            break
    return sym_part(-acc)


def stein_solve(a, q, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unique symmetric P with A^T P A - P = Q.

    Solvability requires lambda*mu != 1 for all eigenvalue pairs of A; a
    pair inside the unit_circle_band raises ResonantSpectrum.  Solved by a
    Kronecker linear system with iterative refinement up to n = 32, by
    series summation for larger contracting A.
    """
    a = as_matrix(a)
    q = require_symmetric(q, tol, "Stein right-hand side")
    if a.shape != q.shape:
        raise ValueError("A and Q must have matching shape")
    eigs = np.linalg.eigvals(a)
    prods = np.abs(np.multiply.outer(eigs, eigs) - 1.0)
    if np.min(prods) <= tol.unit_circle_band:
        raise ResonantSpectrum(
            f"eigenvalue product within {tol.unit_circle_band:.1e} of 1")
    n = a.shape[0]
    if n <= 32:
        p = _stein_kron_solve(a, q)
    elif np.max(np.abs(eigs)) < 1.0 - tol.unit_circle_band:
        p = _stein_series(a, q, tol)
    else:
        p = _stein_kron_solve(a, q)
    residual = norm_inf(a.T @ p @ a - p - q)
    if residual > rel_bound(tol.series_tol, q):
        raise ResonantSpectrum(
            f"Stein residual {residual:.3e} exceeds tolerance; "
            "the equation is too close to resonance")
    return p


def _char_poly_matches(x: np.ndarray, y: np.ndarray, tol: Tolerance) -> bool:
    cx, cy = np.poly(x), np.poly(y)
    floor = max(1.0, norm_inf(cx), norm_inf(cy))
    return norm_inf(cx - cy) <= max(1e-8, 100 * tol.eq_tol) * floor


def _realify_eigvecs(w: np.ndarray, v: np.ndarray) -> np.ndarray | None:
    """Real basis from an eigendecomposition of a real matrix.

    Eigenvalues must be simple (up to conjugate pairing); returns None when
    clustering makes the pairing ambiguous.
    """
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]
    cols = []
    i = 0
    n = w.size
    while i < n:
        if abs(w[i].imag) <= 1e-12 * max(1.0, abs(w[i])):
            cols.append(v[:, i].real)
            i += 1
        else:
            # conjugate pair: lexsort puts -im first
            if i + 1 >= n or abs(w[i + 1] - np.conj(w[i])) > 1e-8 * max(1.0, abs(w[i])):
                return None
            cols.append(v[:, i].real)
            cols.append(v[:, i].imag)
            i += 2
    return np.column_stack(cols)


def similarity_witness(x, y, tol: Tolerance = DEFAULT_TOL,
                       retries: int = 64, seed: int = 0) -> np.ndarray | None:
    """Invertible G with G X G^{-1} = Y, or None if X and Y are not similar.

    Strategy: characteristic-polynomial reject, then eigenvector alignment,
    then the nullspace of G X - Y G searched for an invertible element by
    seeded random combinations.  None encodes non-similarity; a returned G
    always satisfies the residual bound eq_tol relative to ||Y||.
    """
    x = require_invertible(x, tol, "similarity X")
    y = require_invertible(y, tol, "similarity Y")
    if x.shape != y.shape:
        return None
    n = x.shape[0]
    bound = rel_bound(tol.eq_tol, y)

    def accept(g):
        if g is None:
            return None
        s = np.linalg.svd(g, compute_uv=False)
        if s[-1] <= 1e-10 * max(1.0, s[0]):
            return None
        if norm_inf(g @ x @ np.linalg.inv(g) - y) <= bound:
            return g
        return None

    if not _char_poly_matches(x, y, tol):
        return None

    wx, vx = np.linalg.eig(x)
    wy, vy = np.linalg.eig(y)
    gaps = np.abs(np.subtract.outer(wx, wx))
    np.fill_diagonal(gaps, np.inf)
    if n == 1 or gaps.min() > 1e-7 * max(1.0, norm_inf(np.abs(wx))):
        # simple spectrum: align realified eigenbases
        rx = _realify_eigvecs(wx, vx)
        ry = _realify_eigvecs(wy, vy)
        if rx is not None and ry is not None:
            g = accept(ry @ np.linalg.inv(rx))
            if g is not None:
                return g

    # nullspace of vec(G X - Y G) = (I (x) X^T - Y (x) I) vec(G)
    op = np.kron(np.eye(n), x.T) - np.kron(y, np.eye(n))
    _, svals, vt = np.linalg.svd(op)
    cutoff = max(1e-10, 100 * tol.eq_tol) * max(1.0, svals[0])
    basis = [vt[i].reshape(n, n) for i in range(len(svals)) if svals[i] <= cutoff]
    if not basis:
        return None
    rng = np.random.default_rng(seed)
    for k in basis:
        g = accept(k)
        if g is not None:
            return g
    for _ in range(retries):
        coeffs = rng.normal(size=len(basis))
        g = accept(sum(c * b for c, b in zip(coeffs, basis)))
        if g is not None:
            return g
    return None


def factor_signature(s, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, int]:
    """Factor an invertible symmetric S as M diag(1_k, -1_{n-k}) M^T.

    Returns (M, k) with M invertible and k the number of positive
    eigenvalues, so signature(S) = 2k - n.  Positive definite input takes
    the Cholesky route (M lower triangular, k = n).
    """
    s = require_symmetric(s, tol, "factor input")
    n = s.shape[0]
    eigs, vecs = np.linalg.eigh(s)
    scale = float(np.max(np.abs(eigs)))
    if scale == 0.0 or np.any(np.abs(eigs) <= tol.eq_tol * scale):
        raise NearSingular("symmetric factor input has an eigenvalue in the zero band")
    if np.all(eigs > 0):
        return np.linalg.cholesky(s), n
    order = np.argsort(-eigs)  # positives first
    eigs, vecs = eigs[order], vecs[:, order]
    k = int(np.sum(eigs > 0))
    m = vecs @ np.diag(np.sqrt(np.abs(eigs)))
    return m, k
