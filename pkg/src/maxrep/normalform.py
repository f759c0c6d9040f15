"""Canonical fixed points and dynamical classification of boundary isometries.

The standard boundary element with data (A, S), A invertible and S symmetric
positive definite, is the block-lower-triangular symplectic matrix

    c = [[A, 0], [A + A^{-T} S, A^{-T}]].

Its fixed points in the matrix chart solve Y C Y + Y A^{-T} - A Y = 0 with
C = A + A^{-T} S.  The canonical fixed point is the unique one at which the
differential is non-expanding; it is 0 when no eigenvalue of A lies outside
the unit circle, and otherwise assembles from the expanding spectral block
through a discrete Stein equation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import (
    DefectiveSplit,
    NoCanonicalFixedPoint,
    NotContracting,
    NotFixed,
    NotSHyperbolic,
)
from .matcore import (
    DEFAULT_TOL,
    CircleClass,
    Tolerance,
    as_matrix,
    circle_class,
    norm_inf,
    rel_bound,
    require_invertible,
    require_symmetric,
    stein_solve,
    sym_part,
)
from .symplectic import (
    INFINITY,
    BoundaryPoint,
    SpMat,
    cycle_symplectic,
    make_symplectic,
    moebius_act,
    point_distance,
    sp_inverse,
    swap_symplectic,
    transverse,
)

__all__ = [
    "DifferentialClass",
    "IsometryClass",
    "StandardBoundary",
    "FixedPointReport",
    "DifferentialMap",
    "IsometryReport",
    "standard_element",
    "fixed_point_residual",
    "fixed_point_expanding_side",
    "fixed_point_contracting_side",
    "differential_at",
    "canonical_fixed_point",
    "classify_isometry",
    "attracting_point",
    "canonical_point_of_element",
    "fixed_point_probe",
]


class DifferentialClass(enum.Enum):
    CONTRACTING = "contracting"
    EXPANDING = "expanding"
    NON_EXPANDING = "non_expanding"
    NON_CONTRACTING = "non_contracting"
    INDETERMINATE = "indeterminate"


class IsometryClass(enum.Enum):
    S_HYPERBOLIC = "s_hyperbolic"
    S_PARABOLIC = "s_parabolic"
    MIXED_NON_EXPANDING_FP = "mixed_non_expanding_fp"


@dataclass(frozen=True, eq=False)
class StandardBoundary:
    """Data (A, S) of a standard boundary element; S must be positive definite."""

    A: np.ndarray
    S: np.ndarray
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        a = require_invertible(self.A, self.tol, "length block A")
        s = require_symmetric(self.S, self.tol, "shape block S")
        if np.min(np.linalg.eigvalsh(s)) <= rel_bound(self.tol.eq_tol, s):
            raise ValueError("S must be positive definite")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "S", s)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def element(self) -> SpMat:
        return standard_element(self.A, self.S, self.tol)


def standard_element(a, s, tol: Tolerance = DEFAULT_TOL) -> SpMat:
    """The lower-triangular standard form [[A, 0], [A + A^{-T}S, A^{-T}]]."""
    a, s = as_matrix(a), as_matrix(s)
    n = a.shape[0]
    ait = np.linalg.inv(a.T)
    return make_symplectic(a, np.zeros((n, n)), a + ait @ s, ait, tol)


@dataclass(frozen=True, eq=False)
class FixedPointReport:
    point: BoundaryPoint
    differential_class: DifferentialClass
    residual: float
    conjugator_cond: float = 1.0


@dataclass(frozen=True, eq=False)
class DifferentialMap:
    """The derivative v -> L v R of the boundary action at a fixed point.

    At any finite fixed point of a symplectic element, R equals L^T, so the
    eigenvalue moduli of the map on symmetric matrices are the pairwise
    products of the moduli of L's eigenvalues.
    """

    left: np.ndarray
    right: np.ndarray
    chart: SpMat | None = None  # None means the identity chart

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.left @ v @ self.right

    def eigen_moduli(self) -> np.ndarray:
        lm = np.abs(np.linalg.eigvals(self.left))
        rm = np.abs(np.linalg.eigvals(self.right))
        return np.sort(np.multiply.outer(lm, rm).reshape(-1))

    def classify(self, tol: Tolerance = DEFAULT_TOL) -> DifferentialClass:
        mods = self.eigen_moduli()
        band = tol.unit_circle_band
        if mods[-1] < 1.0 - band:
            return DifferentialClass.CONTRACTING
        if mods[0] > 1.0 + band:
            return DifferentialClass.EXPANDING
        if mods[-1] <= 1.0 + band:
            return DifferentialClass.NON_EXPANDING
        if mods[0] >= 1.0 - band:
            return DifferentialClass.NON_CONTRACTING
        return DifferentialClass.INDETERMINATE


def fixed_point_residual(g: SpMat, p: BoundaryPoint) -> float:
    """Distance between p and its image under g (entrywise, inf-aware)."""
    return point_distance(moebius_act(g, p), p)


def _stein_fixed_point(a: np.ndarray, s: np.ndarray, tol: Tolerance,
                       expanding_side: bool) -> np.ndarray:
    """Invertible fixed point of the standard element, via A^T P A - P = +-(A^T A + S).

    With A contracting the solution P of A^T P A - P = -(A^T A + S) is
    positive definite and Y = -P^{-1} is the fixed point transverse to 0
    (the action there is expanding).  With A expanding the sign flips and
    Y = P^{-1} is positive definite with contracting action.
    """
    sbar = a.T @ a + s
    q = -sbar if expanding_side else sbar
    p = stein_solve(a, q, tol)
    sign = -1.0 if expanding_side else 1.0
    return sym_part(sign * np.linalg.inv(p))


def fixed_point_expanding_side(sb: StandardBoundary,
                               tol: Tolerance = DEFAULT_TOL) -> FixedPointReport:
    """The unique fixed point transverse to 0 for contracting A.

    It is negative definite and the boundary action there is expanding.
    """
    if circle_class(sb.A, tol) is not CircleClass.CONTRACTING:
        raise NotContracting("expanding-side fixed point needs contracting A")
    y = _stein_fixed_point(sb.A, sb.S, tol, expanding_side=True)
    pt = BoundaryPoint(y)
    res = fixed_point_residual(sb.element(), pt)
    return FixedPointReport(pt, DifferentialClass.EXPANDING, res)


def fixed_point_contracting_side(sb: StandardBoundary,
                                 tol: Tolerance = DEFAULT_TOL) -> FixedPointReport:
    """The unique fixed point transverse to 0 for expanding A (contracting action)."""
    if circle_class(sb.A, tol) is not CircleClass.EXPANDING:
        raise NotContracting("contracting-side fixed point needs expanding A")
    y = _stein_fixed_point(sb.A, sb.S, tol, expanding_side=False)
    pt = BoundaryPoint(y)
    res = fixed_point_residual(sb.element(), pt)
    return FixedPointReport(pt, DifferentialClass.CONTRACTING, res)


def differential_at(g: SpMat, p: BoundaryPoint,
                    tol: Tolerance = DEFAULT_TOL) -> DifferentialMap:
    """Derivative of the boundary action of g at a fixed point p.

    For finite p the map is v -> (A - YC) v (CY + D)^{-1}.  The point at
    infinity is handled by conjugating with the chart swap X -> -X^{-1}
    first; the returned map then lives in that chart (eigenvalue data is
    chart independent).
    """
    res = fixed_point_residual(g, p)
    fixed_band = rel_bound(np.sqrt(tol.eq_tol)) if p.is_infinity else \
        rel_bound(np.sqrt(tol.eq_tol), p.value)
    if not res <= fixed_band:
        raise NotFixed(f"point is not fixed (residual {res:.3e})")
    if p.is_infinity:
        sw = swap_symplectic(g.n)
        g2 = sw @ g @ sp_inverse(sw)
        # infinity becomes 0 in the swapped chart
        return DifferentialMap(left=g2.A, right=np.linalg.inv(g2.D), chart=sw)
    y = p.value
    left = g.A - y @ g.C
    right = np.linalg.inv(g.C @ y + g.D)
    return DifferentialMap(left=left, right=right)


def _ordered_split(a: np.ndarray, s: np.ndarray, tol: Tolerance,
                   select_expanding: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Orthogonal Q, block-triangular T = Q^T A Q with the selected spectral
    cluster leading, plus the matching block of Q^T S Q.

    The selected cluster is the expanding (or contracting) part of the
    spectrum.  Eigenvalues in the gray zone around the threshold make the
    split untrustworthy and raise DefectiveSplit.
    """
    band = tol.unit_circle_band
    moduli = np.abs(np.linalg.eigvals(a))
    gray_lo, gray_hi = 1.0 - 2 * band, 1.0 + 2 * band
    inner_lo, inner_hi = 1.0 - band / 2, 1.0 + band / 2
    # an eigenvalue near the threshold but not inside the declared band
    # could land on either side of the cut
    ambiguous = (((moduli > inner_hi) & (moduli < gray_hi))
                 | ((moduli > gray_lo) & (moduli < inner_lo)))
    if np.any(ambiguous):
        raise DefectiveSplit(
            "eigenvalue moduli straddle the unit-circle band; refusing to split")
    if select_expanding:
        pred = lambda re, im: re * re + im * im > (1.0 + band) ** 2
    else:
        pred = lambda re, im: re * re + im * im < (1.0 - band) ** 2
    t, q, k = schur(a, output="real", sort=pred)
    sq = q.T @ s @ q
    return t, q, sq, int(k)


def canonical_fixed_point(sb: StandardBoundary,
                          tol: Tolerance = DEFAULT_TOL) -> FixedPointReport:
    """The unique fixed point where the action is non-expanding.

    If no eigenvalue of A lies outside the closed unit disc the point is 0.
    Otherwise the expanding spectral block contributes an invertible
    contracting-action fixed point which embeds into the leading corner of
    an orthogonal Schur basis.
    """
    a, s = sb.A, sb.S
    n = sb.n
    band = tol.unit_circle_band
    moduli = np.abs(np.linalg.eigvals(a))
    if np.all(moduli <= 1.0 + band):
        cls = (DifferentialClass.CONTRACTING if np.all(moduli < 1.0 - band)
               else DifferentialClass.NON_EXPANDING)
        pt = BoundaryPoint(np.zeros((n, n)))
        return FixedPointReport(pt, cls, fixed_point_residual(sb.element(), pt))
    t, q, sq, k = _ordered_split(a, s, tol, select_expanding=True)
    a_e = t[:k, :k]
    s_e = sym_part(sq[:k, :k])
    y_e = _stein_fixed_point(a_e, s_e, tol, expanding_side=False)
    y = np.zeros((n, n))
    y[:k, :k] = y_e
    pt = BoundaryPoint(sym_part(q @ y @ q.T))
    res = fixed_point_residual(sb.element(), pt)
    return FixedPointReport(pt, DifferentialClass.NON_EXPANDING, res,
                            conjugator_cond=1.0)


def classify_isometry(sb: StandardBoundary,
                      tol: Tolerance = DEFAULT_TOL) -> "IsometryReport":
    """Dynamical type of a standard boundary element.

    No unit-modulus spectrum gives a transverse attracting/repelling pair;
    spectrum entirely on the circle gives a single fixed point at 0; the
    mixed case only guarantees a non-expanding canonical point.
    """
    band = tol.unit_circle_band
    moduli = np.abs(np.linalg.eigvals(sb.A))
    on_circle = np.abs(moduli - 1.0) <= band
    if np.all(on_circle):
        pt = BoundaryPoint(np.zeros((sb.n, sb.n)))
        rep = FixedPointReport(pt, DifferentialClass.NON_EXPANDING,
                               fixed_point_residual(sb.element(), pt))
        return IsometryReport(IsometryClass.S_PARABOLIC, rep, None)
    if not np.any(on_circle):
        att = canonical_fixed_point(sb, tol)
        rep = _repelling_fixed_point(sb, tol)
        if not transverse(att.point, rep.point, tol):
            raise NotSHyperbolic("attracting and repelling points are not transverse")
        return IsometryReport(IsometryClass.S_HYPERBOLIC, att, rep)
    att = canonical_fixed_point(sb, tol)
    return IsometryReport(IsometryClass.MIXED_NON_EXPANDING_FP, att, None)


def _repelling_fixed_point(sb: StandardBoundary, tol: Tolerance) -> FixedPointReport:
    a, s = sb.A, sb.S
    n = sb.n
    band = tol.unit_circle_band
    moduli = np.abs(np.linalg.eigvals(a))
    if np.all(moduli >= 1.0 - band):
        cls = (DifferentialClass.EXPANDING if np.all(moduli > 1.0 + band)
               else DifferentialClass.NON_CONTRACTING)
        pt = BoundaryPoint(np.zeros((n, n)))
        return FixedPointReport(pt, cls, fixed_point_residual(sb.element(), pt))
    t, q, sq, k = _ordered_split(a, s, tol, select_expanding=False)
    a_c = t[:k, :k]
    s_c = sym_part(sq[:k, :k])
    y_c = _stein_fixed_point(a_c, s_c, tol, expanding_side=True)
    y = np.zeros((n, n))
    y[:k, :k] = y_c
    pt = BoundaryPoint(sym_part(q @ y @ q.T))
    res = fixed_point_residual(sb.element(), pt)
    return FixedPointReport(pt, DifferentialClass.NON_CONTRACTING, res)


@dataclass(frozen=True, eq=False)
class IsometryReport:
    kind: IsometryClass
    attracting: FixedPointReport
    repelling: FixedPointReport | None


# margins for certifying dynamics at a candidate fixed point; the raw
# eigenvalues of defective circle pairs carry O(sqrt(eps)) noise, so these
# sit well above machine precision
_ATTRACT_MARGIN = 1e-5
_NONEXPAND_SLACK = 1e-6


def _fixed_point_certificate(g: SpMat, p: BoundaryPoint) -> tuple[bool, float]:
    """(is the point fixed, spectral radius of the differential factor).

    Circle eigenvalues of the full matrix come in defective pairs whose
    computed values split by roughly sqrt(eps); certifying the candidate
    point directly is robust where raw eigenvalue bands are not.
    """
    if p.is_infinity:
        sw = swap_symplectic(g.n)
        g = sw @ g @ sp_inverse(sw)
        p = BoundaryPoint(np.zeros((g.n, g.n)))
    y = p.value
    img = g.A @ y + g.B - y @ (g.C @ y + g.D)
    fixed = norm_inf(img) <= rel_bound(np.sqrt(DEFAULT_TOL.eq_tol), y)
    m = g.A - y @ g.C
    return fixed, float(np.max(np.abs(np.linalg.eigvals(m))))


def attracting_point(g: SpMat, tol: Tolerance = DEFAULT_TOL) -> BoundaryPoint:
    """Attracting fixed point of an arbitrary transverse-pair element.

    The expanding invariant subspace of the full (2n, 2n) matrix is a
    Lagrangian graph over the vertical factor; its chart representative is
    the attracting point.  The result is certified by a contracting
    differential, which guards against defective circle spectra whose
    eigenvalues split across the band.
    """
    n = g.n
    band = tol.unit_circle_band
    t, z, k = schur(g.m, output="real",
                    sort=lambda re, im: re * re + im * im > 1.0)
    if k != n:
        raise NotSHyperbolic(f"expanding subspace has dimension {k}, expected {n}")
    u1, u2 = z[:n, :k], z[n:, :k]
    s = np.linalg.svd(u2, compute_uv=False)
    if s[-1] <= tol.eq_tol * max(1.0, s[0]):
        pt = INFINITY
    else:
        pt = BoundaryPoint(sym_part(u1 @ np.linalg.inv(u2)))
    fixed, rho = _fixed_point_certificate(g, pt)
    if not fixed or rho > 1.0 - max(band, _ATTRACT_MARGIN):
        raise NotSHyperbolic("no contracting fixed point; element is not "
                             "transverse-pair hyperbolic within tolerance")
    return pt


def canonical_point_of_element(g: SpMat, tol: Tolerance = DEFAULT_TOL) -> BoundaryPoint:
    """Canonical (non-expanding) fixed point of a symplectic element.

    Elements exposing a standard form in one of the three chart positions
    reachable by powers of the standard triple rotation use the exact
    closed forms (this covers unit-modulus spectra).  Anything else goes
    through the certified invariant-subspace route, which requires a
    transverse-pair element; the remaining cases refuse with
    NoCanonicalFixedPoint, because identifying a reliable splitting from
    raw matrix data is not possible in general.
    """
    n = g.n
    r = cycle_symplectic(n)
    charts = [SpMat(np.eye(2 * n)), sp_inverse(r), r]
    for u in charts:
        l = sp_inverse(u) @ g @ u
        if norm_inf(l.B) > rel_bound(tol.eq_tol, l.m):
            continue
        a = l.A
        s_part = sym_part(a.T @ l.C - a.T @ a)
        try:
            eigs = np.linalg.eigvalsh(s_part)
        except np.linalg.LinAlgError:
            continue
        if np.min(eigs) <= rel_bound(tol.eq_tol, s_part):
            continue
        sb = StandardBoundary(a, s_part, tol)
        rep = canonical_fixed_point(sb, tol)
        return moebius_act(u, rep.point, tol)
    # invariant-subspace route, accepting any non-expanding fixed point
    t, z, k = schur(g.m, output="real",
                    sort=lambda re, im: re * re + im * im > 1.0)
    if k == n:
        u1, u2 = z[:n, :k], z[n:, :k]
        s = np.linalg.svd(u2, compute_uv=False)
        if s[-1] <= tol.eq_tol * max(1.0, s[0]):
            pt = INFINITY
        else:
            pt = BoundaryPoint(sym_part(u1 @ np.linalg.inv(u2)))
        fixed, rho = _fixed_point_certificate(g, pt)
        if fixed and rho <= 1.0 + max(tol.unit_circle_band, _NONEXPAND_SLACK):
            return pt
    raise NoCanonicalFixedPoint(
        "no recognizable standard position and no certified "
        "non-expanding fixed point")


def fixed_point_probe(sb: StandardBoundary, n_seeds: int = 100, seed: int = 0,
                      tol: Tolerance = DEFAULT_TOL,
                      cluster_tol: float = 1e-6) -> list[np.ndarray]:
    """Newton search oracle for fixed points of the standard element.

    Runs Newton's method on Y C Y + Y A^{-T} - A Y = 0 from random symmetric
    seeds and clusters the converged solutions.  This is a diagnostic for
    uniqueness statements, never a production solver.
    """
    rng = np.random.default_rng(seed)
    a, s = sb.A, sb.S
    n = sb.n
    c = a + np.linalg.inv(a.T) @ s
    ait = np.linalg.inv(a.T)
    eye = np.eye(n)

    def f(y):
        return y @ c @ y + y @ ait - a @ y

    found: list[np.ndarray] = []
    for _ in range(n_seeds):
        y = sym_part(rng.normal(scale=2.0, size=(n, n)))
        ok = False
        for _ in range(60):
            r = f(y)
            if norm_inf(r) <= 1e-12 * max(1.0, norm_inf(y) ** 2):
                ok = True
                break
            # Jacobian of f at y in row-major vec coordinates
            j = (np.kron(eye, (c @ y).T) + np.kron(y @ c, eye)
                 + np.kron(eye, ait.T) - np.kron(a, eye))
            try:
                step = np.linalg.solve(j, r.reshape(-1)).reshape(n, n)
            except np.linalg.LinAlgError:
                break
            y = sym_part(y - step)
            if not np.all(np.isfinite(y)) or norm_inf(y) > 1e8:
                break
        if ok:
            for z in found:
                if norm_inf(z - y) <= cluster_tol * max(1.0, norm_inf(z)):
                    break
            else:
                found.append(y)
    return found
