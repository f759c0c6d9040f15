"""Representations of the three-holed sphere group <C3, C2, C1 | C3 C2 C1>.

Length parameters are a triple (X1, X2, X3) of invertible matrices whose
product X3 (X2^T)^{-1} X1 is symmetric; positive definiteness of that product
is exactly maximality, and the spectral condition on the individual Xi
(inside the closed unit disc) makes the parameters unique up to simultaneous
orthogonal conjugation.

The forward map sends parameters to three explicit block matrices fixing the
standard points 0, e = identity, infinity; the inverse map recovers
parameters from canonical fixed points.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import NotFixed, NotMaximal, NotValid
from .maslov import Triple, indefinite_identity, is_maximal, maslov, normalize_maximal_triple
from .matcore import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    norm_inf,
    rel_bound,
    require_invertible,
    signature,
    spectral_radius,
    sym_part,
)
from .normalform import canonical_point_of_element
from .symplectic import (
    BoundaryPoint,
    SpMat,
    make_symplectic,
    moebius_act,
    point_distance,
    sp_inverse,
)

__all__ = [
    "ParamClass",
    "PantsParams",
    "GeneralPantsParams",
    "PantsRep",
    "pants_product",
    "classify_params",
    "build_maximal",
    "build_general",
    "toledo",
    "toledo_signature_shortcut",
    "recover_params",
    "fingerprint",
    "fingerprint_distance",
    "EquivalenceResult",
    "params_equivalent",
]


class ParamClass(enum.Enum):
    NOT_VALID = "not_valid"
    IN_TILDE_R = "in_tilde_r"     # product symmetric positive definite
    IN_R = "in_r"                 # additionally all spectra in the closed unit disc
    IN_R_STAR = "in_r_star"       # all spectra strictly inside


@dataclass(frozen=True, eq=False)
class PantsParams:
    """Length parameters (X1, X2, X3) of a three-holed sphere representation."""

    X1: np.ndarray
    X2: np.ndarray
    X3: np.ndarray

    def __post_init__(self):
        for name in ("X1", "X2", "X3"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        if not (self.X1.shape == self.X2.shape == self.X3.shape):
            raise ValueError("length parameters must share one dimension")

    @property
    def n(self) -> int:
        return self.X1.shape[0]

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.X1, self.X2, self.X3)


@dataclass(frozen=True, eq=False)
class GeneralPantsParams:
    """Parameters (i, X1, X2, X3) with middle fixed point diag(1_i, -1_{n-i}).

    The product X3 (X2^T)^{-1} X1 must be symmetric but may have any
    signature; these parametrize non-maximal representations as well.
    """

    i: int
    X1: np.ndarray
    X2: np.ndarray
    X3: np.ndarray

    def __post_init__(self):
        for name in ("X1", "X2", "X3"):
            object.__setattr__(self, name, as_matrix(getattr(self, name)))
        if not 0 <= self.i <= self.X1.shape[0]:
            raise ValueError(f"i must lie in [0, {self.X1.shape[0]}]")

    @property
    def n(self) -> int:
        return self.X1.shape[0]


@dataclass(frozen=True, eq=False)
class PantsRep:
    """Images (c1, c2, c3) of the standard generators, with c3 c2 c1 = I."""

    c1: SpMat
    c2: SpMat
    c3: SpMat
    relation_residual: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.c1.n

    def generators(self) -> tuple[SpMat, SpMat, SpMat]:
        return (self.c1, self.c2, self.c3)


def pants_product(p, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """X3 (X2^T)^{-1} X1, the matrix whose shape controls everything."""
    x1, x2, x3 = p.X1, p.X2, p.X3
    require_invertible(x2, tol, "X2")
    return x3 @ np.linalg.inv(x2.T) @ x1


def classify_params(p: PantsParams, tol: Tolerance = DEFAULT_TOL) -> ParamClass:
    """Finest membership class of the parameters.

    NOT_VALID when the product is asymmetric or not positive definite;
    otherwise graded by the spectral radii of the three matrices against the
    unit-circle band.
    """
    for name, x in zip(("X1", "X2", "X3"), p.matrices()):
        require_invertible(x, tol, name)
    prod = pants_product(p, tol)
    if norm_inf(prod - prod.T) > rel_bound(tol.eq_tol, prod):
        return ParamClass.NOT_VALID
    eigs = np.linalg.eigvalsh(sym_part(prod))
    if np.min(eigs) <= rel_bound(tol.eq_tol, prod):
        return ParamClass.NOT_VALID
    band = tol.unit_circle_band
    radii = [spectral_radius(x) for x in p.matrices()]
    if any(r > 1.0 + band for r in radii):
        return ParamClass.IN_TILDE_R
    if all(r < 1.0 - band for r in radii):
        return ParamClass.IN_R_STAR
    return ParamClass.IN_R


def _pants_blocks(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray,
                  ik: np.ndarray) -> tuple[np.ndarray, ...]:
    """The three generator images with middle fixed point ik."""
    n = x1.shape[0]
    z = np.zeros((n, n))
    x1ti = np.linalg.inv(x1.T)
    x2i = np.linalg.inv(x2)
    x2ti = np.linalg.inv(x2.T)
    x3i = np.linalg.inv(x3)
    x3ti = np.linalg.inv(x3.T)
    t = x3i @ x1.T

    c1 = (x1, z, x2i @ x3.T + ik @ x1, x1ti)
    c2 = (-ik @ x2ti - ik @ t @ ik - x2 @ ik, ik @ t + x2,
          -x2ti - t @ ik, t)
    c3 = (x3ti, -x3ti @ ik - np.linalg.inv(x1) @ x2.T, z, x3)
    return c1, c2, c3


def _assemble_rep(blocks, tol: Tolerance) -> PantsRep:
    c1, c2, c3 = (make_symplectic(*b, tol=tol) for b in blocks)
    n = c1.n
    residual = norm_inf((c3 @ c2 @ c1).m - np.eye(2 * n))
    if residual > rel_bound(tol.eq_tol, c1.m, c2.m, c3.m):
        raise NotValid(f"group relation fails with residual {residual:.3e}")
    return PantsRep(c1, c2, c3, relation_residual=residual)


def build_maximal(p: PantsParams, tol: Tolerance = DEFAULT_TOL) -> PantsRep:
    """The maximal representation attached to parameters with positive product.

    The images fix 0, e and infinity respectively and satisfy the group
    relation exactly at the formula level.
    """
    if classify_params(p, tol) is ParamClass.NOT_VALID:
        raise NotValid("parameters are not in the positive-definite cone")
    blocks = _pants_blocks(p.X1, p.X2, p.X3, np.eye(p.n))
    return _assemble_rep(blocks, tol)


def build_general(gp: GeneralPantsParams, tol: Tolerance = DEFAULT_TOL) -> PantsRep:
    """Representation with middle fixed point diag(1_i, -1_{n-i}).

    Requires only symmetry of the product; the characteristic number comes
    out as i + j - n where 2j - n is the product's signature.
    """
    for name, x in zip(("X1", "X2", "X3"), (gp.X1, gp.X2, gp.X3)):
        require_invertible(x, tol, name)
    prod = gp.X3 @ np.linalg.inv(gp.X2.T) @ gp.X1
    if norm_inf(prod - prod.T) > rel_bound(tol.eq_tol, prod):
        raise NotValid("product is not symmetric; no representation exists")
    blocks = _pants_blocks(gp.X1, gp.X2, gp.X3, indefinite_identity(gp.n, gp.i))
    return _assemble_rep(blocks, tol)


def _require_fixed(c: SpMat, p: BoundaryPoint, tol: Tolerance, who: str):
    img = moebius_act(c, p, tol)
    d = point_distance(img, p)
    bound = rel_bound(np.sqrt(tol.eq_tol)) if p.is_infinity \
        else rel_bound(np.sqrt(tol.eq_tol), p.value)
    if not d <= bound:
        raise NotFixed(f"{who} does not fix its claimed point (moved by {d:.3e})")


def toledo(rep: PantsRep, fixed_points: Triple,
           extra: BoundaryPoint | None = None,
           tol: Tolerance = DEFAULT_TOL) -> Fraction:
    """The characteristic number  (beta(y1,y2,y3) + beta(y1, c1.y3, y2)) / 2.

    The yi must be fixed points of the respective generators; the default
    fourth point is c1 applied to y3.  Values are integers or half-integers
    in [-n, n], returned exactly as fractions.
    """
    y1, y2, y3 = fixed_points.points()
    for c, y, who in zip(rep.generators(), (y1, y2, y3), ("c1", "c2", "c3")):
        _require_fixed(c, y, tol, who)
    if extra is None:
        extra = moebius_act(rep.c1, y3, tol)
    b1 = maslov(Triple(y1, y2, y3), tol)
    b2 = maslov(Triple(y1, extra, y2), tol)
    return Fraction(b1 + b2, 2)


def toledo_signature_shortcut(p, tol: Tolerance = DEFAULT_TOL) -> Fraction:
    """(n + sign(X3 (X2^T)^{-1} X1)) / 2 for symmetric invertible product."""
    prod = pants_product(p, tol)
    if norm_inf(prod - prod.T) > rel_bound(tol.eq_tol, prod):
        raise NotValid("product is not symmetric")
    return Fraction(p.n + signature(sym_part(prod), tol), 2)


def recover_params(rep: PantsRep,
                   tol: Tolerance = DEFAULT_TOL) -> tuple[PantsParams, SpMat]:
    """Invert the forward construction on an arbitrary maximal representation.

    Canonical fixed points of the three generators form a maximal triple;
    normalizing it to (0, e, inf) puts the generators in the standard block
    shape, from which X1 sits in the upper-left of c1, X3 in the lower-right
    of c3, and X2 = B - D read off c2.  Returns the parameters together with
    the normalizing conjugator h.
    """
    y1, y2, y3 = (canonical_point_of_element(c, tol) for c in rep.generators())
    t = Triple(y1, y2, y3)
    if not is_maximal(t, tol):
        raise NotMaximal("canonical fixed points do not form a maximal triple")
    h = normalize_maximal_triple(t, tol)
    hinv = sp_inverse(h)
    c1, c2, c3 = ((h @ c @ hinv) for c in rep.generators())
    x1 = c1.A.copy()
    x3 = c3.D.copy()
    x2 = c2.B - c2.D
    params = PantsParams(x1, x2, x3)
    if classify_params(params, tol) is ParamClass.NOT_VALID:
        raise NotMaximal("recovered parameters fail membership; "
                         "input was not a maximal representation in standard shape")
    return params, h


_LETTERS = ("X1", "X2", "X3", "X1t", "X2t", "X3t")


def fingerprint(p: PantsParams, max_len: int = 3) -> np.ndarray:
    """Traces of all words of length <= max_len in the Xi and transposes.

    Simultaneous orthogonal conjugation leaves every entry unchanged, so
    equal fingerprints are a necessary condition for orbit equality.
    """
    mats = {
        "X1": p.X1, "X2": p.X2, "X3": p.X3,
        "X1t": p.X1.T, "X2t": p.X2.T, "X3t": p.X3.T,
    }
    values = []
    for length in range(1, max_len + 1):
        for word in itertools.product(_LETTERS, repeat=length):
            m = mats[word[0]]
            for w in word[1:]:
                m = m @ mats[w]
            values.append(np.trace(m))
    return np.array(values)


def fingerprint_distance(p: PantsParams, q: PantsParams, max_len: int = 3) -> float:
    fp, fq = fingerprint(p, max_len), fingerprint(q, max_len)
    scale = max(1.0, float(np.max(np.abs(fp))), float(np.max(np.abs(fq))))
    return float(np.max(np.abs(fp - fq))) / scale


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    inconclusive: bool
    witness: np.ndarray | None = None


def params_equivalent(p: PantsParams, q: PantsParams,
                      tol: Tolerance = DEFAULT_TOL,
                      retries: int = 64, seed: int = 0) -> EquivalenceResult:
    """Decide simultaneous orthogonal conjugacy of two parameter triples.

    Trace fingerprints give a cheap reject; a surviving pair goes through
    the joint commutation nullspace, searched for an orthogonal element.
    When fingerprints match but no orthogonal witness is found within the
    retry budget the result is flagged inconclusive rather than asserted.
    """
    if p.n != q.n:
        return EquivalenceResult(False, False)
    n = p.n
    fp_tol = max(1e-7, 100 * tol.eq_tol)
    if fingerprint_distance(p, q) > fp_tol:
        return EquivalenceResult(False, False)

    # joint nullspace of K Xi - Yi K over the three pairs
    ops = [np.kron(np.eye(n), x.T) - np.kron(y, np.eye(n))
           for x, y in zip(p.matrices(), q.matrices())]
    stack = np.vstack(ops)
    _, svals, vt = np.linalg.svd(stack)
    cutoff = max(1e-9, 100 * tol.eq_tol) * max(1.0, svals[0])
    basis = [vt[i].reshape(n, n) for i in range(len(svals)) if svals[i] <= cutoff]
    basis += [vt[i].reshape(n, n) for i in range(len(svals), vt.shape[0])]

    def try_witness(k):
        # orthogonal polar factor of a nullspace element
        u, _, vh = np.linalg.svd(k)
        cand = u @ vh
        ok = all(norm_inf(cand @ x @ cand.T - y) <= rel_bound(np.sqrt(tol.eq_tol), y)
                 for x, y in zip(p.matrices(), q.matrices()))
        return cand if ok else None

    rng = np.random.default_rng(seed)
    for k in basis:
        w = try_witness(k)
        if w is not None:
            return EquivalenceResult(True, False, w)
    for _ in range(retries):
        if not basis:
            break
        coeffs = rng.normal(size=len(basis))
        w = try_witness(sum(c * b for c, b in zip(coeffs, basis)))
        if w is not None:
            return EquivalenceResult(True, False, w)
    return EquivalenceResult(False, True)
