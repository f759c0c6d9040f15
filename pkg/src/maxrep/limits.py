"""Limit-set sampling for surface representations.

When every boundary generator image has a transverse fixed-point pair, the
attracting fixed points of group elements sample the limit set.  The sample
reports pairwise transversality of the distinct sampled points and the
distribution of Maslov indices over sampled triples; for a maximal
representation the indices concentrate on +-n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxRepError, NotSHyperbolic
from .gluing import SurfaceRep
from .maslov import Triple, maslov
from .matcore import DEFAULT_TOL, Tolerance, norm_inf
from .normalform import attracting_point
from .symplectic import (
    BoundaryPoint,
    SpMat,
    point_distance,
    sp_inverse,
    transverse,
)

__all__ = ["LimitSample", "limit_set_sample", "reduced_words"]


@dataclass(frozen=True)
class LimitSample:
    points: tuple[tuple[str, BoundaryPoint], ...]   # word -> attracting point
    distinct_points: tuple[BoundaryPoint, ...]
    transverse_fraction: float
    beta_histogram: dict[int, int]
    skipped_words: int
    findings: tuple[str, ...] = field(default=())


def reduced_words(letters: list[str], max_len: int):
    """Freely reduced words over letters and formal inverses.

    Letters are labels; the inverse of "x" is "x-" and vice versa.  Yields
    tuples of labels of length 1..max_len with no adjacent cancellation.
    """
    def inverse(l: str) -> str:
        return l[:-1] if l.endswith("-") else l + "-"

    alphabet = letters + [inverse(l) for l in letters]

    def extend(word):
        for l in alphabet:
            if word and inverse(l) == word[-1]:
                continue
            yield word + (l,)

    frontier = [()]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for w2 in extend(w):
                nxt.append(w2)
                yield w2
        frontier = nxt


def _is_shyperbolic(m: np.ndarray, band: float) -> bool:
    moduli = np.abs(np.linalg.eigvals(m))
    return not np.any(np.abs(moduli - 1.0) <= band)


def limit_set_sample(rep: SurfaceRep, max_word_length: int = 4,
                     tol: Tolerance = DEFAULT_TOL,
                     max_triples: int = 200, seed: int = 0,
                     cluster_tol: float = 1e-8) -> LimitSample:
    """Attracting fixed points of words up to a length bound, with statistics.

    Requires every boundary generator image to have a transverse fixed-point
    pair (no unit-modulus spectrum); words whose image fails that condition
    are skipped and counted.  Points closer than cluster_tol are identified
    before statistics, since distinct words routinely share an axis.
    """
    for j, c in enumerate(rep.c_imgs, start=1):
        if not _is_shyperbolic(c.m, tol.unit_circle_band):
            raise NotSHyperbolic(f"boundary generator C{j} has unit-modulus spectrum")
    gens = rep.generator_images()
    letters = list(gens.keys())
    matrices: dict[str, SpMat] = {}
    for l, g in gens.items():
        matrices[l] = g
        matrices[l + "-"] = sp_inverse(g)

    points: list[tuple[str, BoundaryPoint]] = []
    skipped = 0
    findings: list[str] = []
    cache: dict[tuple[str, ...], SpMat] = {}
    for word in reduced_words(letters, max_word_length):
        if len(word) == 1:
            mat = matrices[word[0]]
        else:
            mat = cache[word[:-1]] @ matrices[word[-1]]
        cache[word] = mat
        if not _is_shyperbolic(mat.m, tol.unit_circle_band):
            skipped += 1
            continue
        try:
            pt = attracting_point(mat, tol)
        except NotSHyperbolic:
            skipped += 1
            continue
        points.append((" ".join(word), pt))

    distinct: list[BoundaryPoint] = []
    for _, pt in points:
        scale = 1.0 if pt.is_infinity else max(1.0, norm_inf(pt.value))
        if not any(point_distance(pt, q) <= cluster_tol * scale for q in distinct):
            distinct.append(pt)

    pairs = list(itertools.combinations(range(len(distinct)), 2))
    n_trans = sum(transverse(distinct[i], distinct[j], tol) for i, j in pairs)
    frac = n_trans / len(pairs) if pairs else 1.0
    if pairs and n_trans < len(pairs):
        findings.append(f"{len(pairs) - n_trans} of {len(pairs)} point pairs "
                        "not transverse")

    rng = np.random.default_rng(seed)
    triples = list(itertools.combinations(range(len(distinct)), 3))
    if len(triples) > max_triples:
        idx = rng.choice(len(triples), size=max_triples, replace=False)
        triples = [triples[i] for i in idx]
    hist: dict[int, int] = {}
    for i, j, k in triples:
        try:
            b = maslov(Triple(distinct[i], distinct[j], distinct[k]), tol)
        except MaxRepError as exc:  # degenerate triple
            findings.append(f"triple ({i},{j},{k}) failed: {exc}")
            continue
        hist[b] = hist.get(b, 0) + 1
    n = rep.n
    off = sum(v for b, v in hist.items() if abs(b) != n)
    if off:
        findings.append(f"{off} sampled triples with |index| != {n}")
    return LimitSample(
        points=tuple(points),
        distinct_points=tuple(distinct),
        transverse_fraction=frac,
        beta_histogram=hist,
        skipped_words=skipped,
        findings=tuple(findings),
    )
