from fractions import Fraction

import numpy as np
import pytest

from maxrep.errors import NotValid
from maxrep.maslov import Triple, indefinite_identity, maslov
from maxrep.matcore import norm_inf
from maxrep.pants import (
    GeneralPantsParams,
    PantsParams,
    PantsRep,
    ParamClass,
    _pants_blocks,
    build_general,
    build_maximal,
    classify_params,
    fingerprint_distance,
    pants_product,
    params_equivalent,
    recover_params,
    toledo,
    toledo_signature_shortcut,
)
from maxrep.sampling import (
    random_contracting,
    random_invertible,
    random_orthogonal,
    random_pants_params,
    random_spd,
    random_symplectic,
)
from maxrep.symplectic import (
    INFINITY,
    SpMat,
    finite_point,
    identity_point,
    moebius_act,
    point_distance,
    sp_inverse,
    zero_point,
)


def scalar_params(x1, x2, x3):
    return PantsParams(np.array([[x1]]), np.array([[x2]]), np.array([[x3]]))


class TestClassify:
    def test_scalar_examples(self):
        assert classify_params(scalar_params(0.5, 0.5, 0.5)) is ParamClass.IN_R_STAR
        assert classify_params(scalar_params(2.0, 2.0, 2.0)) is ParamClass.IN_TILDE_R
        assert classify_params(scalar_params(0.5, -0.5, 0.5)) is ParamClass.NOT_VALID

    def test_boundary_case(self):
        # one length exactly on the unit circle: in the closed cone, not the open one
        assert classify_params(scalar_params(1.0, 0.5, 0.5)) is ParamClass.IN_R

    def test_asymmetric_product_invalid(self, rng):
        x1 = random_contracting(2, rng)
        x2 = random_contracting(2, rng)
        x3 = random_contracting(2, rng)
        p = PantsParams(x1, x2, x3)
        prod = pants_product(p)
        if norm_inf(prod - prod.T) > 1e-6:
            assert classify_params(p) is ParamClass.NOT_VALID


class TestBuildMaximal:
    def test_frozen_scalar_matrices(self):
        rep = build_maximal(scalar_params(0.5, 0.5, 0.5))
        np.testing.assert_allclose(rep.c1.m, [[0.5, 0.0], [1.5, 2.0]], atol=1e-15)
        np.testing.assert_allclose(rep.c2.m, [[-3.5, 1.5], [-3.0, 1.0]], atol=1e-15)
        np.testing.assert_allclose(rep.c3.m, [[2.0, -3.0], [0.0, 0.5]], atol=1e-15)
        assert rep.relation_residual <= 1e-15

    def test_images_fix_standard_points(self, rng):
        p = random_pants_params(3, rng)
        rep = build_maximal(p)
        assert point_distance(moebius_act(rep.c1, zero_point(3)), zero_point(3)) <= 1e-12
        assert point_distance(moebius_act(rep.c2, identity_point(3)),
                              identity_point(3)) <= 1e-10
        assert moebius_act(rep.c3, INFINITY).is_infinity

    def test_orthogonal_conjugation_covariance(self, rng):
        p = random_pants_params(2, rng)
        k = random_orthogonal(2, rng)
        q = PantsParams(k @ p.X1 @ k.T, k @ p.X2 @ k.T, k @ p.X3 @ k.T)
        rep_p, rep_q = build_maximal(p), build_maximal(q)
        z = np.zeros((2, 2))
        ell = SpMat(np.block([[k, z], [z, k]]))
        for cp, cq in zip(rep_p.generators(), rep_q.generators()):
            np.testing.assert_allclose((ell @ cp @ sp_inverse(ell)).m, cq.m, atol=1e-11)

    def test_rejects_invalid(self):
        with pytest.raises(NotValid):
            build_maximal(scalar_params(0.5, -0.5, 0.5))

    def test_relation_iff_symmetric_product(self, rng):
        # both directions, on raw block assembly without the validity gate
        for _ in range(20):
            n = int(rng.integers(1, 4))
            x1 = random_invertible(n, rng)
            x2 = random_invertible(n, rng)
            sym = rng.uniform() < 0.5
            if sym:
                s = random_spd(n, rng) * rng.choice([-1.0, 1.0])
                x3 = s @ np.linalg.inv(x1) @ x2.T
            else:
                x3 = random_invertible(n, rng)
            prod = x3 @ np.linalg.inv(x2.T) @ x1
            blocks = _pants_blocks(x1, x2, x3, np.eye(n))
            mats = [np.block([[a, b], [c, d]]) for a, b, c, d in blocks]
            residual = norm_inf(mats[2] @ mats[1] @ mats[0] - np.eye(2 * n))
            if norm_inf(prod - prod.T) <= 1e-9 * max(1.0, norm_inf(prod)):
                assert residual <= 1e-8
            else:
                assert residual > 1e-8


class TestBuildGeneral:
    def test_reduces_to_maximal_at_full_index(self, rng):
        p = random_pants_params(2, rng)
        gp = GeneralPantsParams(2, p.X1, p.X2, p.X3)
        rep_g = build_general(gp)
        rep_m = build_maximal(p)
        for cg, cm in zip(rep_g.generators(), rep_m.generators()):
            np.testing.assert_allclose(cg.m, cm.m, atol=1e-13)

    def test_middle_fixed_point(self, rng):
        n = 2
        for i in range(n + 1):
            x1 = random_contracting(n, rng)
            x2 = random_contracting(n, rng)
            sigma = random_invertible(n, rng)
            target = sigma @ indefinite_identity(n, rng.integers(0, n + 1)) @ sigma.T
            x3 = target @ np.linalg.inv(x1) @ x2.T
            gp = GeneralPantsParams(i, x1, x2, x3)
            rep = build_general(gp)
            ik = finite_point(indefinite_identity(n, i))
            assert point_distance(moebius_act(rep.c2, ik), ik) <= 1e-9
            assert rep.relation_residual <= 1e-10

    def test_rejects_asymmetric(self, rng):
        with pytest.raises(NotValid):
            build_general(GeneralPantsParams(
                1, random_invertible(2, rng), random_invertible(2, rng),
                random_invertible(2, rng)))


class TestToledo:
    def test_maximal_value(self, rng):
        p = random_pants_params(2, rng)
        rep = build_maximal(p)
        t = Triple(zero_point(2), identity_point(2), INFINITY)
        assert toledo(rep, t) == Fraction(2)
        assert toledo_signature_shortcut(p) == Fraction(2)

    def test_scalar_general_value(self):
        gp = GeneralPantsParams(0, np.array([[0.5]]), np.array([[0.5]]), np.array([[0.5]]))
        rep = build_general(gp)
        t = Triple(zero_point(1), finite_point(indefinite_identity(1, 0)), INFINITY)
        assert toledo(rep, t) == Fraction(0)  # i + j - n = 0 + 1 - 1

    def test_signature_zero_product(self):
        p = scalar_params(0.5, -0.5, 0.5)
        with pytest.raises(NotValid):
            build_maximal(p)
        # the shortcut is still defined: product -1/2 has signature -1
        assert toledo_signature_shortcut(p) == Fraction(0)

    def test_closed_cone_params_still_build(self):
        # spectra outside the closed unit disc: buildable, maximal, but the
        # parameters are only unique in the contracting cone
        p = scalar_params(2.0, 2.0, 2.0)
        assert classify_params(p) is ParamClass.IN_TILDE_R
        rep = build_maximal(p)
        assert rep.relation_residual <= 1e-12
        assert toledo_signature_shortcut(p) == Fraction(1)
        t = Triple(zero_point(1), identity_point(1), INFINITY)
        assert toledo(rep, t) == Fraction(1)

    def test_agreement_on_random_params(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 4))
            p = random_pants_params(n, rng)
            rep = build_maximal(p)
            t = Triple(zero_point(n), identity_point(n), INFINITY)
            assert toledo(rep, t) == toledo_signature_shortcut(p) == Fraction(n)

    def test_orientation_reversal_negates(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 3))
            p = random_pants_params(n, rng)
            rep = build_maximal(p)
            flipped = PantsRep(sp_inverse(rep.c3), sp_inverse(rep.c2), sp_inverse(rep.c1))
            t = Triple(INFINITY, identity_point(n), zero_point(n))
            assert toledo(flipped, t) == -Fraction(n)

    def test_maximality_characterization(self, rng):
        # fixed points exist, both index terms equal n
        n = 2
        p = random_pants_params(n, rng)
        rep = build_maximal(p)
        y1, y2, y3 = zero_point(n), identity_point(n), INFINITY
        assert maslov(Triple(y1, y2, y3)) == n
        extra = moebius_act(rep.c1, y3)
        assert maslov(Triple(y1, extra, y2)) == n


class TestRecover:
    def test_round_trip_exact(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            p = random_pants_params(n, rng, tame=True)
            rep = build_maximal(p)
            q, h = recover_params(rep)
            for xp, xq in zip(p.matrices(), q.matrices()):
                assert norm_inf(xp - xq) <= 1e-9 * max(1.0, norm_inf(xp))
            np.testing.assert_allclose(h.m, np.eye(2 * n), atol=1e-9)

    def test_conjugated_rep_lands_in_orbit(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            p = random_pants_params(n, rng, tame=True)
            rep = build_maximal(p)
            g = random_symplectic(n, rng)
            gi = sp_inverse(g)
            conj = PantsRep(g @ rep.c1 @ gi, g @ rep.c2 @ gi, g @ rep.c3 @ gi)
            q, _ = recover_params(conj)
            assert classify_params(q) in (ParamClass.IN_R, ParamClass.IN_R_STAR)
            assert fingerprint_distance(p, q) <= 1e-7
            assert params_equivalent(p, q).equivalent

    def test_unit_modulus_length(self, rng):
        # a circle-spectrum first length: recovery still works from the
        # canonical points of the standard position
        th = 0.7
        x1 = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        x2 = random_contracting(2, rng, rho_range=(0.3, 0.5))
        s = random_spd(2, rng)
        x3 = s @ np.linalg.inv(x1) @ x2.T
        x3 *= min(1.0, 0.8 / np.max(np.abs(np.linalg.eigvals(x3))))
        p = PantsParams(x1, x2, x3)
        assert classify_params(p) is ParamClass.IN_R
        rep = build_maximal(p)
        q, _ = recover_params(rep)
        for xp, xq in zip(p.matrices(), q.matrices()):
            assert norm_inf(xp - xq) <= 1e-8


class TestEquivalence:
    def test_self(self, rng):
        p = random_pants_params(2, rng)
        assert params_equivalent(p, p).equivalent

    def test_orthogonal_orbit(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            p = random_pants_params(n, rng)
            k = random_orthogonal(n, rng)
            q = PantsParams(k @ p.X1 @ k.T, k @ p.X2 @ k.T, k @ p.X3 @ k.T)
            res = params_equivalent(p, q)
            assert res.equivalent
            w = res.witness
            assert norm_inf(w @ p.X1 @ w.T - q.X1) <= 1e-7

    def test_distinct_scalars(self):
        assert not params_equivalent(scalar_params(0.5, 0.5, 0.5),
                                     scalar_params(1 / 3, 1 / 3, 0.75)).equivalent

    def test_differential_finite_difference(self, rng):
        # boundary derivatives of the built representation, against central
        # differences of the action (step 1e-6)
        p = random_pants_params(2, rng, tame=True)
        rep = build_maximal(p)
        step = 1e-6
        for c, x, base in ((rep.c1, p.X1, np.zeros((2, 2))),
                           (rep.c2, p.X2, np.eye(2))):
            for _ in range(3):
                v = rng.normal(size=(2, 2))
                v = (v + v.T) / 2
                plus = moebius_act(c, finite_point(base + step * v)).value
                minus = moebius_act(c, finite_point(base - step * v)).value
                approx = (plus - minus) / (2 * step)
                exact = x @ v @ x.T
                assert norm_inf(approx - exact) <= 1e-4 * max(1.0, norm_inf(exact))
