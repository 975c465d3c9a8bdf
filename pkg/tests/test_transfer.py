"""Transfer matrices, approximation families, limit classification."""

import numpy as np
import pytest

from deltaprime.errors import ComplexCoefficient, GammaPole
from deltaprime.interactions import Delta, DeltaPrimePotential, lambda_of, theta_of_gamma
from deltaprime.transfer import (
    DIRICHLET,
    LIMIT,
    DeltaComb,
    PiecewisePotential,
    comb_transfer,
    family_3d,
    family_3d_limit,
    family_4d,
    family_5d,
    free_propagator,
    limit_diagnose,
    pc_transfer,
)

EPS_SEQ = [1e-2, 1e-3, 1e-4, 1e-5]


class TestFreePropagator:
    def test_zero_span(self):
        np.testing.assert_array_equal(free_propagator(0.0, 1.0), np.eye(2))

    def test_quarter_period(self):
        m = free_propagator(np.pi / 2, 1.0)
        np.testing.assert_allclose(m.real, [[0, 1], [-1, 0]], atol=1e-15)

    def test_bound_channel_is_hyperbolic(self):
        kap = 1.3
        m = free_propagator(0.7, 1j * kap)
        np.testing.assert_allclose(m[0, 0], np.cosh(kap * 0.7), atol=1e-14)
        np.testing.assert_allclose(m[0, 1], np.sinh(kap * 0.7) / kap, atol=1e-14)
        assert abs(np.linalg.det(m) - 1.0) < 1e-14

    def test_series_matches_direct_at_crossover(self):
        # continuity of the (1,2) entry across the series cut
        for u in (0.99e-4, 1.01e-4):
            eps, lam = 1.0, u
            m = free_propagator(eps, lam)
            assert abs(m[0, 1] - np.sin(lam * eps) / lam) < 1e-15

    def test_lambda_zero(self):
        m = free_propagator(0.37, 0.0)
        np.testing.assert_allclose(m, [[1, 0.37], [0, 1]], atol=1e-16)


class TestCombTransfer:
    def test_single_atom(self):
        comb = DeltaComb([0.3], [4.0])
        np.testing.assert_allclose(
            comb_transfer(comb, 1.0), lambda_of(Delta(4.0)).entries, atol=1e-15
        )

    def test_empty_comb_is_free(self):
        m = comb_transfer(DeltaComb([], []), 2.0, x_from=0.0, x_to=0.5)
        np.testing.assert_allclose(m, free_propagator(0.5, 2.0), atol=1e-15)

    def test_family_3d_close_to_limit(self):
        eps = 1e-4
        m = comb_transfer(family_3d(2.0 / 3.0, eps), 1.0)
        assert np.abs(m - np.diag([2.0, 0.5])).max() < 2 * eps

    def test_split_and_compose(self):
        comb = DeltaComb([0.0, 0.4, 1.1, 1.7], [1.0, -2.0, 0.5, 3.0])
        lam = 1.7
        left = comb_transfer(DeltaComb([0.0, 0.4], [1.0, -2.0]), lam, x_to=0.75)
        right = comb_transfer(DeltaComb([1.1, 1.7], [0.5, 3.0]), lam, x_from=0.75)
        np.testing.assert_allclose(
            right @ left, comb_transfer(comb, lam), atol=1e-13
        )

    def test_det_one(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = rng.integers(1, 6)
            xs = np.sort(rng.uniform(-2, 2, n))
            xs += np.arange(n) * 1e-3  # enforce strict increase
            comb = DeltaComb(xs, rng.uniform(-5, 5, n))
            for lam in (1.0, 2.5, 1j * 1.2, 0.3 + 0.1j):
                det = np.linalg.det(comb_transfer(comb, lam))
                assert abs(det - 1.0) < 1e-12

    def test_real_lambda_symmetry(self):
        # real lambda: trace and det stay real for real combs
        comb = DeltaComb([0.0, 0.5], [1.0, -1.0])
        m = comb_transfer(comb, 1.4)
        assert abs(np.trace(m).imag) < 1e-14
        assert abs(np.linalg.det(m).imag) < 1e-14
        m2 = comb_transfer(comb, -1.4)
        np.testing.assert_allclose(m, m2, atol=1e-13)  # even in lambda


class TestFamilies:
    def test_3d_zero_gamma(self):
        comb = family_3d(0.0, 1e-3)
        assert np.all(comb.strengths == 0)

    def test_3d_coefficients(self):
        comb = family_3d(2.0 / 3.0, 1e-2)
        np.testing.assert_allclose(comb.positions, [0.0, 1e-2])
        np.testing.assert_allclose(comb.strengths, [1.0 / 1e-2, -0.5 / 1e-2])

    def test_3d_pole(self):
        with pytest.raises(GammaPole):
            family_3d(2.0, 1e-3)

    def test_3d_limit_matches_lambda_of(self):
        # entrywise error <= C eps over the eps grid, all sampled gammas
        for g in (-1.5, -1.0, -2.0 / 3.0, -0.5, 0.5, 2.0 / 3.0, 1.0, 1.5):
            target = lambda_of(DeltaPrimePotential(g)).entries
            for eps in EPS_SEQ:
                m = comb_transfer(family_3d(g, eps), 1.0)
                assert np.abs(m - target).max() <= 10 * eps, (g, eps)

    def test_4d_coefficients_consistent(self):
        comb = family_4d(6.0, 1, 1e-3)
        a1, a2, a3 = comb.strengths * 1e-3
        assert abs(a2 - 12.0 / np.sqrt(32.0)) < 1e-14
        assert abs(a1 + a2 + a3) < 1e-12  # zeroth moment vanishes
        m0, m1 = comb.moments()
        assert abs(m0) < 1e-9
        assert abs(m1 - (a1 - a3)) < 1e-9  # kappa = a1 - a3 (atoms at -eps, 0, eps)

    def test_4d_limit(self):
        th = theta_of_gamma(6.0)
        for sign in (1, -1):
            m = comb_transfer(family_4d(6.0, sign, 1e-5), 1.0)
            assert np.abs(m - np.diag([th, 1.0 / th])).max() < 1e-3

    def test_4d_kappa_depends_on_sign(self):
        kp = family_4d(6.0, 1, 1e-3).moments()[1]
        km = family_4d(6.0, -1, 1e-3).moments()[1]
        assert abs(kp - km) > 1.0  # same Lambda limit, different delta' constant

    def test_4d_complex_coefficient(self):
        with pytest.raises(ComplexCoefficient):
            family_4d(1.0, 1, 1e-3)
        with pytest.raises(ComplexCoefficient):
            family_4d(2.0, 1, 1e-3)

    def test_5d_free_moments(self):
        comb = family_5d("free", 1e-3)
        m0, m1 = comb.moments()
        assert abs(m0) < 1e-9
        assert abs(m1 - 6.0) < 1e-9  # v_eps -> 6 delta'

    def test_5d_free_mollifier_oracle(self):
        # sum a_j phi(x_j) -> -6 phi'(0) for smooth phi
        phi = lambda x: np.sin(2 * x) + np.cos(x)
        target = -6.0 * 2.0  # phi'(0) = 2
        errs = []
        for eps in (1e-2, 1e-3, 1e-4):
            comb = family_5d("free", eps)
            errs.append(abs(np.sum(comb.strengths * phi(comb.positions)) - target))
        assert errs[-1] < 1e-2 and errs[0] > errs[-1]

    def test_5d_dirichlet_potential_vanishes(self):
        m0, m1 = family_5d("dirichlet", 1e-3).moments()
        assert abs(m0) < 1e-9 and abs(m1) < 1e-9


class TestPiecewisePotential:
    def test_zero_potential(self):
        pot = PiecewisePotential([0.0, 1.3], [0.0])
        np.testing.assert_allclose(
            pc_transfer(pot, 1.1), free_propagator(1.3, 1.1), atol=1e-14
        )

    def test_thin_box_is_delta(self):
        w = 1e-4
        pot = PiecewisePotential([0.0, w], [5.0 / w])
        m = pc_transfer(pot, 1.0)
        assert np.abs(m - lambda_of(Delta(5.0)).entries).max() < 1e-3

    def test_barrier_closed_form(self):
        pot = PiecewisePotential([0.0, 1.0], [4.0])
        m = pc_transfer(pot, 1.0)  # local k^2 = 1 - 4 = -3
        s3 = np.sqrt(3.0)
        expect = np.array(
            [[np.cosh(s3), np.sinh(s3) / s3], [s3 * np.sinh(s3), np.cosh(s3)]]
        )
        np.testing.assert_allclose(m, expect, atol=1e-12)

    def test_det_one(self):
        pot = PiecewisePotential([0.0, 0.5, 1.5, 2.0], [3.0, -2.0, 7.5])
        for lam in (0.5, 2.0, 1j):
            assert abs(np.linalg.det(pc_transfer(pot, lam)) - 1.0) < 1e-12

    def test_mollified_comb_agrees(self):
        w = 1e-4
        comb = DeltaComb([0.0, 0.5], [2.0, -1.0])
        pot = PiecewisePotential(
            [0.0, w, 0.5, 0.5 + w], [2.0 / w, 0.0, -1.0 / w]
        )
        np.testing.assert_allclose(
            pc_transfer(pot, 1.0), comb_transfer(comb, 1.0, x_to=0.5 + w), atol=5e-4
        )


class TestLimitDiagnose:
    def test_family_3d_limit(self):
        rep = limit_diagnose(lambda e: family_3d(2.0 / 3.0, e), 1.0, EPS_SEQ)
        assert rep.classification == LIMIT
        np.testing.assert_allclose(
            rep.limit.entries, family_3d_limit(2.0 / 3.0).entries, atol=1e-8
        )
        assert abs(rep.observed_order - 1.0) < 0.1

    def test_family_5d_free_limit(self):
        rep = limit_diagnose(lambda e: family_5d("free", e), 1.0, EPS_SEQ)
        assert rep.classification == LIMIT
        np.testing.assert_allclose(rep.limit.entries, np.eye(2), atol=1e-7)

    def test_family_5d_dirichlet(self):
        rep = limit_diagnose(lambda e: family_5d("dirichlet", e), 1.0, EPS_SEQ)
        assert rep.classification == DIRICHLET
        assert rep.limit is None

    def test_limit_is_lambda_independent(self):
        reps = [
            limit_diagnose(lambda e: family_3d(1.5, e), lam, EPS_SEQ)
            for lam in (1.0, 2.5)
        ]
        assert all(r.classification == LIMIT for r in reps)
        assert np.abs(reps[0].limit.entries - reps[1].limit.entries).max() < 1e-6
