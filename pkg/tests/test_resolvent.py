import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from fracresolvent import (
    ContourError,
    DomainError,
    OperatorFamily,
    Regularizer,
    WeightError,
    WeightSpec,
    bessel_spec,
    bessel_subordinate,
    commutation_residual,
    compare_integration_orders,
    construct_family,
    contour_family,
    family_to_csv,
    from_matrix,
    growth_estimate,
    inverse,
    make_power,
    mittag_leffler,
    subgenerator_inclusion_residual,
    subordinate_general,
    verify_existence_eq,
    verify_inverse_laplace_conditions,
    verify_uniqueness_eq,
    wright_spec,
    wright_subordinate,
)
from fracresolvent.resolvent import laplace_gap

G1, G2 = make_power(1), make_power(2)
SHORT = np.geomspace(1e-2, 10, 15)


@pytest.fixture(scope="module")
def decay():
    # e^(-t): the semigroup of the scalar operator -1
    return construct_family(from_matrix(-1), 1, G1, G1)


@pytest.fixture(scope="module")
def integrated():
    return construct_family(from_matrix(-1), 1, G1, G2)


@pytest.fixture(scope="module")
def bessel_out(decay):
    return bessel_subordinate(decay, 0, 1)


@pytest.fixture(scope="module")
def wright_out(decay):
    return wright_subordinate(decay, -0.5, 2, 0, 0, 0, grid=SHORT)


def _sampled_exp(grid):
    mats = np.exp(-grid)[:, None, None].astype(complex)
    return OperatorFamily(grid, mats, G1, G1, Regularizer.identity(1), from_matrix(-1))


class TestConstruct:
    def test_semigroup(self, decay):
        np.testing.assert_allclose(decay.scalar(), np.exp(-decay.grid), atol=1e-7)

    def test_half_order_kernel(self):
        fam = construct_family(from_matrix(-1), 1, make_power(0.5), G1)
        ref = mittag_leffler(0.5, 1, -np.sqrt(fam.grid))
        np.testing.assert_allclose(fam.scalar(), ref, atol=1e-6)

    def test_inverse_generator(self):
        fam = construct_family(inverse(from_matrix(-2)), 1, G1, G1)
        np.testing.assert_allclose(fam.scalar(), np.exp(-fam.grid / 2), atol=1e-7)

    def test_default_grid(self, decay):
        assert decay.grid.size == 60
        assert decay.grid[0] == pytest.approx(1e-3) and decay.grid[-1] == pytest.approx(20.0)

    def test_matrix_semigroup_property(self):
        A = np.array([[-1.0, 0.7], [-0.4, -2.0]])
        fam = construct_family(from_matrix(A), np.eye(2), G1, G1)
        for t, s in [(0.3, 0.5), (1.0, 2.0), (0.05, 4.0)]:
            lhs = fam.at(np.array([t + s]))[0]
            rhs = fam.at(np.array([t]))[0] @ fam.at(np.array([s]))[0]
            np.testing.assert_allclose(lhs, rhs, atol=1e-6)
            np.testing.assert_allclose(lhs, expm(A * (t + s)), atol=1e-6)

    def test_commutes_with_regularizer(self):
        A = np.diag([-1.0, -3.0])
        C = np.diag([1.0, 0.5])
        fam = construct_family(from_matrix(A), C, G1, G1)
        assert commutation_residual(fam) <= 1e-10
        assert subgenerator_inclusion_residual(fam) <= 1e-8

    def test_strong_continuity(self, decay):
        fine = np.linspace(0.5, 0.6, 11)
        jumps = np.linalg.norm(np.diff(decay.at(fine), axis=0), axis=(1, 2))
        assert np.max(jumps) < 0.01

    def test_integrated_family_vanishes_at_zero(self, integrated):
        assert abs(integrated.at(np.array([1e-6]))[0, 0, 0]) < 1e-5
        assert integrated.at(np.array([0.0]))[0, 0, 0] == 0


class TestTimeDomainEquations:
    def test_semigroup_residuals(self, decay):
        G = from_matrix(-1)
        assert verify_uniqueness_eq(decay, G) <= 5e-4
        assert verify_existence_eq(decay, G) <= 5e-4

    def test_residual_shrinks_with_refinement(self):
        G = from_matrix(-1)
        coarse = verify_uniqueness_eq(_sampled_exp(np.linspace(0.001, 5, 50)), G)
        fine = verify_uniqueness_eq(_sampled_exp(np.linspace(0.001, 5, 400)), G)
        assert fine < coarse / 20
        assert verify_existence_eq(_sampled_exp(np.linspace(0.001, 5, 400)), G) < 1e-4

    def test_integrated_family(self, integrated):
        G = from_matrix(-1)
        np.testing.assert_allclose(integrated.scalar(), 1 - np.exp(-integrated.grid), atol=1e-7)
        assert verify_uniqueness_eq(integrated, G) <= 5e-4
        assert verify_existence_eq(integrated, G) <= 5e-4

    def test_mismatch_detected(self, decay):
        G = from_matrix(-2)
        assert verify_uniqueness_eq(decay, G) >= 0.1
        assert verify_existence_eq(decay, G) >= 0.1


class TestLaplaceConditions:
    def test_inverse_generator_family(self):
        fam = construct_family(inverse(from_matrix(2)), 1, G1, G1)
        np.testing.assert_allclose(fam.scalar(), np.exp(fam.grid / 2), rtol=1e-7)
        res = verify_inverse_laplace_conditions(fam, from_matrix(2), lam_samples=(2.0,))
        assert max(res.values()) <= 1e-7

    def test_bessel_output(self, bessel_out):
        res = verify_inverse_laplace_conditions(bessel_out, from_matrix(-1), lam_samples=(1.0,))
        assert max(res.values()) <= 1e-6

    def test_duality_with_swapped_pairs(self, bessel_out):
        res = verify_inverse_laplace_conditions(bessel_out, from_matrix(-1), lam_samples=(1.0, 2.0, 1.5 + 2j))
        assert res["aren"] <= 1e-6

    def test_perturbed_family(self, bessel_out):
        f = bessel_out
        scaled = OperatorFamily(f.grid, 1.01 * f.mats, f.kernel_a, f.kernel_k, f.regularizer, f.subgen, f.growth,
                                lambda t: 1.01 * f.evaluator(t))
        res = verify_inverse_laplace_conditions(scaled, from_matrix(-1), lam_samples=(1.0,))
        assert max(res.values()) >= 1e-3

    def test_samples_right_of_growth(self):
        from fracresolvent import TailError

        fam = construct_family(inverse(from_matrix(2)), 1, G1, G1)
        with pytest.raises(TailError):
            verify_inverse_laplace_conditions(fam, from_matrix(2), lam_samples=(0.25,))


class TestBessel:
    def test_once_integrated_output(self, bessel_out):
        assert bessel_out.at(np.array([1.0]))[0, 0, 0].real == pytest.approx(0.632121, abs=1e-6)
        np.testing.assert_allclose(bessel_out.scalar(), 1 - np.exp(-bessel_out.grid), atol=1e-6)
        assert bessel_out.kernel_k.alpha == 2.0

    def test_fractional_gamma_transform(self, decay):
        out = bessel_subordinate(decay, 0, 0.6, grid=SHORT)
        assert out.laplace(1.0)[0, 0, 0] == pytest.approx(0.5, abs=1e-12)
        assert laplace_gap(out, [1.0], lambda lam: lam**-1.6 - lam**-2.6 / (1 + 1 / lam)) <= 1e-5

    def test_degenerate_zero_operator(self):
        # the inverse of 0 is {0} x C, and R = 0 satisfies the defining equation
        Z = from_matrix(0)
        S = construct_family(Z, 1, G1, G1, grid=SHORT)
        out = bessel_subordinate(S, 0, 1, grid=np.geomspace(0.05, 5, 6))
        assert np.max(np.abs(out.mats)) <= 1e-8
        # checked on the samples; re-evaluating the oscillatory tail on the dense grid is slow
        sampled = OperatorFamily(out.grid, out.mats, out.kernel_a, out.kernel_k, out.regularizer, out.subgen)
        assert verify_uniqueness_eq(sampled, inverse(Z)) <= 1e-8

    def test_weight_conditions(self, decay):
        with pytest.raises(WeightError):
            bessel_subordinate(decay, 0, 0.5)
        with pytest.raises(DomainError):
            bessel_subordinate(decay, -1, 1)

    def test_extended_weight_mode(self, decay):
        out = bessel_subordinate(decay, 0, 1, delta=0.2, grid=SHORT)
        assert out.growth.weight.kind == "mixed"
        np.testing.assert_allclose(out.scalar(), 1 - np.exp(-SHORT), atol=1e-6)
        with pytest.raises(WeightError):
            bessel_subordinate(decay, 0, 0.8, delta=0.2)

    def test_unbounded_input_rejected(self):
        growing = construct_family(from_matrix(0.5), 1, G1, G1)
        with pytest.raises(WeightError):
            bessel_subordinate(growing, 0, 1)

    def test_weighted_bound(self, bessel_out):
        assert math.isfinite(growth_estimate(bessel_out, WeightSpec.power(1)))
        assert growth_estimate(bessel_out, WeightSpec.power(1)) <= 1.0


class TestWright:
    def test_half_order_output(self, wright_out):
        ref = np.sqrt(SHORT) * mittag_leffler(0.5, 1.5, -np.sqrt(SHORT))
        np.testing.assert_allclose(wright_out.scalar(), ref, atol=1e-8)
        assert wright_out.kernel_a.alpha == 0.5
        assert wright_out.kernel_k.alpha == 1.5

    def test_order_condition(self, decay):
        with pytest.raises(WeightError):
            wright_subordinate(decay, -0.5, 1.5, 1, 0, 0)
        with pytest.raises(WeightError):
            wright_subordinate(decay, -0.5, 2, 0, 0.5, 1)
        with pytest.raises(DomainError):
            wright_subordinate(decay, -1.5, 2, 0, 0, 0)

    def test_small_sigma_limit(self, decay):
        out = wright_subordinate(decay, -0.05, 2, 0, 0, 0, grid=np.geomspace(0.05, 5, 8))
        assert out.kernel_k.alpha == pytest.approx(1.05)
        # S0~(2) = 2^(-1 - 0.1) R~(2^(-0.05)) against the quadrature transform
        ref = 2.0 ** (-1.05) - 2.0 ** (-1.1) / (2.0 ** (-0.05) + 1)
        assert out.laplace(2.0)[0, 0, 0] == pytest.approx(ref, abs=1e-12)
        assert laplace_gap(out, [2.0], out.symbol) <= 1e-4

    def test_weight_bounds_family(self, wright_out):
        w = wright_out.growth.weight
        assert w.kind == "wright_F"
        assert math.isfinite(growth_estimate(wright_out, w))


class TestGeneral:
    def test_bessel_route(self, decay, bessel_out):
        out = subordinate_general(decay, bessel_spec(0, 1), grid=SHORT)
        np.testing.assert_allclose(out.mats, bessel_out.at(SHORT), atol=1e-5)
        assert verify_uniqueness_eq(out, inverse(from_matrix(-1))) <= 5e-4

    def test_wright_route(self, decay, wright_out):
        out = subordinate_general(decay, wright_spec(-0.5, 2, 0), grid=SHORT)
        np.testing.assert_allclose(out.mats, wright_out.mats, atol=1e-5)
        assert verify_uniqueness_eq(out, inverse(from_matrix(-1))) <= 5e-4

    def test_degenerate_case(self):
        # A = 0, R(t) = k(t): then S0 = k1 and S vanishes
        Z = from_matrix(0)
        ones = OperatorFamily(SHORT, np.ones((SHORT.size, 1, 1), complex), G1, G1, Regularizer.identity(1), Z,
                              evaluator=lambda t: np.ones((np.size(t), 1, 1), complex),
                              symbol=lambda lam: (1 / np.atleast_1d(lam))[:, None, None], poles=(0j,))
        out = subordinate_general(ones, bessel_spec(0, 1), grid=SHORT)
        np.testing.assert_allclose(out.mats, 0, atol=1e-10)
        assert verify_uniqueness_eq(out, inverse(Z)) <= 1e-10


class TestLaplaceCommutes:
    LAMS = np.random.default_rng(3).uniform(0.5, 4, 10) + 1j * np.random.default_rng(4).uniform(-3, 3, 10)

    def test_bessel(self, bessel_out):
        assert laplace_gap(bessel_out, self.LAMS, bessel_out.symbol) <= 1e-5

    def test_wright(self, wright_out):
        # the symbol formula evaluated directly, not through the family
        lams = self.LAMS

        def formula(lam):
            return lam**-1.5 - lam**-2 / (lam**-0.5 + 1)

        assert laplace_gap(wright_out, lams, formula) <= 1e-5

    def test_general(self, decay):
        out = subordinate_general(decay, bessel_spec(0, 0.6), grid=SHORT)
        assert laplace_gap(out, self.LAMS, lambda lam: lam**-1.6 - lam**-2.6 / (1 + 1 / lam)) <= 1e-5


class TestContour:
    def test_scalar(self):
        G = from_matrix(-1)
        assert contour_family(G, 1, 1, math.pi / 12, 0.1, 1.0)[0, 0] == pytest.approx(math.exp(-1), abs=1e-6)
        assert contour_family(G, 1, 1, math.pi / 12, 0.1, 1e-9)[0, 0] == pytest.approx(1.0, abs=1e-6)
        assert contour_family(G, 1, 1, math.pi / 12, 0.1, 0)[0, 0] == 1.0

    def test_diagonal(self):
        G = from_matrix(np.diag([-1.0, -4.0]))
        out = contour_family(G, np.eye(2), 1, math.pi / 12, 0.1, 1.0)
        np.testing.assert_allclose(out, np.diag([math.exp(-1), math.exp(-0.25)]), atol=1e-6)

    def test_complex_time_and_fractional_order(self):
        G = from_matrix(-1)
        z = 1.0 + 0.1j
        assert contour_family(G, 1, 1, math.pi / 12, 0.1, z)[0, 0] == pytest.approx(np.exp(-z), abs=1e-6)
        # R~(lam) = lam^-1 - lam^(-alpha-1) / (lam^-alpha + 1), i.e. R = E_alpha(-t^alpha)
        out = contour_family(G, 1, 1.5, math.pi / 12, 0.1, 1.0)[0, 0]
        assert out == pytest.approx(mittag_leffler(1.5, 1, -1.0), abs=1e-6)

    def test_shift_limit(self):
        G = from_matrix(-1)
        vals = [contour_family(G, 1, 1, math.pi / 12, w, 1.0)[0, 0] for w in (0.5, 0.1, 0.02)]
        assert max(abs(v - vals[-1]) for v in vals) <= 1e-6

    def test_errors(self):
        G = from_matrix(-1)
        with pytest.raises(DomainError):
            contour_family(G, 1, 2.5, math.pi / 12, 0.1, 1.0)
        with pytest.raises(DomainError):
            contour_family(G, 1, 1, math.pi / 12, 0.1, 1j)
        with pytest.raises(ContourError):
            contour_family(from_matrix(1), 1, 1, math.pi / 12, 0.1, 2.0)


class TestGrowth:
    def test_examples(self, decay, integrated, wright_out):
        assert growth_estimate(integrated, WeightSpec.power(1)) == pytest.approx(1.0, abs=1e-3)
        assert growth_estimate(decay, WeightSpec.exp(0)) == pytest.approx(1.0, abs=1e-3)
        w = WeightSpec.wright_F(-0.5, 2, 0, 0, 0)
        assert 0 < growth_estimate(wright_out, w) < 10

    def test_weight_values(self):
        w = WeightSpec.wright_F(-0.5, 3, 0, 0.2, 0.5)
        t = np.array([0.25, 4.0])
        expected = [0.25**1 + 0.25**0.75, 4.0**1 + 4.0**0.9]
        np.testing.assert_allclose(w(t), expected)
        assert w.integration_order == 1.0
        assert WeightSpec.mixed(1.2, 1, 0.5)(2.0) == pytest.approx(2**1.2 * (1 + 2**0.5 + 2))


class TestIntegrationOrders:
    def test_scalar_case(self, wright_out):
        cmp = compare_integration_orders(wright_out.growth.weight)
        assert cmp.wright_order == pytest.approx(0.5)
        assert not cmp.predicted and not cmp.wright_better

    def test_smaller_order(self):
        cmp = compare_integration_orders(WeightSpec.wright_F(-0.5, 1.5, 0, 0, 0))
        assert cmp.wright_order == pytest.approx(0.25)
        assert cmp.predicted and cmp.wright_better

    @given(st.floats(-0.95, -0.05), st.floats(0, 2), st.floats(0, 1.5), st.floats(0.05, 3))
    @settings(max_examples=200, deadline=None)
    def test_prediction_matches(self, sigma, beta, b, slack):
        eta = max(1 + b, 1 + beta) + slack
        cmp = compare_integration_orders(WeightSpec.wright_F(sigma, eta, beta, 0, b))
        margin = abs(sigma) * (eta - 2 * b - 1) - 0.5
        if abs(margin) > 1e-9:
            assert cmp.wright_better == cmp.predicted

    def test_requires_wright_weight(self):
        with pytest.raises(DomainError):
            compare_integration_orders(WeightSpec.power(1))


def test_csv_export(tmp_path, decay):
    path = tmp_path / "fam.csv"
    family_to_csv(decay, path, times=[0.5, 1.0])
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "re_0_0", "im_0_0"]
    assert float(rows[2][0]) == 1.0
    assert float(rows[2][1]) == pytest.approx(math.exp(-1), abs=1e-7)
