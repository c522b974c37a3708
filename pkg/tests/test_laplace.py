import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracresolvent import (
    ContourError,
    ContourSpec,
    DomainError,
    ExpRegion,
    SampledFunction,
    TailError,
    contour_nodes,
    exp_region_check,
    forward_transform,
    g_kernel,
    invert,
    verify_bessel_identity,
    verify_wright_identity,
)


class TestForward:
    def test_examples(self):
        assert forward_transform(lambda t: np.ones_like(t), 2.0) == pytest.approx(0.5, abs=1e-8)
        assert forward_transform(lambda t: g_kernel(0.5, t), 1.0) == pytest.approx(1.0, abs=1e-8)
        assert forward_transform(lambda t: np.exp(-t), 1.0) == pytest.approx(0.5, abs=1e-8)

    def test_sampled_input(self):
        t = np.linspace(1e-4, 60, 20001)
        f = SampledFunction(t, np.exp(-t))
        assert forward_transform(f, 1.0) == pytest.approx(0.5, abs=1e-6)

    def test_array_of_lambdas_and_matrix_values(self):
        lams = np.array([1.0, 2.0 + 1j, 3.5])
        out = forward_transform(lambda t: np.stack([np.exp(-t), np.exp(-2 * t)], axis=-1), lams)
        np.testing.assert_allclose(out[:, 0], 1 / (lams + 1), atol=1e-9)
        np.testing.assert_allclose(out[:, 1], 1 / (lams + 2), atol=1e-9)

    def test_growth_rate_respected(self):
        with pytest.raises(TailError):
            forward_transform(lambda t: np.exp(t), 0.5, growth=1.0)

    def test_tail_not_certified(self):
        with pytest.raises(TailError):
            forward_transform(lambda t: np.exp(0.9 * t), 1.0, truncation=5.0)


class TestInvert:
    def test_examples(self):
        assert invert(lambda s: 1 / s, 1.0) == pytest.approx(1.0, rel=1e-7)
        assert invert(lambda s: 1 / (s + 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-7)
        assert invert(lambda s: s**-1.5, 1.0) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-7)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_round_trip(self, c):
        t = np.linspace(0.1, 5, 40)
        np.testing.assert_allclose(invert(lambda s: 1 / (s + c), t).real, np.exp(-c * t), rtol=1e-7, atol=1e-12)

    def test_matrix_valued(self):
        A = np.array([[-1.0, 0.5], [0.0, -2.0]])

        def F(s):
            return np.linalg.inv(s[:, None, None] * np.eye(2) - A)

        out = invert(F, 1.0)
        from scipy.linalg import expm

        np.testing.assert_allclose(out, expm(A), atol=1e-9)

    def test_bromwich_and_sector_agree(self):
        F = lambda s: 1 / (s * (s + 1))  # noqa: E731
        ref = 1 - math.exp(-1)
        assert invert(F, 1.0, ContourSpec("bromwich", shift=1.0)) == pytest.approx(ref, abs=1e-6)
        assert invert(F, 1.0, ContourSpec("shifted_sector", shift=0.2)) == pytest.approx(ref, abs=1e-8)

    def test_poles_outside_contour(self):
        # a pole with large imaginary part is picked up through its residue
        p = -0.1 + 40j
        F = lambda s: 1 / (s - p)  # noqa: E731
        got = invert(F, 3.0, poles=[p])
        assert got == pytest.approx(np.exp(3.0 * p), rel=1e-7)

    def test_nonfinite_symbol(self):
        with pytest.raises(ContourError):
            invert(lambda s: np.full(s.shape, np.nan, dtype=complex), 1.0)

    def test_time_must_be_positive(self):
        with pytest.raises(DomainError):
            invert(lambda s: 1 / s, 0.0)

    @given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.5, 4.0), st.floats(-3.0, 3.0))
    @settings(max_examples=25, deadline=None)
    def test_forward_inverse_duality(self, c1, c2, x, y):
        F = lambda s: 1 / ((s + c1) * (s + c2 + 1j))  # noqa: E731
        lam = complex(x, y)
        # f(0) = 0 and f is smooth, so the quadrature nodes next to 0 can be clamped; the
        # pole list keeps large t accurate once the Talbot contour shrinks past the poles
        poles = [-c1, -c2 - 1j]
        back = forward_transform(lambda t: invert(F, np.maximum(t, 1e-8), poles=poles), lam)
        assert abs(back - F(lam)) <= 1e-5


class TestContourSpec:
    def test_validation(self):
        with pytest.raises(DomainError):
            ContourSpec("parabola")
        with pytest.raises(DomainError):
            ContourSpec(nodes=4)
        with pytest.raises(DomainError):
            ContourSpec("shifted_sector", sector_angle=0.4)

    def test_sector_nodes_integrate_exp(self):
        lam, w = contour_nodes(ContourSpec("shifted_sector", shift=0.5), 1.0)
        # (1/2 pi i) int e^lam / lam dlam = 1 around the origin
        assert np.sum(w * np.exp(lam) / lam) == pytest.approx(1.0, abs=1e-10)

    def test_bromwich_has_no_node_set(self):
        with pytest.raises(DomainError):
            contour_nodes(ContourSpec("bromwich"), 1.0)


class TestIdentities:
    def test_bessel_examples(self):
        assert verify_bessel_identity(0, 1, 1) <= 1e-6
        assert verify_bessel_identity(1, 2, 1) <= 1e-6
        # closed side is t^(1/2) e^(-t) -> 0, and the quadrature follows it
        assert verify_bessel_identity(0, 1, 1e-8) <= 1e-6

    def test_wright_examples(self):
        assert verify_wright_identity(0.5, 0, 1, 1) <= 1e-6
        assert verify_wright_identity(0.5, 2, 1, 1) <= 1e-6

    def test_wright_small_s_limit(self):
        assert verify_wright_identity(0.5, 1, 1e-9, 1.5) <= 1e-6

    @given(st.floats(0, 3), st.floats(0.5, 4), st.floats(-4, 4), st.floats(0.2, 5))
    @settings(max_examples=30, deadline=None)
    def test_bessel_box(self, beta, x, y, t):
        assert verify_bessel_identity(beta, complex(x, y), t) <= 1e-6

    @given(st.sampled_from([0.25, 0.5, 0.75]), st.floats(-1, 3), st.floats(0.5, 2), st.floats(0.5, 4), st.floats(-4, 4))
    @settings(max_examples=30, deadline=None)
    def test_wright_box(self, rho, v, s, x, y):
        assert verify_wright_identity(rho, v, s, complex(x, y)) <= 1e-6

    def test_preconditions(self):
        with pytest.raises(DomainError):
            verify_bessel_identity(-0.5, 1, 1)
        with pytest.raises(TailError):
            verify_bessel_identity(0, -1, 1)
        with pytest.raises(DomainError):
            verify_wright_identity(1.5, 0, 1, 1)
        with pytest.raises(DomainError):
            verify_wright_identity(0.5, -3, 1, 1)


class TestExpRegion:
    def test_examples(self):
        r = exp_region_check(ExpRegion(1, 1), 2)
        assert r.member and r.inverse_in_strip
        assert not exp_region_check(ExpRegion(1, 1), 0.5).member
        assert not exp_region_check(ExpRegion(1, 2), 2 + 1j * math.e**2 * 1.01).member

    def test_invalid_region(self):
        with pytest.raises(DomainError):
            ExpRegion(0, 1)

    def test_random_members_map_into_strip(self):
        rng = np.random.default_rng(7)
        for a, b in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.3)]:
            region = ExpRegion(a, b)
            re = b + rng.exponential(2.0, 1000)
            im = rng.uniform(-1, 1, 1000) * np.exp(a * re)
            for lam in re + 1j * im:
                res = exp_region_check(region, lam)
                assert res.member and res.inverse_in_strip
