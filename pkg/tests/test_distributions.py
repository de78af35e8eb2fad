import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from slimkms.distributions import (
    BumpFunction,
    DerivativeOfDelta,
    GeneralizedFunction,
    PointDelta,
    delta,
    density,
    lorentzian,
    pair,
    power,
    pv_inverse,
    scale,
    tensor,
)
from slimkms.errors import InputError, QuadratureError

# <exp(-x^2), unit-peak standard bump>, 20 digits from mpmath (see test below)
GOLDEN_GAUSSIAN_PAIRING = 1.0439291716994530947

unit = st.floats(0.05, 1.0)


def standard_bump(center=0.0, radius=1.0):
    return BumpFunction.standard(center, radius, 1.0)


class TestBumpFunction:
    @given(st.floats(-3, 3), st.floats(0.1, 2), st.floats(1.0, 5.0), st.booleans())
    def test_exact_zero_outside_support(self, c, r, k, left):
        phi = standard_bump(c, r)
        x = c - k * r if left else c + k * r
        assert float(phi(x)) == 0.0

    def test_peak_value(self):
        np.testing.assert_allclose(standard_bump()(0.0), 1.0, rtol=1e-15)

    def test_scale_identity(self):
        phi = standard_bump((0.2, -0.1), 0.7)
        assert phi.scale(1.0) == phi

    def test_scale_half(self):
        phi = standard_bump().scale(0.5)
        assert phi.center == (0.0,) and phi.radius == 0.5
        np.testing.assert_allclose(phi(0.0), 1.0, rtol=1e-15)

    @given(st.floats(0.01, 4), st.floats(0.01, 4), st.floats(-2, 2))
    def test_scale_composition(self, lam, mu, c):
        phi = standard_bump(c, 0.8)
        a, b = phi.scale(lam).scale(mu), phi.scale(lam * mu)
        np.testing.assert_allclose(a.center, b.center, rtol=1e-15, atol=1e-300)
        np.testing.assert_allclose(a.radius, b.radius, rtol=1e-15)

    @given(st.floats(0.05, 2.0), st.floats(-1, 1))
    def test_scaled_values(self, lam, x):
        phi = standard_bump(0.3, 0.9)
        np.testing.assert_allclose(phi.scale(lam)(lam * x), phi(x), rtol=1e-12, atol=1e-300)

    @pytest.mark.parametrize("lam", [0.0, -1.0])
    def test_scale_rejects_nonpositive(self, lam):
        with pytest.raises(InputError):
            standard_bump().scale(lam)

    def test_finite_difference_derivatives_bounded_across_edge(self):
        phi = standard_bump()
        # flat to all orders at the edge: the fourth difference stays tiny across it
        h = 1e-3
        x = np.linspace(0.985, 1.1, 231)
        d4 = (phi(x + 2 * h) - 4 * phi(x + h) + 6 * phi(x) - 4 * phi(x - h) + phi(x - 2 * h)) / h**4
        assert np.all(np.isfinite(d4))
        assert np.max(np.abs(d4)) < 1.0

    def test_derivative_against_finite_difference(self):
        phi = standard_bump(0.1, 0.9)
        h = 1e-4
        fd = float(phi(0.3 + h) - phi(0.3 - h)) / (2 * h)
        np.testing.assert_allclose(phi.derivative((1,), 0.3), fd, rtol=1e-7)

    def test_polynomial_modulation(self):
        phi = BumpFunction.standard(0.0, 1.0, 1.0, poly=(((1,), 2.0), ((0,), 1.0)))
        np.testing.assert_allclose(phi(0.5), (1 + 2 * 0.5) * math.e * math.exp(-1 / 0.75), rtol=1e-14)


class TestTensor:
    def test_peak_product(self):
        f, g = standard_bump(0.5, 1.0), BumpFunction.standard(-1.0, 0.5, 2.0)
        fg = tensor(f, g)
        np.testing.assert_allclose(fg(np.array([0.5, -1.0])), 2.0, rtol=1e-14)

    def test_support_is_product(self):
        fg = tensor(standard_bump(0.0, 1.0), standard_bump(0.0, 1.0))
        assert float(fg(np.array([1.0, 0.0]))) == 0.0
        assert float(fg(np.array([0.9, 0.0]))) > 0.0
        lo, hi = fg.support_box()
        np.testing.assert_array_equal(lo, [-1, -1])
        np.testing.assert_array_equal(hi, [1, 1])

    def test_fubini(self):
        f, g = standard_bump(0.0, 1.0), standard_bump(0.3, 0.5)
        one1 = density(lambda x: np.ones_like(np.asarray(x, float)))
        one2 = density(lambda p: np.ones(np.asarray(p).shape[0]), dim=2)
        np.testing.assert_allclose(pair(one2, tensor(f, g)), pair(one1, f) * pair(one1, g), rtol=1e-9)


class TestPairing:
    def test_delta_sifting(self):
        assert pair(delta(), standard_bump()) == pytest.approx(1.0, rel=1e-15)

    @given(st.floats(0.2, 2.0))
    def test_pv_against_even_function_vanishes(self, r):
        assert abs(pair(pv_inverse(), standard_bump(0.0, r))) < 1e-10

    def test_golden_gaussian_pairing(self):
        u = density(lambda x: np.exp(-np.asarray(x) ** 2))
        assert abs(pair(u, standard_bump()) - GOLDEN_GAUSSIAN_PAIRING) < 1e-12

    def test_golden_value_oracle(self):
        mp.mp.dps = 30
        ref = mp.quad(lambda x: mp.exp(-x * x) * mp.e * mp.exp(-1 / (1 - x * x)), [-1, 0, 1])
        assert abs(float(ref) - GOLDEN_GAUSSIAN_PAIRING) < 1e-18

    @pytest.mark.parametrize("lam", [0.5, 0.1])
    def test_jacobian_for_constant_density(self, lam):
        one = density(lambda x: np.ones_like(np.asarray(x, float)))
        phi = standard_bump(0.2, 0.6)
        np.testing.assert_allclose(pair(one, phi.scale(lam)), lam * pair(one, phi), rtol=1e-10)

    @given(st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
    def test_linearity(self, a, b):
        phi = standard_bump(0.2, 0.8)
        u, v = pv_inverse(), lorentzian(1.0)
        lhs = pair(a * u + b * v, phi)
        rhs = a * pair(u, phi) + b * pair(v, phi)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(a) + abs(b))

    def test_distant_delta_contributes_zero(self):
        phi = standard_bump(0.0, 1.0)
        u = lorentzian(1.0) + delta(7.0, at=1.5)
        for lam in (1.0, 0.5, 0.1):
            assert pair(u, phi.scale(lam)) == pair(lorentzian(1.0), phi.scale(lam))

    @pytest.mark.parametrize("dim,a", [(1, 0.5), (2, 1.0), (3, 2.2)])
    def test_jacobian_law_homogeneous(self, dim, a):
        u = power(a, dim=dim)
        phi = standard_bump((0.1,) * dim, 1.0)
        base = pair(u, phi)
        for lam in (1.0, 0.5, 0.25, 0.125):
            np.testing.assert_allclose(pair(u, phi.scale(lam)), lam ** (dim - a) * base, rtol=1e-8)

    def test_power_against_polar_quadrature(self):
        val = pair(power(1.0, dim=2), standard_bump((0.0, 0.0), 1.0))
        ref = 2 * math.pi * integrate.quad(lambda r: math.e * math.exp(-1 / (1 - r * r)), 0, 1, epsabs=1e-14)[0]
        np.testing.assert_allclose(val.real, ref, rtol=1e-10)

    def test_off_center_power_against_scipy(self):
        phi = standard_bump(0.4, 1.0)
        val = pair(power(0.5), phi)
        ref = sum(
            integrate.quad(lambda x: abs(x) ** -0.5 * float(phi(x)), a, b, epsabs=1e-13, limit=200)[0]
            for a, b in ((-0.6, 0.0), (0.0, 1.4))
        )
        np.testing.assert_allclose(val.real, ref, rtol=1e-9)

    def test_pv_against_folded_oracle(self):
        phi = standard_bump(0.3, 1.0)
        ref = integrate.quad(lambda r: (float(phi(r)) - float(phi(-r))) / r, 0, 1.3, epsabs=1e-14)[0]
        np.testing.assert_allclose(pair(pv_inverse(), phi).real, ref, rtol=1e-10)

    def test_derivative_of_delta(self):
        phi = standard_bump(0.2, 1.0)
        u = GeneralizedFunction(1, (DerivativeOfDelta((1,), 1.0, (0.0,)),))
        np.testing.assert_allclose(pair(u, phi).real, -phi.derivative((1,), 0.0), rtol=1e-12)

    def test_non_integrable_power_rejected(self):
        with pytest.raises(InputError):
            pair(power(2.0, dim=2), standard_bump((0.0, 0.0)))

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            pair(delta(dim=2), standard_bump())

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_quadrature_failure_carries_estimate(self):
        u = density(lambda x: np.sin(1e5 * np.asarray(x)) * np.abs(np.asarray(x) - 0.1) ** -0.9)
        with pytest.raises(QuadratureError) as exc:
            pair(u, standard_bump(), tol=1e-14)
        assert exc.value.estimate > 1e-14

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_integrand_raises(self):
        u = density(lambda x: np.abs(np.asarray(x)) ** -0.99)
        with pytest.raises(QuadratureError):
            pair(u, standard_bump())

    def test_scale_function_alias(self):
        phi = standard_bump()
        assert scale(phi, 0.5) == phi.scale(0.5)
        assert isinstance(PointDelta().pair(phi, 1e-10), (float, complex))
