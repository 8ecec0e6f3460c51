import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from tsindep import DataError, chi2_quantile, chi2_sf, norm_sf
from tsindep.crosscorr import daniell


def chi2_sf_quadrature(x, df):
    """Independent oracle: adaptive quadrature of the chi-square density."""

    def density(t):
        return t ** (df / 2.0 - 1.0) * math.exp(-t / 2.0) / (2 ** (df / 2.0) * math.gamma(df / 2.0))

    value, _ = integrate.quad(density, x, np.inf, limit=400)
    return value


def norm_sf_quadrature(z):
    def density(t):
        return math.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)

    value, _ = integrate.quad(density, z, np.inf, limit=400)
    return value


class TestChi2Sf:
    def test_at_zero(self):
        for df in (1, 2, 5, 28):
            assert chi2_sf(0.0, df) == 1.0

    def test_known_quantile(self):
        assert abs(chi2_sf(3.8415, 1) - 0.05) < 1e-4

    @pytest.mark.parametrize("df", [1, 2, 5, 10, 28])
    def test_against_quadrature(self, df):
        for x in np.linspace(0.05, 6.0 * df, 10):
            assert abs(chi2_sf(float(x), df) - chi2_sf_quadrature(float(x), df)) < 1e-10

    def test_input_validation(self):
        with pytest.raises(DataError):
            chi2_sf(-1.0, 2)
        with pytest.raises(DataError):
            chi2_sf(float("nan"), 2)
        with pytest.raises(DataError):
            chi2_sf(1.0, 0)


class TestNormSf:
    def test_symmetry_point(self):
        assert norm_sf(0.0) == 0.5

    def test_against_quadrature(self):
        for z in np.linspace(-5.0, 5.0, 50):
            assert abs(norm_sf(float(z)) - norm_sf_quadrature(float(z))) < 1e-12

    def test_complement(self):
        for z in (-2.0, -0.3, 0.7, 3.1):
            assert_allclose(norm_sf(z) + norm_sf(-z), 1.0, rtol=1e-14)


class TestChi2Quantile:
    @pytest.mark.parametrize("df", [1, 3, 9, 28])
    @pytest.mark.parametrize("p", [0.5, 0.9, 0.95, 0.99])
    def test_roundtrip(self, df, p):
        q = chi2_quantile(p, df)
        assert_allclose(1.0 - chi2_sf(q, df), p, atol=1e-9)

    def test_known_value(self):
        assert abs(chi2_quantile(0.95, 1) - 3.841459) < 1e-5

    def test_validation(self):
        with pytest.raises(DataError):
            chi2_quantile(1.2, 3)


class TestDaniell:
    def test_special_points(self):
        assert daniell(0.0) == 1.0
        assert_allclose(daniell(1.0), 0.0, atol=1e-15)
        assert_allclose(daniell(0.5), math.sin(math.pi * 0.5) / (math.pi * 0.5), rtol=1e-14)

    def test_even(self):
        z = np.linspace(-3, 3, 41)
        assert_allclose(daniell(z), daniell(-z), rtol=1e-14)

    def test_square_integral_is_one(self):
        # A1 = integral of the squared kernel: piecewise quadrature plus an
        # analytic tail bound correction.
        cut = 2000
        total = 0.0
        for j in range(cut):
            val, _ = integrate.quad(lambda z: daniell(z) ** 2, j, j + 1, limit=100)
            total += val
        tail = 1.0 / (2.0 * math.pi**2 * cut)
        a1 = 2.0 * (total + tail)
        assert abs(a1 - 1.0) < 1e-6

    def test_fourth_power_integral_two_thirds(self):
        cut = 300
        total = 0.0
        for j in range(cut):
            val, _ = integrate.quad(lambda z: daniell(z) ** 4, j, j + 1, limit=100)
            total += val
        tail = (3.0 / 8.0) / (math.pi**4 * 3.0 * cut**3)  # sin^4 has mean 3/8
        b1 = 2.0 * (total + tail)
        assert abs(b1 - 2.0 / 3.0) < 1e-6
