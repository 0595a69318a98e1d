import math

import mpmath
import numpy as np
import pytest

from cvteleport import specfun

mpmath.mp.dps = 50


def i0_oracle(x):
    """Power-series summation of I0 at 50 digits."""
    x = mpmath.mpf(x)
    q = x * x / 4
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    k = 1
    while True:
        term *= q / (k * k)
        total += term
        if term < total * mpmath.mpf("1e-40"):
            return float(total)
        k += 1


def i1_oracle(x):
    x = mpmath.mpf(x)
    q = x * x / 4
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    k = 1
    while True:
        term *= q / (k * (k + 1))
        total += term
        if term < total * mpmath.mpf("1e-40"):
            return float(x / 2 * total)
        k += 1


def w0_oracle(x):
    """Newton iteration on w*exp(w) - x at 50 digits."""
    x = mpmath.mpf(x)
    w = mpmath.log1p(x)
    for _ in range(200):
        ew = mpmath.exp(w)
        step = (w * ew - x) / (ew * (w + 1))
        w -= step
        if abs(step) < mpmath.mpf("1e-40") * max(abs(w), mpmath.mpf("1e-45")):
            break
    return float(w)


class TestBesselI0:
    def test_at_zero(self):
        assert specfun.bessel_i0(0.0) == 1.0

    def test_frozen_value(self):
        assert specfun.bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-14)

    def test_even_symmetry(self):
        for x in [0.3, 2.0, 17.0, 250.0]:
            assert specfun.bessel_i0(-x) == specfun.bessel_i0(x)

    @pytest.mark.parametrize("x", [1e-6, 0.1, 1.0, 5.0, 14.9, 15.0, 15.1, 30.0, 100.0, 400.0, 700.0])
    def test_against_series_oracle(self, x):
        assert specfun.bessel_i0(x) == pytest.approx(i0_oracle(x), rel=1e-12)

    def test_switchover_region(self):
        for x in np.linspace(14.0, 16.0, 41):
            assert specfun.bessel_i0(float(x)) == pytest.approx(i0_oracle(x), rel=1e-12)

    def test_overflow_signal(self):
        with pytest.raises(OverflowError):
            specfun.bessel_i0(720.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            specfun.bessel_i0(math.inf)


class TestBesselI1:
    def test_at_zero(self):
        assert specfun.bessel_i1(0.0) == 0.0

    def test_frozen_value(self):
        assert specfun.bessel_i1(1.0) == pytest.approx(0.5651591039924850, rel=1e-14)

    def test_odd_symmetry(self):
        for x in [0.3, 2.0, 17.0, 250.0]:
            assert specfun.bessel_i1(-x) == -specfun.bessel_i1(x)

    def test_leading_series_term(self):
        for x in [1e-8, 1e-10, 1e-12]:
            assert specfun.bessel_i1(x) == pytest.approx(x / 2, rel=1e-12)

    @pytest.mark.parametrize("x", [1e-6, 0.1, 1.0, 5.0, 14.9, 15.0, 15.1, 30.0, 100.0, 400.0, 700.0])
    def test_against_series_oracle(self, x):
        assert specfun.bessel_i1(x) == pytest.approx(i1_oracle(x), rel=1e-12)

    def test_overflow_signal(self):
        with pytest.raises(OverflowError):
            specfun.bessel_i1(720.0)


class TestScaledVariants:
    @pytest.mark.parametrize("x", [0.05, 1.0, 14.99, 15.01, 80.0, 700.0, 5000.0])
    def test_i0_scaled(self, x):
        expected = float(mpmath.besseli(0, x) * mpmath.exp(-x))
        assert specfun.bessel_i0_scaled(x) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("x", [0.05, 1.0, 14.99, 15.01, 80.0, 700.0, 5000.0])
    def test_i1_scaled(self, x):
        expected = float(mpmath.besseli(1, x) * mpmath.exp(-x))
        assert specfun.bessel_i1_scaled(x) == pytest.approx(expected, rel=1e-12)

    def test_scaled_symmetries(self):
        assert specfun.bessel_i0_scaled(-3.0) == specfun.bessel_i0_scaled(3.0)
        assert specfun.bessel_i1_scaled(-3.0) == -specfun.bessel_i1_scaled(3.0)


class TestLambertW0:
    def test_at_zero(self):
        assert specfun.lambert_w0(0.0) == 0.0

    def test_at_e(self):
        assert specfun.lambert_w0(math.e) == pytest.approx(1.0, rel=1e-14)

    def test_frozen_value(self):
        assert specfun.lambert_w0(1.0) == pytest.approx(0.5671432904097838, rel=1e-14)

    @pytest.mark.parametrize("x", [1e-12, 1e-3, 0.5, 3.0, 55.0, 1e4, 1e10, 1e100, 1e305])
    def test_against_newton_oracle(self, x):
        assert specfun.lambert_w0(x) == pytest.approx(w0_oracle(x), rel=1e-13)

    def test_defining_identity_on_range(self):
        for x in np.linspace(0.0, 100.0, 211):
            w = specfun.lambert_w0(float(x))
            assert w >= 0.0
            assert w * math.exp(w) == pytest.approx(float(x), rel=1e-11, abs=1e-300)

    def test_residual_tolerance(self):
        for x in [0.01, 1.0, 20.0, 500.0]:
            w = specfun.lambert_w0(x)
            assert abs(w * math.exp(w) - x) <= 1e-12 * x

    def test_domain_error(self):
        with pytest.raises(ValueError):
            specfun.lambert_w0(-0.1)

    def test_result_flag(self):
        res = specfun.lambert_w0_result(7.0)
        assert res.converged
        assert math.isfinite(res.value)


class TestProperties:
    def test_derivative_identity(self):
        # d/dx I0(x) = I1(x), central differences
        for x in np.linspace(0.1, 20.0, 20):
            h = 1e-6 * max(1.0, x)
            fd = (specfun.bessel_i0(x + h) - specfun.bessel_i0(x - h)) / (2 * h)
            assert fd == pytest.approx(specfun.bessel_i1(float(x)), rel=1e-6)

    def test_monotone_nondecreasing(self):
        grid = np.linspace(0.0, 60.0, 301)
        for f in (specfun.bessel_i0, specfun.bessel_i1, specfun.lambert_w0):
            vals = [f(float(x)) for x in grid]
            assert all(b >= a for a, b in zip(vals, vals[1:]))
