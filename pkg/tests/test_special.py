import math

import numpy as np
import pytest
from scipy.special import jv

from tentdg.special import bessel_j, gamma_fn


class TestGamma:
    def test_integers_match_factorials(self):
        for k in range(1, 41):
            assert gamma_fn(k) == pytest.approx(math.gamma(k), rel=1e-12)

    def test_half_integers(self):
        # Gamma(1/2) = sqrt(pi), then the recursion climbs by x each step
        val = math.sqrt(math.pi)
        x = 0.5
        while x < 40:
            assert gamma_fn(x) == pytest.approx(val, rel=1e-12)
            val *= x
            x += 1.0
    def test_random_arguments_against_stdlib(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(0.05, 30.0, size=200):
            assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)

    def test_reflection_branch(self):
        assert gamma_fn(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-12)
        assert gamma_fn(-1.5) == pytest.approx(4.0 * math.sqrt(math.pi) / 3.0, rel=1e-12)

    def test_poles_raise(self):
        for bad in (0.0, -1.0, -7.0):
            with pytest.raises(ValueError):
                gamma_fn(bad)


class TestBesselJ:
    def test_values_at_zero(self):
        # J_0(0) carries the rational approximation of Gamma(1), hence the slack
        assert bessel_j(0.0, 0.0) == pytest.approx(1.0, abs=5e-15)
        assert bessel_j(2.0 / 3.0, 0.0) == 0.0
        assert bessel_j(3.0, 0.0) == 0.0

    def test_half_order_closed_form(self):
        # J_{1/2}(x) = sqrt(2 / (pi x)) sin(x)
        exact = math.sqrt(2.0 / math.pi) * math.sin(1.0)
        assert bessel_j(0.5, 1.0) == pytest.approx(exact, abs=1e-14)
        for x in (0.3, 2.7, 9.1):
            exact = math.sqrt(2.0 / (math.pi * x)) * math.sin(x)
            assert bessel_j(0.5, x) == pytest.approx(exact, abs=1e-12)

    def test_corner_mode_order_frozen_values(self):
        assert bessel_j(2.0 / 3.0, 10.0) == pytest.approx(-0.08014960330431185, abs=1e-10)
        assert bessel_j(2.0 / 3.0, 14.0) == pytest.approx(0.1971137944823266, abs=1e-10)
        assert bessel_j(1.0 / 3.0, 5.0) == pytest.approx(-0.3064204638002662, abs=1e-10)

    def test_against_scipy_on_grid(self):
        x = np.linspace(0.0, 15.0, 61)
        for nu in (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 5.0 / 3.0, 4.0):
            got = bessel_j(nu, x)
            assert np.max(np.abs(got - jv(nu, x))) < 1e-10

    def test_three_term_recurrence(self):
        # J_{nu-1} + J_{nu+1} = (2 nu / x) J_nu, checked without any library
        for x in (0.7, 3.3, 8.0, 12.5):
            for nu in (1.0, 2.0, 5.0 / 3.0):
                lhs = bessel_j(nu - 1.0, x) + bessel_j(nu + 1.0, x)
                rhs = 2.0 * nu / x * bessel_j(nu, x)
                assert lhs == pytest.approx(rhs, abs=5e-12)

    def test_array_matches_scalar(self):
        x = np.array([0.0, 0.5, 4.0, 11.0])
        arr = bessel_j(2.0 / 3.0, x)
        for xi, yi in zip(x, arr):
            assert bessel_j(2.0 / 3.0, float(xi)) == yi

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bessel_j(-0.5, 1.0)
        with pytest.raises(ValueError):
            bessel_j(0.5, 41.0)
        with pytest.raises(ValueError):
            bessel_j(0.5, -1e-9)
