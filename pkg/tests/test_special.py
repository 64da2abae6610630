"""Numerical kernel tests: incomplete gamma, quadrature, root finding, RNG."""

import math

import numpy as np
import pytest

from selexp.special import (
    Bracket,
    BracketError,
    QuadratureError,
    exponential_from_uniform,
    find_root,
    integrate,
    sample_exponential,
    sample_gamma_int,
    substream,
    upper_reg_gamma,
)


class TestUpperRegGamma:
    def test_full_support(self):
        assert upper_reg_gamma(5, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_exponential_tail(self):
        assert upper_reg_gamma(1, 2.0) == pytest.approx(math.exp(-2), rel=1e-12)

    def test_shape_two(self):
        assert upper_reg_gamma(2, 1.0) == pytest.approx(2 * math.exp(-1), rel=1e-12)

    def test_integer_alpha_matches_poisson_tail(self):
        # e^-x sum_{j<alpha} x^j / j!
        for alpha in range(1, 11):
            for x in np.linspace(0.0, 30.0, 61):
                expected = math.exp(-x) * sum(x**j / math.factorial(j) for j in range(alpha))
                assert upper_reg_gamma(alpha, x) == pytest.approx(expected, abs=1e-10)

    def test_decreasing_in_x(self):
        xs = np.linspace(0.0, 30.0, 200)
        for alpha in (0.5, 1, 2.5, 7):
            vals = [upper_reg_gamma(alpha, x) for x in xs]
            assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            upper_reg_gamma(0.0, 1.0)
        with pytest.raises(ValueError):
            upper_reg_gamma(2.0, -0.1)


class TestIntegrate:
    def test_linear(self):
        assert integrate(lambda x: x, 0, 1) == pytest.approx(0.5, abs=1e-12)

    def test_exponential(self):
        assert integrate(math.exp, 0, 1) == pytest.approx(math.e - 1, abs=1e-10)

    def test_gamma_integrand(self):
        # closed-form antiderivative: 1 - 11 e^-10
        expected = 1 - 11 * math.exp(-10)
        got = integrate(lambda t: math.exp(-t) * t, 0, 10)
        assert got == pytest.approx(expected, abs=1e-10)

    def test_empty_interval(self):
        assert integrate(math.exp, 2.0, 2.0) == 0.0

    def test_budget_exhaustion(self):
        with pytest.raises(QuadratureError):
            integrate(lambda x: math.sin(1.0 / (x + 1e-12)), 0, 1, tol=1e-14, max_depth=3)

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError):
            integrate(math.exp, 1, 0)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 1, Bracket(0, 2)) == pytest.approx(1.0, abs=1e-12)

    def test_sqrt2(self):
        got = find_root(lambda x: x * x - 2, Bracket(1, 2))
        assert got == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_log3(self):
        got = find_root(lambda x: math.exp(x) - 3, Bracket(0, 2))
        assert got == pytest.approx(math.log(3), abs=1e-12)

    def test_invalid_bracket(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1, Bracket(0, 1))

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            Bracket(2, 1)


class TestSampling:
    def test_inverse_transform_convention(self):
        # u = 0.5 maps to -ln(0.5)
        assert exponential_from_uniform(0.5) == pytest.approx(math.log(2), rel=1e-12)

    def test_affine_pushforward(self):
        base = exponential_from_uniform(0.5)
        assert exponential_from_uniform(0.5, 5.0, 2.0) == pytest.approx(5 + 2 * base, rel=1e-12)

    def test_empirical_mean(self):
        rng = substream(42, 0)
        draws = sample_exponential(rng, 0.0, 1.0, size=1_000_000)
        assert draws.mean() == pytest.approx(1.0, abs=0.005)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_exponential(substream(0, 0), 0.0, 0.0)

    def test_substream_determinism(self):
        a = substream(7, 3, 11).random(100)
        b = substream(7, 3, 11).random(100)
        np.testing.assert_array_equal(a, b)

    def test_substreams_distinct(self):
        a = substream(7, 0).random(10)
        b = substream(7, 1).random(10)
        assert not np.array_equal(a, b)

    def test_gamma_moments(self):
        # Gamma(shape, 1): mean = shape, var = shape
        rng = substream(11, 0)
        shape = 4
        draws = sample_gamma_int(rng, shape, 1.0, size=500_000)
        se_mean = math.sqrt(shape / draws.size)
        assert draws.mean() == pytest.approx(shape, abs=3 * se_mean)
        assert draws.var() == pytest.approx(shape, rel=0.02)

    def test_gamma_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            sample_gamma_int(substream(0, 0), 0, 1.0)
