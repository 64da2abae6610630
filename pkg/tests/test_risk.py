"""Analytic risk tests: moments, risk/bias closed forms, admissibility
structure, minimax root, conditional-risk minimizer and envelopes."""

import math

import numpy as np
import pytest

from selexp.estimators import constants
from selexp.model import Target
from selexp.risk import (
    MU_QUADRATURE_LIMIT,
    UNBOUNDED,
    admissible_interval,
    bias_linear,
    cstar,
    minimax_c,
    minimax_root_expression,
    moment_u,
    psi_envelopes,
    psi_mu,
    risk_linear,
    risk_value,
    sup_risk_linear,
    _k_best,
    _xi_worst,
)
from selexp.special import integrate, sample_exponential, substream, upper_reg_gamma


class TestMoments:
    def test_best_first_moment_zero_gap(self):
        assert moment_u(0.0, 3, 1, Target.BEST) == pytest.approx(0.5)

    def test_best_second_moment_zero_gap(self):
        assert moment_u(0.0, 3, 2, Target.BEST) == pytest.approx(7 / 18)

    def test_best_first_moment_unit_gap(self):
        assert moment_u(1.0, 3, 1, Target.BEST) == pytest.approx((1 + math.exp(-1)) / 3)

    def test_large_gap_limit(self):
        assert moment_u(200.0, 5, 1, Target.BEST) == pytest.approx(1 / 5)

    def test_first_moment_against_simulation(self):
        # Monte Carlo oracle for E(U), U = (z2 - realized)/sigma, mu = 1, n = 3
        n, mu = 3, 1.0
        rng = substream(5, 0)
        reps = 1_000_000
        y1 = sample_exponential(rng, 0.0, 1.0, size=reps)
        y2 = sample_exponential(rng, 0.0, 1.0, size=reps)
        x1 = y1 / n
        x2 = mu / n + y2 / n
        z2 = np.maximum(x1, x2)
        realized = np.where(x1 >= x2, 0.0, mu / n)
        u = z2 - realized
        se = u.std(ddof=1) / math.sqrt(reps)
        assert moment_u(mu, n, 1, Target.BEST) == pytest.approx(u.mean(), abs=3 * se)
        se2 = (u * u).std(ddof=1) / math.sqrt(reps)
        assert moment_u(mu, n, 2, Target.BEST) == pytest.approx((u * u).mean(), abs=3 * se2)

    def test_worst_moments_complement(self):
        # U + U1 equals the sum of two independent per-population errors,
        # whose moments are 2/n and (by independence) 6/n^2
        for mu in (0.0, 0.7, 3.0):
            n = 4
            assert moment_u(mu, n, 1, Target.BEST) + moment_u(mu, n, 1, Target.WORST) == pytest.approx(2 / n)
            assert moment_u(mu, n, 2, Target.BEST) + moment_u(mu, n, 2, Target.WORST) == pytest.approx(4 / n**2)


class TestRiskAndBias:
    def test_risk_termwise_oracle(self):
        # evaluate the closed form termwise, independently of risk_value
        n, mu, c = 3, 0.0, 1 / 15
        m2 = (mu**2 + 3 * mu + 3) / 2 * math.exp(-mu) / n**2 + 2 / n**2
        m1 = ((mu + 1) / 2 * math.exp(-mu) + 1) / n
        expected = m2 - 4 * (n - 1) * m1 * c + 2 * (n - 1) * (2 * n - 1) * c * c
        assert expected == pytest.approx(0.2111111111, abs=1e-9)
        assert risk_linear(c, mu, n, Target.BEST).value == pytest.approx(expected, rel=1e-12)

    def test_risk_c_zero_is_second_moment(self):
        assert risk_value(0.0, 0.0, 3, Target.BEST) == pytest.approx(7 / 18)
        assert risk_value(0.0, 0.0, 3, Target.WORST) == pytest.approx(1 / 18)

    def test_bias_c_zero(self):
        assert bias_linear(0.0, 0.0, 3, Target.BEST) == pytest.approx(0.5)

    def test_bias_k2_large_gap(self):
        for n in (2, 3, 8):
            k2 = constants(n).k2
            expected = 1 / (n * (2 * n - 1))
            assert bias_linear(k2, 500.0, n, Target.BEST) == pytest.approx(expected)

    def test_bias_root_at_zero_gap(self):
        n = 6
        c = 3 / (4 * n * (n - 1))
        assert bias_linear(c, 0.0, n, Target.BEST) == pytest.approx(0.0, abs=1e-14)


class TestCstar:
    def test_best_zero_gap_is_k3(self):
        assert cstar(0.0, 3, Target.BEST) == pytest.approx(0.1)

    def test_worst_zero_gap_is_k0(self):
        assert cstar(0.0, 3, Target.WORST) == pytest.approx(1 / 30)

    def test_best_gap_two(self):
        expected = (1.5 * math.exp(-2) + 1) / 15
        assert cstar(2.0, 3, Target.BEST) == pytest.approx(expected, rel=1e-12)

    def test_cstar_minimizes_risk(self):
        for target in Target:
            for mu in (0.0, 0.5, 2.0):
                c0 = cstar(mu, 3, target)
                grid = np.linspace(c0 - 0.05, c0 + 0.05, 201)
                risks = risk_value(grid, mu, 3, target)
                assert risks.argmin() == 100

    def test_monotone_ranges(self):
        mus = np.linspace(0.0, 20.0, 401)
        k = constants(4)
        best = np.asarray([cstar(m, 4, Target.BEST) for m in mus])
        worst = np.asarray([cstar(m, 4, Target.WORST) for m in mus])
        assert np.all(np.diff(best) < 0)
        assert np.all(np.diff(worst) > 0)
        assert best[0] == pytest.approx(k.k3) and best[-1] > k.k2
        assert worst[0] == pytest.approx(k.k0) and worst[-1] < k.k2


class TestAdmissibility:
    def test_intervals(self):
        best = admissible_interval(3, Target.BEST)
        worst = admissible_interval(3, Target.WORST)
        assert (best.lo, best.hi) == pytest.approx((1 / 15, 1 / 10))
        assert (worst.lo, worst.hi) == pytest.approx((1 / 30, 1 / 15))
        two = admissible_interval(2, Target.BEST)
        assert (two.lo, two.hi) == pytest.approx((1 / 6, 1 / 4))

    def test_bowl_shape(self):
        mus = np.linspace(0.0, 20.0, 401)
        for target in Target:
            for mu in mus[::40]:
                c0 = cstar(mu, 3, target)
                below = np.linspace(c0 - 0.2, c0, 100, endpoint=False)
                above = np.linspace(c0, c0 + 0.2, 101)[1:]
                rb = risk_value(below, mu, 3, target)
                ra = risk_value(above, mu, 3, target)
                assert np.all(np.diff(rb) < 0)
                assert np.all(np.diff(ra) > 0)

    def test_ordering_outside_interval(self):
        # closer to the admissible interval is uniformly better
        mus = np.linspace(0.0, 20.0, 401)
        for n, target in [(3, Target.BEST), (3, Target.WORST), (5, Target.BEST)]:
            iv = admissible_interval(n, target)
            lows = np.linspace(iv.lo - 0.5, iv.lo, 21)
            for b, c in zip(lows, lows[1:]):
                assert np.all(
                    risk_value(c, mus, n, target) < risk_value(b, mus, n, target)
                )
            highs = np.linspace(iv.hi, iv.hi + 0.5, 21)
            for c, b in zip(highs, highs[1:]):
                assert np.all(
                    risk_value(c, mus, n, target) < risk_value(b, mus, n, target)
                )

    def test_consistency_in_n(self):
        # risk at c = k2(n) shrinks monotonically to zero in n
        for mu in (0.0, 1.0, 4.0):
            risks = [
                risk_value(constants(n).k2, mu, n, Target.BEST)
                for n in (3, 5, 10, 15, 30, 50)
            ]
            assert all(a > b for a, b in zip(risks, risks[1:]))
            assert risks[-1] < 0.002


def bisect_oracle(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestMinimax:
    def test_worst_is_k2(self):
        assert minimax_c(3, Target.WORST) == pytest.approx(1 / 15)

    @pytest.mark.parametrize("n", [2, 3, 5, 10, 15])
    def test_best_root_inside_interval(self, n):
        k = constants(n)
        r = minimax_c(n, Target.BEST)
        assert k.k2 < r < k.k3
        assert abs(minimax_root_expression(r, n)) < 1e-10
        assert minimax_root_expression(k.k2, n) < 0
        assert minimax_root_expression(k.k3, n) > 0

    def test_n3_matches_bisection_oracle(self):
        k = constants(3)
        oracle = bisect_oracle(lambda r: minimax_root_expression(r, 3), k.k2, k.k3)
        assert oracle == pytest.approx(0.0894, abs=5e-4)
        assert minimax_c(3, Target.BEST) == pytest.approx(oracle, abs=1e-6)

    def test_minimax_has_smallest_sup_risk(self):
        # sup over mu evaluated analytically at the interior maximizer,
        # cross-checked against a grid with the endpoint mu = 0
        for n in (3, 5):
            k = constants(n)
            r = minimax_c(n, Target.BEST)
            sup_r = sup_risk_linear(r, n, Target.BEST)
            mus = np.linspace(0.0, 20.0, 401)
            for c in np.linspace(k.k2, k.k3, 50):
                sup_c = max(
                    sup_risk_linear(c, n, Target.BEST),
                    float(risk_value(c, mus, n, Target.BEST).max()),
                )
                assert sup_r <= sup_c + 1e-12

    def test_worst_sup_risk_formula_and_minimum(self):
        n = 4
        k = constants(n)
        mus = np.linspace(0.0, 60.0, 1201)
        cs = np.linspace(k.k0, k.k2, 40)
        sups = []
        for c in cs:
            grid_sup = float(risk_value(c, mus, n, Target.WORST).max())
            formula = sup_risk_linear(c, n, Target.WORST)
            assert grid_sup == pytest.approx(formula, abs=1e-6)
            sups.append(formula)
        assert np.argmin(sups) == len(cs) - 1  # minimized at k2


class TestPsiMu:
    def test_zero_gap_both_targets(self):
        for target in Target:
            for w, n in [(0.5, 3), (0.2, 3), (1.5, 5)]:
                assert psi_mu(w, 0.0, n, target) == pytest.approx(
                    (1 + n * w) / (4 * n * n), rel=1e-9
                )

    def test_best_large_gap_limit_branch(self):
        # beyond the quadrature cutoff the proven limit is returned
        mu = MU_QUADRATURE_LIMIT + 1
        assert psi_mu(1.0, mu, 3, Target.BEST) == pytest.approx(-1.0)
        assert math.isinf(psi_mu(0.2, mu, 3, Target.BEST))

    def test_worst_large_gap_limit_branch(self):
        mu = MU_QUADRATURE_LIMIT + 1
        assert psi_mu(1.0, mu, 3, Target.WORST) == 0.0
        assert math.isinf(psi_mu(0.2, mu, 3, Target.WORST))

    def test_k_bounds_on_grid(self):
        # k <= 1 for w >= 1/n; k >= -4 n^2 w/(1+nw) everywhere
        n = 3
        for w in (1 / 3, 0.5, 1.0, 2.0):
            for mu in (0.0, 0.5, 2.0, 10.0, 30.0):
                k = _k_best(mu, w, n)
                assert k <= 1.0 + 1e-9
                assert k >= -4 * n * n * w / (1 + n * w) - 1e-9
        for w in (0.05, 0.2):
            for mu in (0.0, 1.0, 5.0):
                assert _k_best(mu, w, n) >= -4 * n * n * w / (1 + n * w) - 1e-9

    def test_xi_bounds_on_grid(self):
        # 0 <= xi <= 1 when a <= 2 (w >= 1/n); xi >= 1 when a > 2 (w < 1/n)
        n = 3
        for w in (1 / 3, 0.8, 2.0):
            for mu in (0.0, 1.0, 5.0, 20.0):
                xi = _xi_worst(mu, w, n)
                assert -1e-9 <= xi <= 1.0 + 1e-9
        for w in (0.05, 0.2):
            for mu in (0.0, 1.0, 5.0):
                assert _xi_worst(mu, w, n) >= 1.0 - 1e-9

    def test_large_gap_tail_integrals_match_limits(self):
        # I1, I2 at mu = 40 for w < 1/n against the closed-form limits
        n, w, mu = 3, 0.2, 60.0
        rate = (1 + n * w) / w
        # integrands reach ~e^(2mu/... ): absolute tolerance sized to the result
        i1 = integrate(
            lambda u: u * math.exp(2 * n * u) * upper_reg_gamma(2 * n, rate * u),
            0.0, mu / n, tol=1e-5,
        )
        i2 = integrate(
            lambda u: math.exp(2 * n * u) * upper_reg_gamma(2 * n + 1, rate * u),
            0.0, mu / n, tol=1e-5,
        )
        ratio = (1 + n * w) / (1 - n * w)
        i1_lim = ratio ** (2 * n) * (w / (1 - n * w) - 1 / (4 * n * n)) + 1 / (4 * n * n)
        i2_lim = (ratio ** (2 * n + 1) - 1) / (2 * n)
        assert i1 == pytest.approx(i1_lim, rel=1e-6)
        assert i2 == pytest.approx(i2_lim, rel=1e-6)

    def test_positivity_inequality_psi1(self):
        # t^(2n+1)/(2n+1)! + int_0^t e^z (z+1) Gbar_2n(z) dz - t >= 0
        n = 3
        for t in np.linspace(0.0, 30.0, 31):
            tail = integrate(
                lambda z: math.exp(z) * (z + 1) * upper_reg_gamma(2 * n, z),
                0.0, float(t), tol=1e-6,
            )
            psi1 = t ** (2 * n + 1) / math.factorial(2 * n + 1) + tail - t
            assert psi1 >= -1e-5

    def test_positivity_inequality_psi2(self):
        n = 3
        for delta in (0.6, 1.0, 2.0):
            for x in np.linspace(0.0, 20.0, 21):
                t1 = integrate(
                    lambda z: math.exp(z) * upper_reg_gamma(2 * n + 1, delta * z),
                    0.0, float(x), tol=1e-6,
                )
                t2 = integrate(
                    lambda z: z * math.exp(z) * upper_reg_gamma(2 * n, delta * z),
                    0.0, float(x), tol=1e-6,
                )
                psi2 = 2 * n * t1 - delta * t2 + delta * x + 2 * delta + 4 * n
                assert psi2 >= -1e-5


class TestEnvelopes:
    def test_best_at_boundary(self):
        lower, upper = psi_envelopes(1 / 3, 3, Target.BEST)
        assert lower == pytest.approx(-1 / 3)
        assert upper == pytest.approx(2 / 36)

    def test_best_small_w_unbounded(self):
        lower, upper = psi_envelopes(0.2, 3, Target.BEST)
        assert upper is UNBOUNDED
        assert 0.1 < upper and not (upper < 0.1)

    def test_worst_small_w(self):
        lower, upper = psi_envelopes(0.2, 3, Target.WORST)
        assert lower == pytest.approx((1 + 0.6) / 36)
        assert upper is UNBOUNDED

    def test_worst_large_w(self):
        lower, upper = psi_envelopes(0.5, 3, Target.WORST)
        assert lower == 0.0
        assert upper == pytest.approx((1 + 1.5) / 36)

    def test_psi_mu_respects_envelopes(self):
        for target in Target:
            for w in (0.2, 0.5, 1.0):
                lower, upper = psi_envelopes(w, 3, target)
                for mu in (0.0, 0.5, 2.0, 10.0):
                    value = psi_mu(w, mu, 3, target)
                    if not isinstance(lower, float):
                        continue
                    assert value >= lower - 1e-9
                    if isinstance(upper, float):
                        assert value <= upper + 1e-9
