import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavemle.moments import (
    ModeContext,
    cov_u,
    fisher_asymptotic,
    fisher_exact,
    integrated_mean_square_u,
    mean_square_u,
    mean_square_v,
    upsilon,
)

import oracles


def ctx(k=1, lam=1.0, sigma=1.0):
    return ModeContext(k=k, lam=lam, sigma=sigma)


class TestMeanSquareU:
    def test_zero_time(self):
        assert mean_square_u(ctx(), 0.0) == 0.0

    def test_quarter_period_closed_form(self):
        # ell = 1, t = pi: sin(2 pi) = 0 leaves pi/2
        assert mean_square_u(ctx(), math.pi) == pytest.approx(math.pi / 2, rel=1e-13)
        assert oracles.rel_err(mean_square_u(ctx(), math.pi),
                               oracles.msq_u_quad(1, 1.0, 1.0, math.pi)) < 1e-10

    def test_against_quadrature(self):
        val = mean_square_u(ctx(k=10, lam=4.0, sigma=2.0), 1.0)
        assert oracles.rel_err(val, oracles.msq_u_quad(10, 4.0, 2.0, 1.0)) < 1e-10

    def test_tiny_argument_series(self):
        # ell t = 2e-6 sits deep in the series branch
        val = mean_square_u(ctx(k=2, lam=1.0, sigma=1.5), 1e-6)
        ref = oracles.msq_u_mp(2, 1.0, 1.5, 1e-6)
        assert oracles.rel_err(val, ref) < 1e-12

    def test_nonnegative_and_rejects_negative_time(self):
        assert mean_square_u(ctx(k=3, lam=0.3, sigma=2.0), 4.7) >= 0.0
        with pytest.raises(ValueError):
            mean_square_u(ctx(), -1.0)


class TestMeanSquareV:
    def test_zero_time(self):
        assert mean_square_v(ctx(), 0.0) == 0.0

    def test_quarter_period_closed_form(self):
        assert mean_square_v(ctx(), math.pi) == pytest.approx(math.pi / 2, rel=1e-13)

    def test_against_quadrature(self):
        val = mean_square_v(ctx(k=3, lam=2.0, sigma=1.0), 0.7)
        assert oracles.rel_err(val, oracles.msq_v_quad(3, 2.0, 1.0, 0.7)) < 1e-10

    def test_tiny_argument(self):
        val = mean_square_v(ctx(k=1, lam=0.1, sigma=2.0), 1e-7)
        ref = oracles.msq_v_mp(1, 0.1, 2.0, 1e-7)
        assert oracles.rel_err(val, ref) < 1e-12

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            mean_square_v(ctx(), -0.5)


class TestCovU:
    def test_diagonal_matches_mean_square(self):
        c = ctx(k=1, lam=1.0, sigma=1.0)
        assert cov_u(c, 1.0, 1.0) == pytest.approx(mean_square_u(c, 1.0), rel=1e-13)

    def test_zero_time_edge(self):
        assert cov_u(ctx(), 0.0, 2.0) == 0.0

    def test_against_quadrature(self):
        val = cov_u(ctx(k=2, lam=1.0, sigma=1.0), 0.3, 0.9)
        assert oracles.rel_err(val, oracles.cov_u_quad(2, 1.0, 1.0, 0.3, 0.9)) < 1e-10

    def test_tiny_argument(self):
        val = cov_u(ctx(k=1, lam=0.25, sigma=1.0), 2e-6, 3e-6)
        ref = oracles.cov_u_mp(1, 0.25, 1.0, 2e-6, 3e-6)
        assert oracles.rel_err(val, ref) < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(
        k=st.integers(min_value=1, max_value=50),
        lam=st.floats(min_value=0.1, max_value=20.0),
        sigma=st.floats(min_value=0.1, max_value=10.0),
        t=st.floats(min_value=1e-6, max_value=5.0),
        s=st.floats(min_value=1e-6, max_value=5.0),
    )
    def test_symmetry(self, k, lam, sigma, t, s):
        c = ctx(k=k, lam=lam, sigma=sigma)
        assert cov_u(c, t, s) == cov_u(c, s, t)

    def test_rejects_negative_times(self):
        with pytest.raises(ValueError):
            cov_u(ctx(), -0.1, 1.0)
        with pytest.raises(ValueError):
            cov_u(ctx(), 0.1, -1.0)


class TestRandomizedOracleGrid:
    """Closed forms vs adaptive quadrature on a frozen randomized grid."""

    def test_two_hundred_tuples(self):
        rng = np.random.default_rng(20240817)
        worst = 0.0
        for _ in range(200):
            k = int(rng.integers(1, 51))
            lam = float(rng.uniform(0.1, 20.0))
            sigma = float(rng.uniform(0.2, 5.0))
            t = float(rng.uniform(0.01, 5.0))
            s = float(rng.uniform(0.01, 5.0))
            c = ctx(k=k, lam=lam, sigma=sigma)
            worst = max(worst, oracles.rel_err(mean_square_u(c, t),
                                               oracles.msq_u_quad(k, lam, sigma, t)))
            worst = max(worst, oracles.rel_err(mean_square_v(c, t),
                                               oracles.msq_v_quad(k, lam, sigma, t)))
            worst = max(worst, oracles.rel_err(cov_u(c, t, s),
                                               oracles.cov_u_quad(k, lam, sigma, t, s)))
        assert worst < 1e-10


class TestIntegratedMeanSquareU:
    def test_against_nested_quadrature(self):
        c = ctx(k=3, lam=2.5, sigma=1.3)
        val = integrated_mean_square_u(c, 1.7)
        assert oracles.rel_err(val, oracles.int_msq_u_quad(3, 2.5, 1.3, 1.7)) < 1e-9

    def test_zero_horizon(self):
        assert integrated_mean_square_u(ctx(), 0.0) == 0.0


class TestFisher:
    def test_single_mode_two_pi(self):
        # k=1, ell=1, T=2pi: cos(4 pi) - 1 = 0 leaves T^2/4 = pi^2
        assert fisher_exact(1, 2 * math.pi, 1.0, 1.0) == pytest.approx(math.pi ** 2, rel=1e-12)

    def test_vanishes_as_horizon_shrinks(self):
        assert fisher_exact(1, 1e-6, 1.0, 1.0) < 1e-20

    def test_oracle_small_n(self):
        lam, sigma, t_final = 3.0, 2.0, 1.4
        ref = sum(k ** 4 * oracles.int_msq_u_quad(k, lam, sigma, t_final)
                  for k in range(1, 4)) / sigma ** 2
        assert oracles.rel_err(fisher_exact(3, t_final, lam, sigma), ref) < 1e-9

    def test_sigma_cancels(self):
        assert fisher_exact(7, 1.3, 2.0, 1.0) == fisher_exact(7, 1.3, 2.0, 5.0)

    def test_ratio_near_one_at_500(self):
        ratio = fisher_exact(500, 1.0, 1.0, 1.0) / fisher_asymptotic(500, 1.0, 1.0)
        assert 0.99 <= ratio <= 1.01

    def test_ratio_tightens_with_n(self):
        r100 = fisher_exact(100, 1.0, 1.0, 1.0) / fisher_asymptotic(100, 1.0, 1.0)
        r1000 = fisher_exact(1000, 1.0, 1.0, 1.0) / fisher_asymptotic(1000, 1.0, 1.0)
        assert abs(r1000 - 1.0) < abs(r100 - 1.0)

    def test_monotone_in_n(self):
        values = [fisher_exact(n, 0.8, 2.0, 1.5) for n in range(1, 40)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_asymptotic_arithmetic(self):
        assert fisher_asymptotic(100, 1.0, 1.0) == pytest.approx(1e6 / 12.0, rel=1e-15)
        assert fisher_asymptotic(1, 1.0, 1.0 / 12.0) == pytest.approx(1.0, rel=1e-15)

    def test_asymptotic_scales_inversely_with_lam(self):
        base = fisher_asymptotic(50, 2.0, 1.0)
        assert fisher_asymptotic(50, 2.0, 4.0) == pytest.approx(base / 4.0, rel=1e-15)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            fisher_exact(0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            fisher_exact(5, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            fisher_asymptotic(5, -1.0, 1.0)


class TestUpsilon:
    def test_values(self):
        assert upsilon(1.0, 1.0) == pytest.approx(1.0 / math.sqrt(12.0), rel=1e-15)
        assert upsilon(math.sqrt(12.0), 1.0) == pytest.approx(1.0, rel=1e-15)
        assert upsilon(1.0, 1.0 / 12.0) == pytest.approx(1.0, rel=1e-15)

    def test_defining_identity(self):
        for t_final, lam in [(0.5, 3.0), (4.0, 0.2)]:
            up = upsilon(t_final, lam)
            assert up * up * 12.0 * lam == pytest.approx(t_final ** 2, rel=1e-14)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            upsilon(0.0, 1.0)
        with pytest.raises(ValueError):
            upsilon(1.0, -2.0)


class TestInformationGrowthLimit:
    def test_weighted_energy_ratio_at_n_1000(self):
        # sum_k k^4 int_0^T E u_k^2 dt approaches N^3 sigma^2 T^2 / (12 lam);
        # the k^4 weight is the one the information sum carries (with a k^2
        # weight the sum grows only linearly in N).
        lam, sigma, t_final, n = 1.7, 2.0, 1.0, 1000
        total = math.fsum(
            k ** 4 * integrated_mean_square_u(ctx(k=k, lam=lam, sigma=sigma), t_final)
            for k in range(1, n + 1)
        )
        limit = n ** 3 * sigma ** 2 * t_final ** 2 / (12.0 * lam)
        assert abs(total / limit - 1.0) < 0.01

    def test_k2_weighted_energy_grows_linearly(self):
        # per-mode limit: k^2 int_0^T E u_k^2 dt -> sigma^2 T^2 / (4 lam)
        lam, sigma, t_final = 1.7, 2.0, 1.0
        k = 4000
        val = k * k * integrated_mean_square_u(ctx(k=k, lam=lam, sigma=sigma), t_final)
        assert val == pytest.approx(sigma ** 2 * t_final ** 2 / (4.0 * lam), rel=1e-4)


class TestModeContext:
    def test_ell(self):
        assert ctx(k=3, lam=4.0).ell == pytest.approx(6.0, rel=1e-15)

    def test_validation(self):
        with pytest.raises(ValueError):
            ModeContext(k=0, lam=1.0, sigma=1.0)
        with pytest.raises(ValueError):
            ModeContext(k=1, lam=0.0, sigma=1.0)
        with pytest.raises(ValueError):
            ModeContext(k=1, lam=1.0, sigma=-1.0)
