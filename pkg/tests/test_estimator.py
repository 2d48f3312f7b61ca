import math

import numpy as np
import pytest

from wavemle.errors import DataIntegrityError, DegenerateDataError
from wavemle.estimator import (
    identity_residual,
    mle,
    mode_statistics,
    normalized_errors,
    sufficient_statistics,
    z_scores,
)
from wavemle.sim import SimConfig, TrajectorySet, simulate_euler, simulate_exact


def make_traj(u, v, dw=None, lam=1.0, sigma=1.0, t_final=1.0, scheme="euler"):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n, mp1 = u.shape
    cfg = SimConfig(lam=lam, sigma=sigma, n_modes=n, m_steps=mp1 - 1,
                    t_final=t_final, scheme=scheme, base_seed=0)
    return TrajectorySet(config=cfg, grid=np.linspace(0.0, t_final, mp1),
                         u=u, v=v, dw=None if dw is None else np.asarray(dw, dtype=np.float64))


def synthetic_noiseless(lam, n, m, t_final, seed):
    """Nonzero u pattern with v increments exactly -lam k^2 u dt."""
    rng = np.random.default_rng(seed)
    dt = t_final / m
    u = np.zeros((n, m + 1))
    u[:, 1:] = rng.uniform(0.5, 2.0, size=(n, m)) * rng.choice([-1.0, 1.0], size=(n, m))
    v = np.zeros((n, m + 1))
    k = np.arange(1, n + 1, dtype=np.float64)
    coef = lam * k * k * dt
    for i in range(m):
        v[:, i + 1] = v[:, i] - coef * u[:, i]
    return make_traj(u, v, lam=lam, t_final=t_final)


class TestSufficientStatistics:
    def test_all_zero_trajectory(self):
        traj = make_traj(np.zeros((2, 5)), np.zeros((2, 5)), dw=np.zeros((2, 4)))
        stats = sufficient_statistics(traj)
        assert (stats.xi, stats.j_stat, stats.b_stat) == (0.0, 0.0, 0.0)

    def test_left_endpoint_only_zero_state(self):
        # single step: only the zero initial state enters the sums
        u = [[0.0, 3.0]]
        v = [[0.0, -2.0]]
        stats = sufficient_statistics(make_traj(u, v))
        assert stats.j_stat == 0.0
        assert stats.b_stat == 0.0

    def test_hand_evaluated_sums(self):
        # N=1, M=2, T=1: u = (0, 1, .), v increments (a, b)
        a, b = 0.7, -1.3
        u = [[0.0, 1.0, 5.0]]
        v = [[0.0, a, a + b]]
        stats = sufficient_statistics(make_traj(u, v))
        assert stats.b_stat == pytest.approx(-b, rel=1e-15)
        assert stats.j_stat == pytest.approx(0.5, rel=1e-15)

    def test_xi_flagged_absent_without_dw(self):
        traj = make_traj(np.zeros((1, 3)), np.zeros((1, 3)))
        assert sufficient_statistics(traj).xi is None

    def test_rejects_nan(self):
        u = np.zeros((1, 3))
        u[0, 1] = math.nan
        with pytest.raises(DataIntegrityError):
            sufficient_statistics(make_traj(u, np.zeros((1, 3))))

    def test_mode_weights(self):
        # two modes, constant u after t0; checks the k^2 / k^4 weighting
        u = np.array([[0.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
        v = np.array([[0.0, 1.0, 3.0], [0.0, 2.0, 6.0]])
        j_modes, b_modes, _ = mode_statistics(make_traj(u, v))
        assert j_modes[0] == pytest.approx(0.5, rel=1e-15)      # 1^4 * (0+1) * 0.5
        assert j_modes[1] == pytest.approx(8.0, rel=1e-15)      # 2^4 * (0+1) * 0.5
        assert b_modes[0] == pytest.approx(-2.0, rel=1e-15)     # -(1^2) * (0*1 + 1*2)
        assert b_modes[1] == pytest.approx(-16.0, rel=1e-15)    # -(2^2) * (0*2 + 1*4)


class TestMle:
    def test_noiseless_synthetic_recovers_lambda_exactly(self):
        for seed, lam in [(0, 1.0), (1, 0.3), (2, 7.5)]:
            traj = synthetic_noiseless(lam, n=4, m=50, t_final=1.0, seed=seed)
            est = mle(traj)
            assert abs(est.lambda_hat - lam) <= 1e-12 * lam

    def test_all_zero_is_degenerate(self):
        traj = make_traj(np.zeros((2, 5)), np.zeros((2, 5)))
        with pytest.raises(DegenerateDataError):
            mle(traj)

    def test_euler_data_end_to_end(self):
        cfg = SimConfig(lam=10.0, sigma=5.0, n_modes=100, m_steps=10000,
                        t_final=1.0, scheme="euler", base_seed=42)
        est = mle(simulate_euler(cfg), lambda_true=10.0)
        assert abs(est.lambda_hat - 10.0) < 0.1

    def test_invariant_under_appended_zero_modes(self):
        traj = synthetic_noiseless(2.0, n=3, m=20, t_final=1.0, seed=3)
        u2 = np.vstack([traj.u, np.zeros((2, 21))])
        v2 = np.vstack([traj.v, np.zeros((2, 21))])
        bigger = make_traj(u2, v2, lam=2.0)
        assert mle(bigger).lambda_hat == mle(traj).lambda_hat

    def test_z_fields_none_without_truth(self):
        traj = synthetic_noiseless(1.0, n=2, m=10, t_final=1.0, seed=4)
        est = mle(traj)
        assert est.z_canonical is None and est.z_paper is None
        with pytest.raises(ValueError):
            normalized_errors(est)


class TestNormalizedErrors:
    def test_zero_error(self):
        z_c, z_p = z_scores(2.0, 2.0, 10, 1.0, 5.0)
        assert z_c == 0.0 and z_p == 0.0

    def test_unit_canonical_error(self):
        lam, n, t = 0.8, 25, 2.0
        lam_hat = lam + math.sqrt(12.0 * lam) / (t * n ** 1.5)
        z_c, _ = z_scores(lam_hat, lam, n, t, 1.0)
        assert z_c == pytest.approx(1.0, rel=1e-12)

    def test_paper_to_canonical_ratio_is_minus_sigma(self):
        for sigma in (0.5, 1.0, 5.0):
            z_c, z_p = z_scores(1.37, 1.0, 12, 0.7, sigma)
            assert z_p / z_c == pytest.approx(-sigma, rel=1e-12)

    def test_recompute_matches(self):
        traj = synthetic_noiseless(1.5, n=3, m=30, t_final=2.0, seed=5)
        est = mle(traj, lambda_true=1.5)
        assert normalized_errors(est) == (est.z_canonical, est.z_paper)

    def test_rejects_bad_truth(self):
        with pytest.raises(ValueError):
            z_scores(1.0, -1.0, 10, 1.0, 1.0)


class TestIdentityResidual:
    def test_zero_on_euler_data(self):
        cfg = SimConfig(lam=2.0, sigma=1.5, n_modes=10, m_steps=500,
                        t_final=1.0, scheme="euler", base_seed=7)
        traj = simulate_euler(cfg)
        stats = sufficient_statistics(traj)
        res = identity_residual(traj, 2.0, 1.5)
        assert abs(res) <= 1e-9 * max(1.0, abs(2.0 * stats.j_stat))

    def test_linear_in_lambda(self):
        # residual(lam + delta) = -delta * J
        cfg = SimConfig(lam=1.0, sigma=1.0, n_modes=5, m_steps=200,
                        t_final=1.0, scheme="euler", base_seed=8)
        traj = simulate_euler(cfg)
        j = sufficient_statistics(traj).j_stat
        res = identity_residual(traj, 2.0, 1.0)
        assert res == pytest.approx(-j, rel=1e-9)

    def test_exact_scheme_residual_shrinks_with_m(self):
        # on exact data the residual is the velocity-integral quadrature
        # defect; refining the grid must shrink it
        res = {}
        for m in (64, 4096):
            cfg = SimConfig(lam=1.0, sigma=1.0, n_modes=5, m_steps=m,
                            t_final=1.0, scheme="exact", base_seed=99)
            traj = simulate_exact(cfg, include_increments=True)
            res[m] = abs(identity_residual(traj, 1.0, 1.0))
        assert res[4096] < res[64] / 8

    def test_requires_dw(self):
        traj = make_traj(np.zeros((1, 3)), np.zeros((1, 3)))
        with pytest.raises(ValueError):
            identity_residual(traj, 1.0, 1.0)
