"""Tests for the deterministic sequences and the martingale decomposition."""

import math

import numpy as np
import pytest

from reinforced_walk.martingale import (
    build_sequences,
    empirical_un_ratio,
    martingale_transform,
    quadratic_variation,
)
from reinforced_walk.memory import MemorySpec, build_prefix, estimate_rv_index, mu
from reinforced_walk.walk import StepModel, Trajectory, WalkConfig, simulate, simulate_steps_batch


def _seqs(spec, p, n, next_mu=None):
    return build_sequences(build_prefix(spec, n), p, next_mu=next_mu)


def _manual_traj(x, mu_weights, mean=0.0, var=1.0):
    x = np.asarray(x, dtype=float)
    return Trajectory(
        X=x,
        S=np.cumsum(x),
        Y=np.cumsum(mu_weights * x),
        U=np.cumsum(mu_weights * (x * x)),
        reinforced=np.zeros(len(x), dtype=bool),
        memory_index=np.zeros(len(x), dtype=np.int64),
        step_mean=mean,
        step_variance=var,
    )


class TestSequences:
    def test_constant_memory_closed_form_a(self):
        # telescoping: a_n = Gamma(n) Gamma(1+p) / Gamma(n+p)
        p = 0.25
        seqs = _seqs(MemorySpec.constant(), p, 10**4)
        n = np.arange(1, 10**4 + 1)
        expected = np.array(
            [math.lgamma(k) + math.lgamma(1 + p) - math.lgamma(k + p) for k in n]
        )
        assert np.allclose(seqs.log_a, expected, rtol=0, atol=1e-10)

    def test_constant_memory_closed_form_eta(self):
        # a_n eta_n = (1/p)(1 - Gamma(1+p) Gamma(n) / Gamma(n+p)) exactly
        p = 0.4
        n = 5000
        seqs = _seqs(MemorySpec.constant(), p, n)
        a_eta = np.exp(seqs.log_a[-1]) * seqs.eta[-1]
        expected = (1.0 - math.exp(math.lgamma(1 + p) + math.lgamma(n) - math.lgamma(n + p))) / p
        assert a_eta == pytest.approx(expected, rel=1e-10)

    def test_eta_2_is_one_for_constant_memory(self):
        for p in (0.1, 0.25, 0.45):
            seqs = _seqs(MemorySpec.constant(), p, 10)
            assert seqs.eta[0] == 0.0
            assert seqs.eta[1] == 1.0  # 1 / (a_1 nu_1)

    def test_shape_invariants(self):
        seqs = _seqs(MemorySpec.power_law(1.0), 0.6, 3000, next_mu=3001.0)
        assert seqs.log_a[0] == 0.0
        assert np.all(seqs.gamma[:-1] > 1.0) and seqs.gamma[-1] > 1.0
        assert np.all(np.diff(seqs.log_a) < 0.0)  # a strictly decreasing
        assert np.all(np.diff(seqs.eta) > 0.0)
        assert np.all(np.diff(seqs.w) > 0.0)
        assert np.all(np.diff(seqs.z) > 0.0)

    def test_gamma_tail_nan_without_next_mu(self):
        seqs = _seqs(MemorySpec.power_law(1.0), 0.6, 100)
        assert math.isnan(seqs.gamma[-1])
        assert np.all(np.isfinite(seqs.gamma[:-1]))

    def test_invalid_p(self):
        prefix = build_prefix(MemorySpec.constant(), 10)
        with pytest.raises(ValueError):
            build_sequences(prefix, 1.0)

    @pytest.mark.parametrize(
        "spec,p",
        [
            (MemorySpec.power_law(1.0), 0.6),
            (MemorySpec.constant(), 0.25),
            (MemorySpec.power_law(2.0), 0.7),
        ],
    )
    def test_a_is_regularly_varying_with_index_minus_p_alpha(self, spec, p):
        seqs = _seqs(spec, p, 10**5)
        est = estimate_rv_index(np.exp(seqs.log_a))
        assert abs(est - (-p * spec.alpha)) <= 0.02

    @pytest.mark.parametrize(
        "spec,p",
        [
            (MemorySpec.power_law(1.0), 0.6),
            (MemorySpec.constant(), 0.25),
            (MemorySpec.power_law(2.0), 0.7),
        ],
    )
    def test_w_normalization_limit(self, spec, p):
        # w_n / (n (a_n mu_n)^2) -> 1 / (2 alpha (1-p) - 1), fast
        alpha = spec.alpha
        seqs = _seqs(spec, p, 10**6)
        n = seqs.n_max
        value = seqs.w[-1] / (n * seqs.a_mu[-1] ** 2)
        assert value == pytest.approx(1.0 / (2 * alpha * (1 - p) - 1), rel=0.02)

    @pytest.mark.parametrize(
        "spec,p",
        [
            (MemorySpec.power_law(1.0), 0.6),
            (MemorySpec.constant(), 0.25),
            (MemorySpec.power_law(2.0), 0.7),
        ],
    )
    def test_eta_products_converge_toward_their_limits(self, spec, p):
        # a_n mu_n eta_n -> alpha/(1 - alpha(1-p)) and eta_n a_n nu_n / n -> 1/(1 - alpha(1-p)),
        # at a slow n^-(1-alpha(1-p)) pace: assert monotone approach over decades,
        # not proximity (see the rate notes in the decisions ledger)
        alpha = spec.alpha
        rho = 1.0 - alpha * (1.0 - p)
        seqs = _seqs(spec, p, 10**6)
        t1 = alpha / rho
        gaps = [abs(seqs.a_eta_mu[m - 1] - t1) for m in (10**4, 10**5, 10**6)]
        assert gaps[0] > gaps[1] > gaps[2]
        t2 = 1.0 / rho
        vals = seqs.eta * seqs.a_nu / np.arange(1, seqs.n_max + 1)
        gaps2 = [abs(vals[m - 1] - t2) for m in (10**4, 10**5, 10**6)]
        assert gaps2[0] > gaps2[1] > gaps2[2]

    def test_z_rate_tracks_limit_matrix_entry(self):
        # z_n/n approaches (1-alpha)^2/(1-alpha(1-p))^2, the (1,1) entry of the
        # asymptotic variance matrix, and is far from the variant carrying an
        # extra (1-p)^2 factor (see decisions ledger)
        p, alpha = 0.6, 2.0
        seqs = _seqs(MemorySpec.power_law(1.0), p, 10**6)
        rho = 1.0 - alpha * (1.0 - p)
        matrix_entry = (1.0 - alpha) ** 2 / rho**2  # 25
        variant = (1.0 - p) ** 2 * matrix_entry  # 4
        vals = {m: seqs.z[m - 1] / m for m in (10**4, 10**5, 10**6)}
        gaps = [abs(vals[m] - matrix_entry) for m in (10**4, 10**5, 10**6)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert abs(vals[10**6] - matrix_entry) < abs(vals[10**6] - variant)


class TestTransform:
    def test_reconstruction_identity_random_configs(self):
        rng = np.random.default_rng(17)
        families = [
            MemorySpec.constant(),
            MemorySpec.power_law(1.3),
            MemorySpec.gamma_ratio(0.8),
            MemorySpec.power_log(1.0, 1.0),
        ]
        steps = [
            StepModel.rademacher(),
            StepModel.gaussian(0.5, 2.0),
            StepModel.uniform(-1.0, 3.0),
            StepModel.discrete_table([-2.0, 0.5, 1.0], [0.2, 0.5, 0.3]),
        ]
        for i in range(12):
            memory = families[i % 4]
            alpha = memory.alpha
            lo, hi = max(0.0, (alpha - 1) / alpha), (2 * alpha - 1) / (2 * alpha)
            p = lo + (0.2 + 0.6 * rng.random()) * (hi - lo)
            cfg = WalkConfig(p=p, memory=memory, step=steps[i % 4], horizon=2000,
                             master_seed=100 + i)
            prefix = build_prefix(memory, 2000)
            traj = simulate(cfg, i, prefix)
            tr = martingale_transform(traj, build_sequences(prefix, p))
            bound = 1e-9 * (1.0 + np.max(np.abs(tr.S)))
            assert tr.reconstruction_residual() <= bound

    def test_full_reinforcement_scales_prefix_sums(self):
        # X identically x0 gives Y_n = nu_n x0, so M_n = a_n nu_n x0
        spec = MemorySpec.power_law(1.0)
        prefix = build_prefix(spec, 256)
        seqs = build_sequences(prefix, 0.6)
        traj = _manual_traj(np.full(256, 0.7), prefix.mu)
        tr = martingale_transform(traj, seqs)
        assert np.allclose(tr.M, seqs.a_nu * 0.7, rtol=1e-12)

    def test_qv_at_time_one_is_all_ones_matrix(self):
        # eta_1 = 0 and a_1 = mu_1 = 1 make v_1 = (1, 1); unit step variance
        prefix = build_prefix(MemorySpec.constant(), 8)
        seqs = build_sequences(prefix, 0.3)
        traj = simulate(
            WalkConfig(p=0.3, memory=MemorySpec.constant(), step=StepModel.rademacher(),
                       horizon=8, master_seed=0),
            0, prefix,
        )
        qv, _ = quadratic_variation(traj, seqs)
        assert np.array_equal(qv[0], np.ones((2, 2)))

    def test_diagonals_match_independent_scalar_forms(self):
        # recompute <M> and <N> as plain scalar sums straight from the walk
        cfg = WalkConfig(p=0.55, memory=MemorySpec.gamma_ratio(1.0),
                         step=StepModel.uniform(-2.0, 1.0), horizon=600, master_seed=5)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        seqs = build_sequences(prefix, cfg.p)
        traj = simulate(cfg, 1, prefix)
        tr = martingale_transform(traj, seqs)
        p = cfg.p
        x = (traj.X - cfg.step.mean) / cfg.step.sd
        y = np.cumsum(prefix.mu * x)
        u = np.cumsum(prefix.mu * x * x)
        a = np.exp(seqs.log_a)
        m_scalar = n_scalar = 0.0
        for k in range(1, cfg.horizon + 1):
            if k == 1:
                cond_var = 1.0
            else:
                cond_var = (1 - p) + p * u[k - 2] / prefix.nu[k - 2] \
                    - (p * y[k - 2] / prefix.nu[k - 2]) ** 2
            m_scalar += cond_var * (a[k - 1] * prefix.mu[k - 1]) ** 2
            n_scalar += cond_var * (1 - p * a[k - 1] * seqs.eta[k - 1] * prefix.mu[k - 1]) ** 2
            assert tr.qv[k - 1][1, 1] == pytest.approx(m_scalar, rel=1e-12)
            assert tr.qv[k - 1][0, 0] == pytest.approx(n_scalar, rel=1e-12)

    def test_increments_match_direct_differencing(self):
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.rademacher(), horizon=400, master_seed=8)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        seqs = build_sequences(prefix, cfg.p)
        tr = martingale_transform(simulate(cfg, 3, prefix), seqs)
        dm = np.diff(tr.M)
        dn = np.diff(tr.N)
        assert np.allclose(dm, seqs.a_mu[1:400] * tr.t_inc[1:], rtol=1e-9, atol=1e-12)
        assert np.allclose(
            dn, (1.0 - cfg.p * seqs.a_eta_mu[1:400]) * tr.t_inc[1:], rtol=1e-9, atol=1e-12
        )

    def test_correction_vanishes_when_weighted_sums_vanish(self):
        # the correction is proportional to Y_{k-1}^2
        prefix = build_prefix(MemorySpec.constant(), 64)
        seqs = build_sequences(prefix, 0.3)
        traj = _manual_traj(np.zeros(64), prefix.mu, var=1.0)
        _, correction = quadratic_variation(traj, seqs)
        assert np.all(correction == 0.0)

    def test_qv_matrices_positive_semidefinite(self):
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.rademacher(), horizon=1500, master_seed=14)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        qv, _ = quadratic_variation(simulate(cfg, 0, prefix), build_sequences(prefix, 0.6))
        for n in (1, 10, 100, 1499):
            eigs = np.linalg.eigvalsh(qv[n])
            assert eigs.min() >= -1e-9 * max(1.0, np.trace(qv[n]))

    def test_qv_diagonal_bounded_by_unclipped_sums(self):
        # dropping the negative Y^2 part can only enlarge the diagonal
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.uniform(-np.sqrt(3), np.sqrt(3)),
                         horizon=800, master_seed=2)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        seqs = build_sequences(prefix, cfg.p)
        traj = simulate(cfg, 4, prefix)
        tr = martingale_transform(traj, seqs)
        x = (traj.X - cfg.step.mean) / cfg.step.sd
        u = np.cumsum(prefix.mu * x * x)
        weights = np.empty(800)
        weights[0] = 1.0
        weights[1:] = (1 - cfg.p) + cfg.p * u[:-1] / prefix.nu[:-1]
        w_tilde = np.cumsum(weights * seqs.a_mu[:800] ** 2)
        z_tilde = np.cumsum(weights * (1 - cfg.p * seqs.a_eta_mu[:800]) ** 2)
        assert np.all(tr.qv[:, 1, 1] <= w_tilde + 1e-12)
        assert np.all(tr.qv[:, 0, 0] <= z_tilde + 1e-12)

    def test_length_mismatch_rejected(self):
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.rademacher(), horizon=100, master_seed=0)
        traj = simulate(cfg, 0)
        short = build_sequences(build_prefix(cfg.memory, 50), 0.6)
        with pytest.raises(ValueError):
            martingale_transform(traj, short)


class TestUnRatio:
    def test_rademacher_exactly_one(self):
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.rademacher(), horizon=200, master_seed=1)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        traj = simulate(cfg, 0, prefix)
        for n in (1, 7, 200):
            assert empirical_un_ratio(traj, prefix, n) == 1.0

    def test_first_step_is_squared_step(self):
        cfg = WalkConfig(p=0.6, memory=MemorySpec.power_law(1.0),
                         step=StepModel.gaussian(0.0, 1.0), horizon=10, master_seed=3)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        traj = simulate(cfg, 5, prefix)
        assert empirical_un_ratio(traj, prefix, 1) == pytest.approx(traj.X[0] ** 2, rel=1e-15)

    def test_unit_variance_steps_concentrate_at_one(self):
        # low p keeps the reinforcement amplification of the X^2-walk mild
        cfg = WalkConfig(p=0.25, memory=MemorySpec.constant(),
                         step=StepModel.uniform(-np.sqrt(3), np.sqrt(3)),
                         horizon=10**5, master_seed=77)
        prefix = build_prefix(cfg.memory, cfg.horizon)
        xs, _, _ = simulate_steps_batch(cfg, range(100), prefix)
        u_end = np.sum(prefix.mu * xs * xs, axis=1)
        ratios = u_end / prefix.nu[-1]
        assert np.all(np.abs(ratios - 1.0) <= 0.02)
