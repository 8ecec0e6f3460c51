import numpy as np
import pytest
from numpy.testing import assert_allclose

from tsindep import (
    BootstrapConfig,
    DataError,
    LagConfig,
    SingularityError,
    bootstrap_estimate,
    bootstrap_run,
    bootstrap_test,
    fit_ccc_garch,
    fit_var,
    hsic_test_suite,
    resample_innovations,
    standardize_residuals,
)
from tsindep._streams import substream
from tsindep.models import _simulate_var


def var_fit_pair(seed=0, n=80, phi=0.3):
    rng = np.random.default_rng(seed)
    coef = np.array([[phi, 0.0], [0.0, phi]])
    e1 = rng.normal(size=(n + 100, 2))
    e2 = rng.normal(size=(n + 100, 2))
    y1 = _simulate_var(coef, 1, False, e1)[100:]
    y2 = _simulate_var(coef, 1, False, e2)[100:]
    return fit_var(y1, 1, False), fit_var(y2, 1, False)


class TestStandardize:
    def test_centering_only(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(50, 2)) + np.array([5.0, 5.0])
        out = standardize_residuals(x, "center")
        assert np.abs(out.mean(axis=0)).max() < 1e-13

    def test_whitening_gives_identity_covariance(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(200, 3)) @ np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.3], [0.0, 0.0, 2.0]])
        out = standardize_residuals(x, "whiten")
        cov = out.T @ out / 200
        assert_allclose(cov, np.eye(3), atol=1e-10)
        assert np.abs(out.mean(axis=0)).max() < 1e-13

    def test_whitening_idempotent_up_to_numerics(self):
        rng = np.random.default_rng(2)
        x = standardize_residuals(rng.normal(size=(100, 2)), "whiten")
        again = standardize_residuals(x, "whiten")
        cov = again.T @ again / 100
        assert_allclose(cov, np.eye(2), atol=1e-10)

    def test_singular_covariance_rejected(self):
        x = np.column_stack([np.arange(20.0), np.arange(20.0)])
        with pytest.raises(SingularityError):
            standardize_residuals(x, "whiten")

    def test_none_mode_returns_copy(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(30, 2))
        out = standardize_residuals(x, "none")
        assert np.array_equal(out, x)
        assert out is not x


class TestResample:
    def test_single_row_pool(self):
        pool = np.array([[1.5, -2.0]])
        rng = substream(0, 1)
        out = resample_innovations(pool, 10, rng)
        assert_allclose(out, np.tile(pool, (10, 1)))

    def test_fixed_seed_bit_identical(self):
        pool = np.random.default_rng(4).normal(size=(50, 2))
        a = resample_innovations(pool, 100, substream(7, 1, 2))
        b = resample_innovations(pool, 100, substream(7, 1, 2))
        assert np.array_equal(a, b)

    def test_multinomial_concentration(self):
        # Each of 100 distinct rows should appear with frequency ~1/100.
        pool = np.arange(100.0)[:, None]
        out = resample_innovations(pool, 10_000, substream(9, 1))
        counts = np.bincount(out[:, 0].astype(int), minlength=100)
        freq = counts / 10_000
        assert freq.min() >= 0.005
        assert freq.max() <= 0.015


class TestBootstrapEstimate:
    def test_var_full_refit_satisfies_normal_equations(self):
        fit, _ = var_fit_pair()
        rng = np.random.default_rng(5)
        path = rng.normal(size=(80, 2))
        theta = bootstrap_estimate(fit, path, mode="full_refit")
        refit = fit_var(path, 1, False)
        assert_allclose(theta, refit.theta, rtol=1e-12)

    def test_var_one_step_zero_influence(self):
        fit, _ = var_fit_pair()
        # A path following the fitted dynamics exactly has zero residuals at
        # theta-hat, so the one-step update vanishes.
        path = _simulate_var(fit.coef, 1, False, np.zeros((60, 2)), init=np.full((1, 2), 0.3))
        theta = bootstrap_estimate(fit, path, mode="one_step")
        assert_allclose(theta, fit.theta, atol=1e-12)

    def test_garch_one_step_stays_valid(self):
        rng = np.random.default_rng(6)
        from tsindep.models import _simulate_garch

        theta0 = np.array([0.2, 0.1, 0.5, 0.2, 0.1, 0.5, 0.4])
        mix = np.linalg.cholesky(np.array([[1.0, 0.4], [0.4, 1.0]]))
        e = rng.normal(size=(700, 2)) @ mix.T
        data = _simulate_garch(theta0, e)[500:]
        fit = fit_ccc_garch(data, seed=0)
        fresh = _simulate_garch(fit.theta, rng.normal(size=(700, 2)) @ mix.T)[500:]
        theta = bootstrap_estimate(fit, fresh, mode="one_step")
        assert theta[0] > 0 and theta[3] > 0
        assert theta[1] + theta[2] < 1 and theta[4] + theta[5] < 1
        assert abs(theta[6]) < 1


class TestBootstrapRun:
    def test_determinism_and_thread_invariance(self):
        fit1, fit2 = var_fit_pair(seed=10)
        cfgs = [LagConfig(direction=1, m=0), LagConfig(direction=2, m=2), LagConfig(direction=1, max_lag=2)]
        base = BootstrapConfig(n_replicates=67, master_seed=42, threads=1)
        runs = [bootstrap_run(fit1, fit2, cfgs, cfg=base)]
        for threads in (4, 8):
            cfg = BootstrapConfig(n_replicates=67, master_seed=42, threads=threads)
            runs.append(bootstrap_run(fit1, fit2, cfgs, cfg=cfg))
        for other in runs[1:]:
            for a, b in zip(runs[0], other):
                assert np.array_equal(a.replicate_stats, b.replicate_stats)
                assert a.p_value == b.p_value
                assert a.critical_values == b.critical_values

    def test_replicates_independent_of_requested_stats(self):
        # Asking for more statistics must not change the others' results.
        fit1, fit2 = var_fit_pair(seed=11)
        cfg = BootstrapConfig(n_replicates=33, master_seed=3)
        solo = bootstrap_test(fit1, fit2, LagConfig(direction=1, m=0), cfg=cfg)
        multi = bootstrap_run(
            fit1, fit2, [LagConfig(direction=1, m=0), LagConfig(direction=2, m=1)], cfg=cfg
        )
        assert np.array_equal(solo.replicate_stats, multi[0].replicate_stats)
        assert solo.p_value == multi[0].p_value

    def test_pvalue_conventions(self):
        fit1, fit2 = var_fit_pair(seed=12)
        cfg = BootstrapConfig(n_replicates=1, master_seed=0)
        res = bootstrap_test(fit1, fit2, LagConfig(direction=1, m=0), cfg=cfg)
        assert res.p_value in (0.5, 1.0)

    def test_pvalue_critical_value_coherence(self):
        fit1, fit2 = var_fit_pair(seed=13)
        cfg = BootstrapConfig(n_replicates=99, alphas=(0.05, 0.10), master_seed=5)
        for lag_cfg in (LagConfig(direction=1, m=0), LagConfig(direction=1, max_lag=2)):
            res = bootstrap_test(fit1, fit2, lag_cfg, cfg=cfg)
            for alpha, crit in res.critical_values.items():
                assert (res.p_value <= alpha) == (res.observed > crit), (
                    f"incoherent at alpha={alpha}: p={res.p_value}, obs={res.observed}, c={crit}"
                )

    def test_critical_values_monotone(self):
        fit1, fit2 = var_fit_pair(seed=14)
        cfg = BootstrapConfig(n_replicates=99, alphas=(0.01, 0.05, 0.10), master_seed=6)
        res = bootstrap_test(fit1, fit2, LagConfig(direction=1, m=0), cfg=cfg)
        assert res.critical_values[0.01] >= res.critical_values[0.05] >= res.critical_values[0.10]

    def test_replicate_stats_nonnegative_and_finite(self):
        fit1, fit2 = var_fit_pair(seed=15)
        res = bootstrap_test(
            fit1, fit2, LagConfig(direction=1, m=0), cfg=BootstrapConfig(n_replicates=50, master_seed=1)
        )
        assert np.isfinite(res.replicate_stats).all()
        assert (res.replicate_stats >= -1e-9).all()

    def test_observed_zero_gives_pvalue_one(self):
        # Constant residuals on one side force the observed statistic to 0;
        # every replicate statistic is >= 0, so the p-value is exactly 1.
        fit1, fit2 = var_fit_pair(seed=16)
        const = np.full_like(fit2.residuals, 0.7)
        frozen = fit2.__class__(
            model=fit2.model, theta=fit2.theta, residuals=const, influence=fit2.influence,
            n_obs=fit2.n_obs, presample=fit2.presample, init_values=fit2.init_values,
            coef=fit2.coef, gamma_inv=fit2.gamma_inv,
        )
        res = bootstrap_test(
            fit1, frozen, LagConfig(direction=1, m=0),
            cfg=BootstrapConfig(
                n_replicates=19, master_seed=2, standardize="none", estimator_mode="one_step"
            ),
        )
        assert abs(res.observed) < 1e-12
        assert res.p_value == 1.0

    def test_infeasible_lag_rejected(self):
        fit1, fit2 = var_fit_pair(seed=17)
        with pytest.raises(DataError):
            bootstrap_test(fit1, fit2, LagConfig(direction=1, m=200))

    def test_scaled_stats_bounded_in_n(self):
        # Median of replicate statistics moves by less than 1.5x when the
        # sample doubles (stochastic boundedness of n * S under the null),
        # on the independence benchmark system.
        from tsindep import EgpSpec, egp_innovations, gen_var_pair

        medians = {}
        for n in (100, 200):
            e = egp_innovations(EgpSpec.from_id(1), n + 500, substream(n, 77))
            y1, y2 = gen_var_pair(e, 500)
            fit1, fit2 = fit_var(y1, 1, False), fit_var(y2, 1, False)
            res = bootstrap_test(
                fit1, fit2, LagConfig(direction=1, m=0),
                cfg=BootstrapConfig(n_replicates=99, master_seed=0),
            )
            medians[n] = np.median(res.replicate_stats)
        ratio = medians[200] / medians[100]
        assert 1 / 1.5 < ratio < 1.5


class TestSuiteWrapper:
    def test_outcome_fields(self):
        fit1, fit2 = var_fit_pair(seed=18)
        cfg = BootstrapConfig(n_replicates=39, master_seed=4)
        outcomes = hsic_test_suite(
            fit1, fit2,
            [LagConfig(direction=1, m=0), LagConfig(direction=2, max_lag=3)],
            cfg=cfg, keep_replicates=True,
        )
        s, j = outcomes
        assert s.name == "S1(0)" and j.name == "J2(3)"
        assert s.n == 79 and s.n_effective == 79
        assert j.n_effective == 76
        assert s.replicates.shape == (39,)
        assert s.reference == "bootstrap(B=39)"
        assert_allclose(s.scaled, s.statistic * s.n, rtol=1e-12)
