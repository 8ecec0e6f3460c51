import numpy as np
import pytest
from numpy.testing import assert_allclose

from tsindep import (
    DataError,
    ModelSpec,
    fit_var,
    influence_values,
    paired_residuals,
    psd_sqrt,
    residuals,
    simulate,
)
from tsindep.models import _fit_var_batch, _simulate_var, _var_onestep_batch


def make_var1_data(rng, n, coef, scale=1.0, burn=200):
    e = scale * rng.normal(size=(n + burn, coef.shape[0]))
    path = _simulate_var(coef, 1, False, e)
    return path[burn:]


class TestPsdSqrt:
    def test_identity(self):
        assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_random_psd_roundtrip(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = rng.normal(size=(4, 4))
            v = a @ a.T
            root = psd_sqrt(v)
            assert_allclose(root @ root, v, rtol=1e-10, atol=1e-12)
            assert np.array_equal(root, root.T)

    def test_materially_negative_raises(self):
        with pytest.raises(Exception):
            psd_sqrt(np.diag([1.0, -0.5]))

    def test_tiny_negative_clipped(self):
        v = np.diag([1.0, -1e-14])
        root = psd_sqrt(v)
        assert root[1, 1] == 0.0


class TestFitVar:
    def test_near_noiseless_recovery(self):
        # Simulate-then-fit oracle: an O(1) transient with 1e-6 innovations
        # pins the coefficients almost exactly.
        rng = np.random.default_rng(1)
        coef = np.array([[0.5, 0.1], [-0.2, 0.3]])
        e = 1e-6 * rng.normal(size=(500, 2))
        data = np.vstack([[1.0, -1.0], _simulate_var(coef, 1, False, e, init=[[1.0, -1.0]])])
        fit = fit_var(data, p=1, intercept=False)
        assert_allclose(fit.coef, coef, atol=1e-3)

    def test_iid_data_gives_small_coefficients(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(2000, 2))
        fit = fit_var(data, p=1, intercept=False)
        assert np.abs(fit.coef).max() < 0.1

    def test_too_few_observations(self):
        with pytest.raises(DataError):
            fit_var(np.zeros((2, 2)), p=1, intercept=False)

    def test_rank_deficient_design(self):
        data = np.ones((50, 2))  # constant columns, collinear with intercept
        with pytest.raises(Exception):
            fit_var(data, p=1, intercept=True)

    def test_normal_equations_hold(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(200, 2))
        fit = fit_var(data, p=2, intercept=True)
        target = data[2:]
        cols = [np.ones((198, 1)), data[1:199], data[0:198]]
        design = np.hstack(cols)
        cross = design.T @ fit.effective_residuals
        scale = np.abs(design).max() * np.abs(data).max()
        assert np.abs(cross).max() <= 1e-8 * scale

    def test_presample_rows_zero(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=(100, 2))
        fit = fit_var(data, p=3, intercept=False)
        assert_allclose(fit.residuals[:3], 0.0)
        assert fit.presample == 3
        assert fit.effective_residuals.shape == (97, 2)

    def test_theta_layout_row_major(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(100, 2))
        fit = fit_var(data, p=1, intercept=True)
        assert fit.theta.shape == (6,)
        assert_allclose(fit.theta.reshape(2, 3), fit.coef)

    def test_influence_mean_zero_on_training_data(self):
        # Exact by the normal equations.
        rng = np.random.default_rng(6)
        data = rng.normal(size=(300, 2))
        fit = fit_var(data, p=1, intercept=False)
        mean = fit.effective_influence.mean(axis=0)
        sd = fit.effective_influence.std(axis=0)
        assert (np.abs(mean) <= 5.0 * sd / np.sqrt(299) + 1e-12).all()
        assert np.abs(mean).max() < 1e-12


class TestResidualsOp:
    def test_residuals_match_training(self):
        rng = np.random.default_rng(7)
        data = rng.normal(size=(150, 2))
        fit = fit_var(data, p=1, intercept=True)
        again = residuals(fit, data)
        assert_allclose(again, fit.residuals, atol=1e-12)

    def test_zero_coefficient_var_returns_data(self):
        rng = np.random.default_rng(8)
        data = rng.normal(size=(100, 2))
        fit = fit_var(data, p=1, intercept=False)
        zero_fit = fit.__class__(
            model=fit.model,
            theta=np.zeros_like(fit.theta),
            residuals=fit.residuals,
            influence=fit.influence,
            n_obs=fit.n_obs,
            presample=fit.presample,
            init_values=fit.init_values,
            coef=np.zeros_like(fit.coef),
            gamma_inv=fit.gamma_inv,
        )
        out = residuals(zero_fit, data)
        assert_allclose(out[1:], data[1:], atol=1e-14)


class TestSimulate:
    def test_zero_coefficients_identity(self):
        rng = np.random.default_rng(9)
        e = rng.normal(size=(50, 2))
        spec = ModelSpec("var", p=1, intercept=False)
        out = simulate((spec, np.zeros(4)), e)
        assert_allclose(out, e, atol=1e-15)

    def test_simulate_residual_roundtrip(self):
        rng = np.random.default_rng(10)
        data = make_var1_data(rng, 300, np.array([[0.4, 0.1], [-0.3, 0.2]]))
        fit = fit_var(data, p=1, intercept=False)
        rebuilt = simulate(fit, fit.effective_residuals, init_state=fit.init_values)
        assert_allclose(rebuilt, data[1:], rtol=1e-8, atol=1e-10)

    def test_simulate_then_refit(self):
        rng = np.random.default_rng(11)
        coef = np.array([[0.4, 0.1], [-1.0, 0.5]])
        data = make_var1_data(rng, 2000, coef)
        fit = fit_var(data, p=1, intercept=False)
        assert_allclose(fit.coef, coef, atol=0.1)


class TestBatchHelpers:
    def test_batch_sim_matches_single(self):
        rng = np.random.default_rng(12)
        coef = np.array([[0.4, 0.1], [-0.2, 0.5]])
        e = rng.normal(size=(5, 60, 2))
        batch = _simulate_var(coef, 1, False, e)
        for b in range(5):
            solo = _simulate_var(coef, 1, False, e[b])
            assert_allclose(batch[b], solo, rtol=1e-12, atol=1e-14)

    def test_batch_fit_matches_single(self):
        rng = np.random.default_rng(13)
        data = rng.normal(size=(4, 120, 2))
        coefs, resid, _ = _fit_var_batch(data, p=1, intercept=False)
        for b in range(4):
            fit = fit_var(data[b], p=1, intercept=False)
            assert_allclose(coefs[b], fit.coef, rtol=1e-9, atol=1e-12)
            assert_allclose(resid[b], fit.effective_residuals, rtol=1e-9, atol=1e-12)

    def test_onestep_close_to_refit(self):
        # Both estimators are root-n consistent; on a fresh path from the
        # fitted dynamics they agree to a few hundredths at n=1000.
        rng = np.random.default_rng(14)
        coef = np.array([[0.4, 0.1], [-1.0, 0.5]])
        hits = 0
        for seed in range(20):
            local = np.random.default_rng(seed)
            data = make_var1_data(local, 1000, coef)
            fit = fit_var(data, p=1, intercept=False)
            e = local.normal(size=(1, 1500, 2))
            path = _simulate_var(fit.coef, 1, False, e)[:, 500:]
            refit_coef, _, _ = _fit_var_batch(path, 1, False)
            onestep_coef, _ = _var_onestep_batch(fit, path)
            if np.abs(refit_coef[0] - onestep_coef[0]).max() <= 0.05:
                hits += 1
        assert hits >= 18

    def test_onestep_zero_influence_returns_theta(self):
        rng = np.random.default_rng(15)
        data = make_var1_data(rng, 200, np.array([[0.3, 0.0], [0.0, 0.3]]))
        fit = fit_var(data, p=1, intercept=False)
        # A path that follows the fitted dynamics exactly has zero residuals
        # at theta-hat, hence zero influence values.
        exact = _simulate_var(fit.coef, 1, False, np.zeros((1, 100, 2)), init=np.ones((1, 2)) * 0.5)
        coef_b, _ = _var_onestep_batch(fit, exact)
        assert_allclose(coef_b[0], fit.coef, atol=1e-12)


class TestPairedResidualsAlignment:
    def test_same_order_alignment(self):
        rng = np.random.default_rng(16)
        data1 = rng.normal(size=(100, 2))
        data2 = rng.normal(size=(100, 2))
        pair = paired_residuals(fit_var(data1, 1, False), fit_var(data2, 1, False))
        assert pair.n == 99

    def test_different_orders_trim_to_common_start(self):
        rng = np.random.default_rng(17)
        data1 = rng.normal(size=(100, 2))
        data2 = rng.normal(size=(100, 2))
        fit1 = fit_var(data1, 1, False)
        fit2 = fit_var(data2, 3, False)
        pair = paired_residuals(fit1, fit2)
        assert pair.n == 97
        assert_allclose(pair.eta1, fit1.effective_residuals[2:])
        assert_allclose(pair.eta2, fit2.effective_residuals)

    def test_influence_values_on_new_data(self):
        rng = np.random.default_rng(18)
        data = rng.normal(size=(150, 2))
        fit = fit_var(data, 1, False)
        fresh = rng.normal(size=(150, 2))
        infl = influence_values(fit, fresh)
        resid_new = residuals(fit, fresh)[1:]
        target, design = fresh[1:], fresh[:-1]
        expected_mean = (
            (resid_new[:, :, None] * (design @ fit.gamma_inv)[:, None, :]).reshape(149, 4).mean(0)
        )
        assert_allclose(infl[1:].mean(0), expected_mean, rtol=1e-10)
