"""Conditional-variance pipeline: CCC-GARCH fits and the one-step bootstrap.

Re-estimating a GARCH model on every bootstrap path is expensive; the
one-step estimator adds the averaged influence values instead (a Newton
step in the optimization coordinates) and is the default for this model.
The full-refit branch at the end takes a few minutes; the one-step branch
a few seconds.
"""

import time

import numpy as np

from tsindep import BootstrapConfig, BootstrapError, LagConfig, bootstrap_test, fit_ccc_garch
from tsindep.models import _simulate_garch

rng = np.random.default_rng(3)
theta = np.array([0.2, 0.1, 0.5, 0.2, 0.1, 0.5, 0.5])


def correlated(rows, rho):
    mix = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    return rng.normal(size=(rows, 2)) @ mix.T


# two independent GARCH series (the innovations of each are correlated
# ACROSS components, which the constant-correlation parameter captures)
n = 600
y1 = _simulate_garch(theta, correlated(n + 500, 0.5))[500:]
y2 = _simulate_garch(theta, correlated(n + 500, 0.5))[500:]

fit1 = fit_ccc_garch(y1, seed=0)
fit2 = fit_ccc_garch(y2, seed=1)
names = ("omega1", "alpha1", "beta1", "omega2", "alpha2", "beta2", "rho")
print("series-1 fit:", {k: round(v, 3) for k, v in zip(names, fit1.theta)})
print("loglik:", round(fit1.loglik, 2))

for mode in ("one_step", "full_refit"):
    cfg = BootstrapConfig(n_replicates=99, estimator_mode=mode, master_seed=5)
    start = time.time()
    try:
        res = bootstrap_test(fit1, fit2, LagConfig(direction=1, m=0), cfg=cfg)
    except BootstrapError as exc:
        # Full refits on short GARCH paths regularly run into the
        # persistence boundary; the run aborts once the failure budget
        # (2% of replicates) is exceeded.  The one-step estimator does not
        # have this failure mode, which is one reason it is the default.
        print(f"{mode:10s}: aborted -- {exc}")
        continue
    elapsed = time.time() - start
    print(
        f"{mode:10s}: n*S(0) = {res.observed:.4f}, 95% bound = {res.critical_values[0.05]:.4f}, "
        f"p = {res.p_value:.3f}, failed replicates = {res.n_failed}  [{elapsed:.1f}s]"
    )
