"""Time-series models: fitting, residuals, forward simulation, influence.

Two model kinds are supported:

- ``var``: a d-dimensional VAR(p) estimated by multivariate least squares.
  Residuals are defined for t > p; the first p rows of the stored residual
  (and influence) matrices are zero-filled and excluded from everything
  downstream via ``FitResult.effective_residuals``.
- ``ccc_garch``: a bivariate GARCH(1,1) with constant conditional
  correlation in its standard form ``Y_t = D_t^{1/2} eps_t``, where
  ``D_t = diag(v_t,1, v_t,2)``, each component follows
  ``v_t,i = omega_i + alpha_i * Y_{t-1,i}^2 + beta_i * v_{t-1,i}``, and the
  i.i.d. innovations ``eps_t`` have unit variances and constant correlation
  ``rho`` (so the conditional covariance is ``v_t,12 = rho sqrt(v_t,1 v_t,2)``
  and the Gaussian quasi-likelihood is the usual CCC one).  Residuals are
  the component-wise standardized ``eps_hat_t = D_t^{-1/2} Y_t``; their
  sample correlation estimates ``rho``.

Every fit records per-observation influence values: the averaged influence
evaluated on a new sample is the one-step estimator update used by the
fast bootstrap.  For least squares the influence of observation t is
``vec(eta_t x_t' Gamma^{-1})`` (row-major vec, matching the parameter
layout); for the QMLE it is ``H^{-1} s_t`` with ``s_t`` the per-observation
score and ``H`` the observed information (minus the averaged Hessian of
the log-likelihood), so the one-step update is a Newton step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import expit

from ._streams import FIT, substream
from .exceptions import BoundaryError, DataError, FitError, SingularityError
from .hsic import PairedResiduals
from .kernels import as_points

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus structural options.

    ``p`` and ``intercept`` apply to ``var`` only; the GARCH order is fixed
    at (1, 1).
    """

    kind: str
    p: int = 1
    intercept: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("var", "ccc_garch"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "var" and self.p < 1:
            raise ValueError("VAR order p must be >= 1")


@dataclass(frozen=True)
class FitResult:
    """A fitted model: estimates, residuals, influence values, init state.

    ``theta`` layout: for ``var``, the row-major stacking of the d x q
    coefficient matrix ``[intercept | A_1 | ... | A_p]``; for ``ccc_garch``,
    ``(omega1, alpha1, beta1, omega2, alpha2, beta2, rho)``.
    """

    model: ModelSpec
    theta: np.ndarray
    residuals: np.ndarray
    influence: np.ndarray
    n_obs: int
    presample: int
    init_values: Any
    loglik: float | None = None
    coef: np.ndarray | None = None
    gamma_inv: np.ndarray | None = None
    info_inv: np.ndarray | None = None
    x_hat: np.ndarray | None = None
    xinfo_inv: np.ndarray | None = None

    @property
    def effective_residuals(self) -> np.ndarray:
        return self.residuals[self.presample :]

    @property
    def effective_influence(self) -> np.ndarray:
        return self.influence[self.presample :]


# ---------------------------------------------------------------------------
# Symmetric PSD square roots
# ---------------------------------------------------------------------------


def psd_sqrt(V, *, clip_tol: float = 1e-10, error_tol: float = 1e-8) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in ``[-clip_tol * ||V||, 0)`` are clipped to zero; anything
    materially negative (below ``-error_tol * ||V||``) raises.
    """
    mat = np.asarray(V, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DataError("psd_sqrt expects a square matrix")
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-10 * max(1.0, float(np.abs(mat).max()))):
        raise DataError("psd_sqrt expects a symmetric matrix")
    w, u = np.linalg.eigh(0.5 * (mat + mat.T))
    scale = max(float(np.abs(w).max()), 1e-300)
    if w.min() < -error_tol * scale:
        raise SingularityError(f"matrix has a materially negative eigenvalue: {w.min():g}")
    w = np.clip(w, 0.0, None)
    root = (u * np.sqrt(w)) @ u.T
    return 0.5 * (root + root.T)


def _sqrt2x2(v1, v2, v12):
    """Entries (s11, s22, s12) of the symmetric sqrt of [[v1, v12], [v12, v2]].

    Closed form for PSD 2x2: (V + sqrt(det) I) / sqrt(trace + 2 sqrt(det)).
    Vectorized over leading dimensions.
    """
    det = v1 * v2 - v12 * v12
    s = np.sqrt(np.maximum(det, 0.0))
    t = np.sqrt(v1 + v2 + 2.0 * s)
    return (v1 + s) / t, (v2 + s) / t, v12 / t


# ---------------------------------------------------------------------------
# VAR(p) least squares
# ---------------------------------------------------------------------------


def _var_design(data: np.ndarray, p: int, intercept: bool):
    n, d = data.shape
    target = data[p:]
    cols = []
    if intercept:
        cols.append(np.ones((n - p, 1)))
    for j in range(1, p + 1):
        cols.append(data[p - j : n - j])
    design = np.hstack(cols)
    return target, design


def fit_var(data, p: int = 1, intercept: bool = False) -> FitResult:
    """Multivariate least squares for a VAR(p).

    Requires a full-rank regressor matrix and strictly more effective
    observations than parameters per equation.
    """
    y = as_points(data, min_rows=2)
    n, d = y.shape
    q = d * p + (1 if intercept else 0)
    if n - p < q + 1:
        raise DataError(
            f"insufficient observations: n={n} leaves {n - p} rows for {q} regressors"
        )
    target, design = _var_design(y, p, intercept)
    gram = design.T @ design
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularityError(f"rank-deficient VAR design (cond={cond:.3g})")
    coef_t = np.linalg.solve(gram, design.T @ target)  # (q, d)
    coef = coef_t.T  # (d, q) = [intercept | A_1 | ... | A_p]
    resid_eff = target - design @ coef_t
    n_eff = n - p
    gamma_inv = np.linalg.inv(gram / n_eff)
    scaled_x = design @ gamma_inv  # rows Gamma^{-1} x_t
    infl_eff = (resid_eff[:, :, None] * scaled_x[:, None, :]).reshape(n_eff, d * q)
    residuals = np.zeros((n, d))
    residuals[p:] = resid_eff
    influence = np.zeros((n, d * q))
    influence[p:] = infl_eff
    return FitResult(
        model=ModelSpec("var", p=p, intercept=intercept),
        theta=coef.ravel().copy(),
        residuals=residuals,
        influence=influence,
        n_obs=n,
        presample=p,
        init_values=y[:p].copy(),
        coef=coef,
        gamma_inv=gamma_inv,
    )


def _var_residuals(coef: np.ndarray, data: np.ndarray, p: int, intercept: bool) -> np.ndarray:
    n, d = data.shape
    target, design = _var_design(data, p, intercept)
    out = np.zeros((n, d))
    out[p:] = target - design @ coef.T
    return out


def _simulate_var(coef, p, intercept, innovations, init=None):
    e = np.asarray(innovations, dtype=float)
    d = e.shape[-1]
    n_out = e.shape[-2]
    batched = e.ndim == 3
    if not batched:
        e = e[None]
    nb = e.shape[0]
    if init is None:
        init = np.zeros((p, d))
    init = np.asarray(init, dtype=float)
    if init.shape != (p, d):
        raise DataError(f"init state must be {p} x {d}")
    buf = np.empty((nb, p + n_out, d))
    buf[:, :p] = init
    c = coef[:, 0] if intercept else np.zeros(d)
    mats = []
    offset = 1 if intercept else 0
    for j in range(p):
        mats.append(coef[:, offset + j * d : offset + (j + 1) * d])
    for t in range(n_out):
        acc = e[:, t] + c
        for j, a in enumerate(mats):
            acc = acc + buf[:, p + t - 1 - j] @ a.T
        buf[:, p + t] = acc
    out = buf[:, p:]
    return out if batched else out[0]


def _fit_var_batch(data: np.ndarray, p: int, intercept: bool):
    """Least-squares refit of many paths at once.

    Returns ``(coef, residuals, valid)``; paths with a (numerically)
    singular design are flagged invalid rather than raising, so bootstrap
    callers can count them against the failure budget.
    """
    nb, n, d = data.shape
    target = data[:, p:]
    cols = []
    if intercept:
        cols.append(np.ones((nb, n - p, 1)))
    for j in range(1, p + 1):
        cols.append(data[:, p - j : n - j])
    design = np.concatenate(cols, axis=2)
    gram = np.einsum("bti,btj->bij", design, design)
    xty = np.einsum("bti,btk->bik", design, target)
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(gram)
    valid = np.isfinite(cond) & (cond < _COND_LIMIT)
    safe_gram = np.where(valid[:, None, None], gram, np.eye(gram.shape[1])[None])
    coef_t = np.linalg.solve(safe_gram, xty)  # (nb, q, d)
    resid = target - np.einsum("btq,bqk->btk", design, coef_t)
    return np.swapaxes(coef_t, 1, 2), resid, valid


def _var_onestep_batch(fit: FitResult, data: np.ndarray):
    """One-step parameter update and residuals at the updated estimate."""
    p, intercept = fit.model.p, fit.model.intercept
    nb, n, d = data.shape
    target = data[:, p:]
    cols = []
    if intercept:
        cols.append(np.ones((nb, n - p, 1)))
    for j in range(1, p + 1):
        cols.append(data[:, p - j : n - j])
    design = np.concatenate(cols, axis=2)
    resid_at_hat = target - np.einsum("btq,kq->btk", design, fit.coef)
    scaled = np.einsum("btq,qr->btr", design, fit.gamma_inv)
    mean_infl = np.einsum("btk,btr->bkr", resid_at_hat, scaled) / (n - p)
    coef = fit.coef[None] + mean_infl
    resid = target - np.einsum("btq,bkq->btk", design, coef)
    return coef, resid


# ---------------------------------------------------------------------------
# CCC-GARCH(1,1) by Gaussian QMLE
# ---------------------------------------------------------------------------

_LOG_2PI = float(np.log(2.0 * np.pi))


def _garch_check_theta(theta, allow_explosive: bool = False) -> None:
    th = np.asarray(theta, dtype=float)
    if th.shape != (7,):
        raise DataError("ccc_garch theta must have 7 entries")
    w1, a1, b1, w2, a2, b2, rho = th
    if w1 <= 0 or w2 <= 0:
        raise DataError("omega parameters must be positive")
    if min(a1, b1, a2, b2) < 0:
        raise DataError("alpha/beta parameters must be nonnegative")
    if abs(rho) >= 1:
        raise DataError("|rho| must be < 1")
    if not allow_explosive and (a1 + b1 >= 1 or a2 + b2 >= 1):
        raise DataError("explosive parameters (alpha + beta >= 1); pass allow_explosive")


def _garch_component_path(omega: float, alpha: float, beta: float, y2: np.ndarray, v0: float):
    """Variance recursion v_t = omega + alpha y_{t-1}^2 + beta v_{t-1}, v_1 = v0."""
    n = y2.shape[0]
    v = np.empty(n)
    v[0] = v0
    if n > 1:
        drive = omega + alpha * y2[:-1]
        v[1:] = lfilter([1.0], [1.0, -beta], drive, zi=np.array([beta * v0]))[0]
    return v


def garch_variance_path(theta, data, v_init=None) -> np.ndarray:
    """Per-component conditional variance paths (n x 2) for given data.

    ``v_init`` defaults to the per-column sample variances of ``data``
    (divisor n), the same initialization the fit uses.
    """
    y = as_points(data)
    if y.shape[1] != 2:
        raise DataError("ccc_garch supports bivariate series only")
    th = np.asarray(theta, dtype=float)
    if v_init is None:
        v_init = y.var(axis=0)
    v_init = np.asarray(v_init, dtype=float)
    y2 = y**2
    v = np.empty_like(y)
    for i in range(2):
        w, a, b = th[3 * i : 3 * i + 3]
        v[:, i] = _garch_component_path(w, a, b, y2[:, i], v_init[i])
    return v


def garch_loglik_terms(theta, data, v_init=None) -> np.ndarray:
    """Per-observation Gaussian log-likelihood contributions."""
    y = as_points(data)
    v = garch_variance_path(theta, data, v_init)
    rho = float(np.asarray(theta, dtype=float)[6])
    if not (v > 0).all():
        raise FitError("nonpositive conditional variance along the path")
    z = y / np.sqrt(v)
    one_m = 1.0 - rho * rho
    quad = (z[:, 0] ** 2 - 2.0 * rho * z[:, 0] * z[:, 1] + z[:, 1] ** 2) / one_m
    return -0.5 * (np.log(v[:, 0]) + np.log(v[:, 1]) + np.log(one_m) + quad) - _LOG_2PI


def _garch_pack(theta: np.ndarray) -> np.ndarray:
    def logit(p):
        p = min(max(p, 1e-12), 1.0 - 1e-12)
        return np.log(p / (1.0 - p))

    x = np.empty(7)
    for i in range(2):
        w, a, b = theta[3 * i : 3 * i + 3]
        s = a + b
        frac = a / s if s > 0 else 0.5
        x[3 * i] = np.log(w)
        x[3 * i + 1] = logit(frac)
        x[3 * i + 2] = logit(s)
    x[6] = np.arctanh(min(max(theta[6], -1.0 + 1e-12), 1.0 - 1e-12))
    return x


def _garch_unpack(x: np.ndarray) -> np.ndarray:
    theta = np.empty(7)
    for i in range(2):
        w = np.exp(x[3 * i])
        frac = expit(x[3 * i + 1])
        s = expit(x[3 * i + 2])
        theta[3 * i] = w
        theta[3 * i + 1] = frac * s
        theta[3 * i + 2] = (1.0 - frac) * s
    theta[6] = np.tanh(x[6])
    return theta


# Coordinate caps keep unpacked parameters strictly inside the valid region
# (tanh(8) < 1 - 1e-7) while leaving the logistic coordinates free to
# saturate harmlessly.
_X_CAP = np.array([40.0, 40.0, 40.0, 40.0, 40.0, 40.0, 8.0])


def _garch_unpack_batch(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, -_X_CAP, _X_CAP)
    theta = np.empty_like(x)
    for i in range(2):
        theta[:, 3 * i] = np.exp(x[:, 3 * i])
        frac = expit(x[:, 3 * i + 1])
        s = expit(x[:, 3 * i + 2])
        theta[:, 3 * i + 1] = frac * s
        theta[:, 3 * i + 2] = (1.0 - frac) * s
    theta[:, 6] = np.tanh(x[:, 6])
    return theta


def _fd_plan(theta: np.ndarray):
    """Finite-difference steps/sides for per-parameter score derivatives.

    Central differences where both perturbations stay in the valid region,
    one-sided otherwise (alpha/beta near 0, alpha+beta near 1, |rho| near 1).
    """
    plan = []
    for j in range(7):
        h = 6.0e-6 * max(1.0, abs(float(theta[j])))
        if j == 6:
            h = min(h, 0.5 * (1.0 - abs(float(theta[6])) + 1e-12))
            plan.append((h, "central"))
            continue
        i, k = divmod(j, 3)
        w, a, b = theta[3 * i : 3 * i + 3]
        s = a + b
        if k == 0:
            down_ok = w - h > 0
            up_ok = True
        else:
            value = a if k == 1 else b
            down_ok = value - h >= 0
            up_ok = s + h < 1.0
        if down_ok and up_ok:
            plan.append((h, "central"))
        elif up_ok:
            plan.append((h, "forward"))
        elif down_ok:
            plan.append((h, "backward"))
        else:
            plan.append((h, "skip"))
    return plan


def _garch_hessian_plan(theta: np.ndarray):
    """Outer finite-difference steps for curvature; wider than the score steps."""
    plan = []
    for j in range(7):
        h = 1e-3 * max(1.0, abs(float(theta[j])))
        if j == 6:
            h = min(h, 0.5 * (1.0 - abs(float(theta[6])) + 1e-12))
            plan.append((h, "central"))
            continue
        i, k = divmod(j, 3)
        w, a, b = theta[3 * i : 3 * i + 3]
        s = a + b
        if k == 0:
            down_ok = w - h > 0
            up_ok = True
        else:
            value = a if k == 1 else b
            down_ok = value - h >= 0
            up_ok = s + h < 1.0
        if down_ok and up_ok:
            plan.append((h, "central"))
        elif up_ok:
            plan.append((h, "forward"))
        else:
            plan.append((h, "backward"))
    return plan


def _garch_curvature(theta, data, v_init) -> np.ndarray:
    """Observed information: minus the per-observation-averaged Hessian of
    the log-likelihood, from finite differences of the total score."""
    th = np.asarray(theta, dtype=float)
    n = data.shape[0]

    def total_score(point):
        return _garch_scores(point, data, v_init).sum(axis=0)

    columns = np.empty((7, 7))
    for j, (h, mode) in enumerate(_garch_hessian_plan(th)):
        if mode == "central":
            up = th.copy()
            up[j] += h
            dn = th.copy()
            dn[j] -= h
            columns[:, j] = (total_score(up) - total_score(dn)) / (2.0 * h)
        else:
            sign = 1.0 if mode == "forward" else -1.0
            pt = th.copy()
            pt[j] += sign * h
            columns[:, j] = sign * (total_score(pt) - total_score(th)) / h
    hess = -0.5 * (columns + columns.T) / n
    w, u = np.linalg.eigh(hess)
    top = float(w.max())
    if top <= 0.0:
        raise SingularityError("log-likelihood curvature is not positive definite")
    w = np.maximum(w, 1e-8 * top)
    return (u * w) @ u.T


def _garch_scores(theta, data, v_init) -> np.ndarray:
    """Per-observation scores (n x 7) by finite differences of the loglik."""
    th = np.asarray(theta, dtype=float)
    n = data.shape[0]
    scores = np.zeros((n, 7))
    base = None
    for j, (h, mode) in enumerate(_fd_plan(th)):
        if mode == "skip":
            continue
        if mode == "central":
            up = th.copy()
            up[j] += h
            dn = th.copy()
            dn[j] -= h
            scores[:, j] = (
                garch_loglik_terms(up, data, v_init) - garch_loglik_terms(dn, data, v_init)
            ) / (2.0 * h)
        else:
            if base is None:
                base = garch_loglik_terms(th, data, v_init)
            sign = 1.0 if mode == "forward" else -1.0
            pt = th.copy()
            pt[j] += sign * h
            scores[:, j] = sign * (garch_loglik_terms(pt, data, v_init) - base) / h
    return scores


def fit_ccc_garch(
    data,
    seed: int = 0,
    n_starts: int = 3,
    maxiter: int = 500,
    gtol: float = 1e-7,
) -> FitResult:
    """Gaussian QMLE of the bivariate constant-correlation GARCH(1,1).

    Optimizes an unconstrained reparameterization (log omega, logistic
    alpha-fraction and persistence, atanh rho) with BFGS and numerical
    gradients, from ``n_starts`` perturbed method-of-moments starting
    points.  Boundary solutions (alpha + beta within 1e-6 of 1) raise
    :class:`BoundaryError`; non-convergence of all starts raises
    :class:`FitError`.
    """
    y = as_points(data, min_rows=50)
    n, d = y.shape
    if d != 2:
        raise DataError("ccc_garch requires a bivariate series")
    col_var = y.var(axis=0)
    if (col_var < 1e-12 * max(1.0, float(np.abs(y).max()) ** 2)).any():
        raise FitError("degenerate likelihood: a component has (near-)zero variance")
    v_init = col_var.copy()

    corr = float(np.corrcoef(y[:, 0], y[:, 1])[0, 1])
    theta0 = np.array(
        [
            col_var[0] * 0.3, 0.10, 0.60,
            col_var[1] * 0.3, 0.10, 0.60,
            min(max(corr, -0.9), 0.9),
        ]
    )
    x0 = _garch_pack(theta0)

    def negll(x):
        terms = garch_loglik_terms(_garch_unpack(x), y, v_init)
        return -float(terms.mean())

    rng = substream(seed, FIT)
    candidates = []
    for start in range(max(1, n_starts)):
        x_start = x0 if start == 0 else x0 + 0.3 * rng.standard_normal(7)
        res = minimize(
            negll, x_start, method="BFGS", options={"gtol": gtol, "maxiter": maxiter}
        )
        gnorm = float(np.max(np.abs(res.jac))) if res.jac is not None else np.inf
        if np.isfinite(res.fun) and gnorm < 1e-5:
            candidates.append((float(res.fun), gnorm, res.x.copy()))
    if not candidates:
        raise FitError("QMLE did not converge from any starting point")
    candidates.sort(key=lambda c: c[0])
    x_hat = candidates[0][2]
    theta = _garch_unpack(x_hat)

    for i in range(2):
        if theta[3 * i + 1] + theta[3 * i + 2] >= 1.0 - 1e-6:
            raise BoundaryError(
                f"component {i + 1} persistence alpha + beta = "
                f"{theta[3 * i + 1] + theta[3 * i + 2]:.8f} is at the boundary"
            )

    v = garch_variance_path(theta, y, v_init)
    residuals = y / np.sqrt(v)
    loglik = float(garch_loglik_terms(theta, y, v_init).sum())
    scores = _garch_scores(theta, y, v_init)
    info = _garch_curvature(theta, y, v_init)
    cond = np.linalg.cond(info)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise SingularityError(f"information matrix is singular (cond={cond:.3g})")
    info_inv = np.linalg.inv(info)
    influence = scores @ info_inv
    xinfo_inv = np.linalg.inv(_garch_xspace_info(x_hat, y, v_init))
    return FitResult(
        model=ModelSpec("ccc_garch"),
        theta=theta,
        residuals=residuals,
        influence=influence,
        n_obs=n,
        presample=0,
        init_values=v_init,
        loglik=loglik,
        info_inv=info_inv,
        x_hat=x_hat.copy(),
        xinfo_inv=xinfo_inv,
    )


def _garch_residuals(theta, data, v_init=None) -> np.ndarray:
    y = as_points(data)
    th = np.asarray(theta, dtype=float)
    v = garch_variance_path(th, y, v_init)
    if not np.all(v > 0) or abs(th[6]) >= 1:
        raise FitError("invalid parameters for residual extraction")
    return y / np.sqrt(v)


def _simulate_garch(theta, innovations, v_init=None, allow_explosive=False):
    """Y_t = D_t^{1/2} eps_t: the supplied innovations carry the (constant)
    cross-component correlation; the recursion only scales them."""
    e = np.asarray(innovations, dtype=float)
    _garch_check_theta(theta, allow_explosive)
    w1, a1, b1, w2, a2, b2, _rho = (float(v) for v in np.asarray(theta, dtype=float))
    batched = e.ndim == 3
    if not batched:
        e = e[None]
    nb, n_out, d = e.shape
    if d != 2:
        raise DataError("ccc_garch innovations must be bivariate")
    if v_init is None:
        v_init = np.array([w1 / (1.0 - a1 - b1), w2 / (1.0 - a2 - b2)])
    v_init = np.asarray(v_init, dtype=float)
    out = np.empty((nb, n_out, 2))
    v1 = np.full(nb, v_init[0])
    v2 = np.full(nb, v_init[1])
    for t in range(n_out):
        if t > 0:
            v1 = w1 + a1 * out[:, t - 1, 0] ** 2 + b1 * v1
            v2 = w2 + a2 * out[:, t - 1, 1] ** 2 + b2 * v2
        out[:, t, 0] = np.sqrt(v1) * e[:, t, 0]
        out[:, t, 1] = np.sqrt(v2) * e[:, t, 1]
    return out if batched else out[0]


def _simulate_garch_mixed(theta, innovations, v_init=None, allow_explosive=False):
    """Y_t = V_t^{1/2} eta_t with the symmetric PSD root of the full
    conditional covariance (v_t,12 = rho sqrt(v_t,1 v_t,2)).

    This is the generating form of the benchmark conditional-variance
    system in :mod:`tsindep.simlab`, which mixes the innovation components
    through the correlation explicitly.
    """
    e = np.asarray(innovations, dtype=float)
    _garch_check_theta(theta, allow_explosive)
    w1, a1, b1, w2, a2, b2, rho = (float(v) for v in np.asarray(theta, dtype=float))
    batched = e.ndim == 3
    if not batched:
        e = e[None]
    nb, n_out, d = e.shape
    if d != 2:
        raise DataError("ccc_garch innovations must be bivariate")
    if v_init is None:
        v_init = np.array([w1 / (1.0 - a1 - b1), w2 / (1.0 - a2 - b2)])
    v_init = np.asarray(v_init, dtype=float)
    out = np.empty((nb, n_out, 2))
    v1 = np.full(nb, v_init[0])
    v2 = np.full(nb, v_init[1])
    for t in range(n_out):
        if t > 0:
            v1 = w1 + a1 * out[:, t - 1, 0] ** 2 + b1 * v1
            v2 = w2 + a2 * out[:, t - 1, 1] ** 2 + b2 * v2
        v12 = rho * np.sqrt(v1 * v2)
        s11, s22, s12 = _sqrt2x2(v1, v2, v12)
        out[:, t, 0] = s11 * e[:, t, 0] + s12 * e[:, t, 1]
        out[:, t, 1] = s12 * e[:, t, 0] + s22 * e[:, t, 1]
    return out if batched else out[0]


def _garch_variance_batch(omega, alpha, beta, y2: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """Variance recursion on fixed data for a batch of paths.

    ``y2`` is (B, n); coefficients are scalars or (B,) arrays; ``v0`` is (B,).
    """
    nb, n = y2.shape
    v = np.empty((nb, n))
    v[:, 0] = v0
    for t in range(1, n):
        v[:, t] = omega + alpha * y2[:, t - 1] + beta * v[:, t - 1]
    return v


def _garch_total_ll_batch(theta, y: np.ndarray, v_init: np.ndarray) -> np.ndarray:
    """Total loglik per path; ``y`` is (B, n, 2), ``v_init`` is (B, 2)."""
    th = np.asarray(theta, dtype=float)
    y2 = y**2
    v1 = _garch_variance_batch(th[0], th[1], th[2], y2[:, :, 0], v_init[:, 0])
    v2 = _garch_variance_batch(th[3], th[4], th[5], y2[:, :, 1], v_init[:, 1])
    rho = th[6]
    z1 = y[:, :, 0] / np.sqrt(v1)
    z2 = y[:, :, 1] / np.sqrt(v2)
    one_m = 1.0 - rho * rho
    quad = (z1**2 - 2.0 * rho * z1 * z2 + z2**2) / one_m
    terms = -0.5 * (np.log(v1) + np.log(v2) + np.log(one_m) + quad) - _LOG_2PI
    return terms.sum(axis=1)


def _garch_xspace_scores_batch(x_hat: np.ndarray, y: np.ndarray, v_init: np.ndarray) -> np.ndarray:
    """Total log-likelihood gradient per path in the unconstrained coordinates.

    Central differences; the packed space is all of R^7, so no boundary
    handling is needed.
    """
    x = np.asarray(x_hat, dtype=float)
    nb = y.shape[0]
    scores = np.empty((nb, 7))
    for j in range(7):
        h = 1e-5 * max(1.0, abs(float(x[j])))
        up = x.copy()
        up[j] += h
        dn = x.copy()
        dn[j] -= h
        scores[:, j] = (
            _garch_total_ll_batch(_garch_unpack(up), y, v_init)
            - _garch_total_ll_batch(_garch_unpack(dn), y, v_init)
        ) / (2.0 * h)
    return scores


def _garch_xspace_info(x_hat: np.ndarray, data: np.ndarray, v_init) -> np.ndarray:
    """Observed information in the unconstrained coordinates (per obs).

    Minus the Hessian of the average log-likelihood, from central
    differences of the gradient; eigenvalues are floored at 1e-8 of the
    largest so saturated (flat) coordinates stay harmless.
    """
    x = np.asarray(x_hat, dtype=float)
    n = data.shape[0]
    y = data[None]
    v0 = np.asarray(v_init, dtype=float)[None]

    def grad(point):
        return _garch_xspace_scores_batch(point, y, v0)[0]

    columns = np.empty((7, 7))
    for j in range(7):
        h = 1e-3 * max(1.0, abs(float(x[j])))
        up = x.copy()
        up[j] += h
        dn = x.copy()
        dn[j] -= h
        columns[:, j] = (grad(up) - grad(dn)) / (2.0 * h)
    info = -0.5 * (columns + columns.T) / n
    w, u = np.linalg.eigh(info)
    top = float(w.max())
    if top <= 0.0:
        raise SingularityError("log-likelihood curvature is not positive definite")
    w = np.maximum(w, 1e-8 * top)
    return (u * w) @ u.T


def _garch_residuals_batch(theta_b: np.ndarray, y: np.ndarray, v_init: np.ndarray):
    """Residual extraction with per-path parameters.

    Returns ``(eta, valid)`` where invalid paths (nonpositive variances or
    |rho| >= 1, as can happen after a one-step update) are flagged rather
    than raising.
    """
    nb, n, _ = y.shape
    y2 = y**2
    v1 = _garch_variance_batch(theta_b[:, 0], theta_b[:, 1], theta_b[:, 2], y2[:, :, 0], v_init[:, 0])
    v2 = _garch_variance_batch(theta_b[:, 3], theta_b[:, 4], theta_b[:, 5], y2[:, :, 1], v_init[:, 1])
    valid = (np.abs(theta_b[:, 6]) < 1.0) & (v1 > 0).all(axis=1) & (v2 > 0).all(axis=1)
    v1 = np.where(v1 > 0, v1, 1.0)
    v2 = np.where(v2 > 0, v2, 1.0)
    eta = np.empty_like(y)
    eta[:, :, 0] = y[:, :, 0] / np.sqrt(v1)
    eta[:, :, 1] = y[:, :, 1] / np.sqrt(v2)
    valid &= np.isfinite(eta).reshape(nb, -1).all(axis=1)
    return eta, valid


# ---------------------------------------------------------------------------
# Shared model-level operations
# ---------------------------------------------------------------------------


def residuals(fit: FitResult, data) -> np.ndarray:
    """Residuals of ``fit`` applied to (possibly new) data of the same shape.

    VAR residual rows for t <= p are zero-filled, matching the fit; the
    GARCH variance recursion is initialized at the sample variances of the
    data being processed, mirroring the original fit.
    """
    y = as_points(data)
    if fit.model.kind == "var":
        if y.shape[1] != fit.coef.shape[0]:
            raise DataError("data dimension does not match the fitted model")
        return _var_residuals(fit.coef, y, fit.model.p, fit.model.intercept)
    return _garch_residuals(fit.theta, y)


def influence_values(fit: FitResult, data) -> np.ndarray:
    """Per-observation influence values of ``fit`` evaluated on new data.

    Rows average to the one-step estimator update for that data set.
    Presample rows (VAR) are zero-filled as in the fit.
    """
    y = as_points(data)
    if fit.model.kind == "var":
        p, intercept = fit.model.p, fit.model.intercept
        target, design = _var_design(y, p, intercept)
        resid = target - design @ fit.coef.T
        scaled = design @ fit.gamma_inv
        d, q = fit.coef.shape
        infl = (resid[:, :, None] * scaled[:, None, :]).reshape(y.shape[0] - p, d * q)
        out = np.zeros((y.shape[0], d * q))
        out[p:] = infl
        return out
    v_init = y.var(axis=0)
    return _garch_scores(fit.theta, y, v_init) @ fit.info_inv


def simulate(fit_or_spec, innovations, init_state=None, allow_explosive: bool = False):
    """Forward recursion of the model driven by the supplied innovations.

    One output row per innovation row, conditional on ``init_state`` (the
    presample rows for VAR; the initial component variances for GARCH).
    Defaults: zeros for VAR, the stationary variances for GARCH.  Callers
    wanting an approximately stationary draw should pass extra innovations
    and discard a burn-in themselves (the bootstrap and the simulation lab
    discard 500 rows).
    """
    if isinstance(fit_or_spec, FitResult):
        spec, theta = fit_or_spec.model, fit_or_spec.theta
        coef = fit_or_spec.coef
    else:
        spec, theta = fit_or_spec
        theta = np.asarray(theta, dtype=float)
        coef = None
    if spec.kind == "var":
        e = np.asarray(innovations, dtype=float)
        d = e.shape[-1]
        q = d * spec.p + (1 if spec.intercept else 0)
        if coef is None:
            coef = theta.reshape(d, q)
        return _simulate_var(coef, spec.p, spec.intercept, e, init=init_state)
    return _simulate_garch(theta, innovations, v_init=init_state, allow_explosive=allow_explosive)


def paired_residuals(fit1: FitResult, fit2: FitResult) -> PairedResiduals:
    """Align two fits' effective residuals on a common time axis.

    Residual row i of a fit corresponds to observation time ``presample + i``;
    the head of whichever series starts earlier is trimmed so both start at
    ``max(presample_1, presample_2)``.
    """
    start = max(fit1.presample, fit2.presample)
    e1 = fit1.effective_residuals[start - fit1.presample :]
    e2 = fit2.effective_residuals[start - fit2.presample :]
    if e1.shape[0] != e2.shape[0]:
        raise DataError(
            f"residual series do not align: {e1.shape[0]} vs {e2.shape[0]} rows"
        )
    return PairedResiduals(eta1=e1, eta2=e2)
