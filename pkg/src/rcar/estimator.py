"""OLS for RCAR(p) series and the two significance statistics.

The OLS fit is the usual autoregressive one, whether the coefficients are
random or not.  Two standard errors are reported per coefficient: ``v1``
allows for random coefficients (heteroskedasticity-robust sandwich) and
``v2`` assumes fixed coefficients (homoskedastic form).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .exceptions import DegenerateDataError
from .simulate import Trajectory

GRAM_COND_MAX = 1e12


def _as_series(x):
    if isinstance(x, Trajectory):
        return np.asarray(x.values, dtype=float)
    x = column_or_1d(np.asarray(x, dtype=float), warn=False)
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains NaN or infinite values")
    return x


def lag_matrix(x, p):
    """Regressors ``Phi_{t-1}`` (rows) and targets ``X_t`` for t = 1..n.

    ``x`` holds ``X_{-p+1}, ..., X_n`` so that ``n = len(x) - p``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size - p
    if n < 1:
        raise DegenerateDataError(f"need more than p={p} values, got {x.size}")
    phi = np.column_stack([x[p - 1 - k : p - 1 - k + n] for k in range(p)])
    return phi, x[p:]


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: np.ndarray
    S: np.ndarray
    n: int
    sigma2_hat: float
    tau2_hat: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray

    def to_dict(self):
        return {
            "theta_hat": self.theta_hat.tolist(),
            "sigma2_hat": self.sigma2_hat,
            "tau2_hat": self.tau2_hat.tolist(),
            "v1": self.v1.tolist(),
            "v2": self.v2.tolist(),
            "z1": self.z1.tolist(),
            "z2": self.z2.tolist(),
        }


def ols(traj, p):
    """Least-squares ``theta_hat`` and the Gram matrix ``S_{n-1}``.

    Solved through a QR factorisation of the lag matrix; ``S`` is returned
    for reporting only.
    """
    phi, y = lag_matrix(_as_series(traj), p)
    if phi.shape[0] <= p:
        raise DegenerateDataError(f"need n > p observations, got n={phi.shape[0]}")
    q, r = np.linalg.qr(phi)
    diag = np.abs(np.diag(r))
    if diag.min() == 0 or (diag.max() / diag.min()) ** 2 > GRAM_COND_MAX:
        raise DegenerateDataError("lag Gram matrix is singular; use a longer or less degenerate series")
    theta_hat = solve_triangular(r, q.T @ y)
    return theta_hat, phi.T @ phi


def variance_estimates(traj, theta_hat, S):
    """Residual variance, coefficient-noise variances and both standard errors.

    Returns ``(sigma2_hat, tau2_hat, v1, v2)``.  ``v1`` is the square root of
    the diagonal of ``n S^{-1} (sum Phi Phi^T e^2) S^{-1}``, ``v2`` that of
    ``sigma2_hat n S^{-1}``.  ``tau2_hat`` comes from regressing squared
    residuals on squared lags and a constant, floored at zero.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    p = theta_hat.size
    phi, y = lag_matrix(_as_series(traj), p)
    n = y.size
    if n < p + 2:
        raise DegenerateDataError(f"need at least p + 2 = {p + 2} observations, got {n}")
    resid = y - phi @ theta_hat
    e2 = resid * resid
    sigma2_hat = float(e2.mean())
    s_inv = np.linalg.inv(S)
    meat = (phi * e2[:, None]).T @ phi
    cov1 = n * s_inv @ meat @ s_inv
    v1 = np.sqrt(np.clip(np.diag(cov1), 0.0, None))
    v2 = np.sqrt(np.clip(sigma2_hat * n * np.diag(s_inv), 0.0, None))

    design = np.column_stack([phi * phi, np.ones(n)])
    coef, *_ = np.linalg.lstsq(design, e2, rcond=None)
    tau2_hat = np.clip(coef[:p], 0.0, None)
    return sigma2_hat, tau2_hat, v1, v2


def z_statistics(result, n=None, center=None):
    """``sqrt(n) (theta_hat - center) / v`` for both standard errors."""
    n = result.n if n is None else n
    num = np.asarray(result.theta_hat, dtype=float)
    if center is not None:
        num = num - np.asarray(center, dtype=float)
    v1 = np.asarray(result.v1)
    v2 = np.asarray(result.v2)
    if np.any(v1 <= 0) or np.any(v2 <= 0):
        raise DegenerateDataError("zero standard error; the series carries no noise")
    root = np.sqrt(n)
    return root * num / v1, root * num / v2


def estimate(traj, p, center=None) -> EstimationResult:
    """Full pipeline: OLS, variance estimates and z statistics."""
    x = _as_series(traj)
    theta_hat, s = ols(x, p)
    sigma2_hat, tau2_hat, v1, v2 = variance_estimates(x, theta_hat, s)
    n = x.size - p
    partial = EstimationResult(theta_hat, s, n, sigma2_hat, tau2_hat, v1, v2, np.zeros(p), np.zeros(p))
    z1, z2 = z_statistics(partial, n, center=center)
    return EstimationResult(theta_hat, s, n, sigma2_hat, tau2_hat, v1, v2, z1, z2)


class LagFeatures(TransformerMixin, BaseEstimator):
    """Turn a series into its matrix of ``order`` lagged regressors."""

    def __init__(self, order=1):
        self.order = order

    def fit(self, X, y=None):
        _as_series(X)
        self.n_features_out_ = self.order
        return self

    def transform(self, X):
        phi, _ = lag_matrix(_as_series(X), self.order)
        return phi


class RCAROLS(BaseEstimator):
    """OLS estimator of the mean coefficients of an RCAR(p) series.

    Parameters
    ----------
    order : int, default=1
        Autoregressive order ``p``.

    Attributes
    ----------
    coef_ : ndarray of shape (order,)
        OLS estimate ``theta_hat``.
    gram_ : ndarray of shape (order, order)
        ``sum Phi_{t-1} Phi_{t-1}^T``.
    sigma2_ : float
    tau2_ : ndarray of shape (order,)
    se_random_, se_fixed_ : ndarray of shape (order,)
        Standard errors of ``sqrt(n) theta_hat`` under random and fixed
        coefficients.
    z_random_, z_fixed_ : ndarray of shape (order,)
        Significance statistics of each coefficient.
    n_obs_ : int
    """

    def __init__(self, order=1):
        self.order = order

    def fit(self, X, y=None):
        if not isinstance(self.order, (int, np.integer)) or self.order < 1:
            raise ValueError(f"order must be a positive integer, got {self.order!r}")
        res = estimate(_as_series(X), int(self.order))
        self.result_ = res
        self.coef_ = res.theta_hat
        self.gram_ = res.S
        self.sigma2_ = res.sigma2_hat
        self.tau2_ = res.tau2_hat
        self.se_random_ = res.v1
        self.se_fixed_ = res.v2
        self.z_random_ = res.z1
        self.z_fixed_ = res.z2
        self.n_obs_ = res.n
        return self

    def predict(self, X):
        """One-step-ahead predictions ``coef_ . Phi_{t-1}`` for t = 1..n."""
        check_is_fitted(self, "coef_")
        phi, _ = lag_matrix(_as_series(X), len(self.coef_))
        return phi @ self.coef_

    def residuals(self, X):
        check_is_fitted(self, "coef_")
        phi, y = lag_matrix(_as_series(X), len(self.coef_))
        return y - phi @ self.coef_
