"""Least squares and information criteria used by every test regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from patentdyn.exceptions import RankDeficient, TooShort

__all__ = ["OlsFit", "ols", "information_criteria", "gaussian_loglik"]


@dataclass(frozen=True)
class OlsFit:
    """Result of an ordinary least squares fit.

    Attributes
    ----------
    params : ndarray
        Estimated coefficients, one per column of the design matrix.
    resid : ndarray
        Residuals ``y - X @ params``.
    ssr : float
        Sum of squared residuals.
    sigma2 : float
        Degrees-of-freedom corrected residual variance ``ssr / (n - k)``.
    nobs : int
    k : int
    bse : ndarray
        Conventional (homoskedastic) standard errors.
    """

    params: np.ndarray
    resid: np.ndarray
    ssr: float
    sigma2: float
    nobs: int
    k: int
    bse: np.ndarray

    @property
    def tvalues(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params / self.bse

    @property
    def loglik(self) -> float:
        return gaussian_loglik(self.ssr, self.nobs)


def gaussian_loglik(ssr: float, nobs: int) -> float:
    """Concentrated Gaussian log-likelihood for a regression with ``ssr``."""
    if ssr <= 0:
        return np.inf
    return -0.5 * nobs * (np.log(2 * np.pi) + np.log(ssr / nobs) + 1.0)


def ols(y, X, rcond: float = 1e-10) -> OlsFit:
    """Fit ``y = X b + e`` by Householder QR.

    Parameters
    ----------
    y : array_like, shape (n,)
    X : array_like, shape (n, k)
    rcond : float
        Columns are declared collinear when ``|R_jj| < rcond * max|R_ii|``.

    Raises
    ------
    RankDeficient
        If ``X`` does not have full column rank.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"y has shape {y.shape}, expected ({n},)")
    if n <= k:
        raise RankDeficient(f"need more observations than regressors (n={n}, k={k})")

    # scale columns so the rank test is not fooled by units
    scale = np.sqrt((X * X).sum(axis=0))
    if np.any(scale == 0):
        raise RankDeficient("design matrix has an all-zero column")
    Q, R = np.linalg.qr(X / scale, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() < rcond * diag.max():
        raise RankDeficient("design matrix is not of full column rank")

    qty = Q.T @ y
    beta = np.linalg.solve(R, qty)
    resid = y - (X / scale) @ beta
    # one step of iterative refinement keeps X'e at rounding level
    beta += np.linalg.solve(R, Q.T @ resid)
    resid = y - (X / scale) @ beta
    params = beta / scale

    ssr = float(resid @ resid)
    sigma2 = ssr / (n - k)
    Rinv = np.linalg.solve(R, np.eye(k))
    cov_diag = (Rinv * Rinv).sum(axis=1) * sigma2
    bse = np.sqrt(cov_diag) / scale
    return OlsFit(params, resid, ssr, sigma2, n, k, bse)


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float, float]:
    """Return ``(aic, bic, hqc)`` for a model with ``k`` free parameters."""
    if n <= 1:
        raise TooShort(f"information criteria need n > 1, got {n}")
    base = -2.0 * loglik
    aic = base + 2.0 * k
    bic = base + k * np.log(n)
    hqc = base + 2.0 * k * np.log(np.log(n))
    return aic, bic, hqc
