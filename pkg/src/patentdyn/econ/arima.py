"""ARIMA(p, d, q) estimation by conditional sum of squares and IC-based order selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from patentdyn.econ.ols import information_criteria
from patentdyn.econ.unitroot import integration_order
from patentdyn.exceptions import AllCellsFailed, ConvergenceError, PatentDynError, TooShort

__all__ = ["ArimaFit", "ArimaSelection", "fit_arima", "select_arima", "is_stationary", "css_residuals"]

NEAR_BOUNDARY = 0.98
MAX_RESTARTS = 6


@dataclass(frozen=True)
class ArimaFit:
    """CSS estimate of an ARIMA model.

    The model for the ``d``-times differenced series ``w`` is
    ``w_t - mu = sum_i ar[i] (w_{t-i} - mu) + sum_j ma[j] e_{t-j} + e_t``.

    ``nparams`` counts the AR and MA coefficients, the mean (when estimated)
    and the innovation variance; the information criteria use it together
    with ``nobs``, the number of residuals entering the likelihood.
    """

    order: tuple[int, int, int]
    ar: np.ndarray
    ma: np.ndarray
    mean: float
    sigma2: float
    loglik: float
    nobs: int
    nparams: int
    aic: float
    bic: float
    hqc: float
    converged: bool
    near_boundary: bool
    iterations: int = 0
    trace: tuple[float, ...] = field(default=(), repr=False)

    def criterion(self, name: str) -> float:
        return {"aic": self.aic, "bic": self.bic, "hqc": self.hqc, "hqic": self.hqc}[name.lower()]

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "ar": self.ar.tolist(),
            "ma": self.ma.tolist(),
            "mean": self.mean,
            "sigma2": self.sigma2,
            "loglik": self.loglik,
            "nobs": self.nobs,
            "nparams": self.nparams,
            "aic": self.aic,
            "bic": self.bic,
            "hqc": self.hqc,
            "converged": self.converged,
            "near_boundary": self.near_boundary,
        }


def _max_inverse_root(coefs: np.ndarray) -> float:
    """Largest modulus among the inverse roots of ``1 - c_1 z - ... - c_p z^p``."""
    if coefs.size == 0 or not np.any(coefs):
        return 0.0
    # inverse roots solve x^p - c_1 x^{p-1} - ... - c_p = 0
    return float(np.max(np.abs(np.roots(np.r_[1.0, -coefs]))))


def is_stationary(coefs) -> bool:
    """Schur-Cohn test via the step-down (reverse Levinson) recursion.

    For AR coefficients ``phi`` returns True when every root of
    ``1 - phi_1 z - ... - phi_p z^p`` lies outside the unit circle. Applied to
    ``-theta`` it checks invertibility of an MA polynomial ``1 + theta_1 z + ...``.
    """
    a = [float(c) for c in coefs]
    while a:
        k = a[-1]
        if abs(k) >= 1.0:
            return False
        p = len(a)
        denom = 1.0 - k * k
        a = [(a[i] + k * a[p - 2 - i]) / denom for i in range(p - 1)]
    return True


def css_residuals(w: np.ndarray, ar: np.ndarray, ma: np.ndarray, mean: float) -> np.ndarray:
    """Residuals ``e_t`` for ``t >= p`` with pre-sample innovations set to zero."""
    p = ar.shape[0]
    z = w - mean
    # e_t + sum_j ma_j e_{t-j} = z_t - sum_i ar_i z_{t-i}
    u = z[p:].copy()
    for i in range(p):
        u -= ar[i] * z[p - 1 - i : z.shape[0] - 1 - i]
    if ma.shape[0] == 0:
        return u
    return lfilter([1.0], np.r_[1.0, ma], u)


def fit_arima(
    y,
    p: int,
    d: int,
    q: int,
    include_mean: bool = True,
    condition_on: int | None = None,
    maxiter: int | None = None,
) -> ArimaFit:
    """Fit ARIMA(p, d, q) by conditional sum of squares.

    The series is differenced ``d`` times and the AR/MA coefficients are found
    by Nelder-Mead from zero starting values (the mean starts at the sample
    mean). Parameter draws outside the stationarity or invertibility region are
    rejected by an infinite objective. ARIMA(0, d, 0) has the closed form
    mean / variance of the differenced series.

    Parameters
    ----------
    condition_on : int, optional
        Number of leading observations of the differenced series excluded from
        the likelihood. Defaults to ``p``. ``select_arima`` sets it to the
        largest AR order so all candidate models share one estimation sample.

    Raises
    ------
    TooShort
        If ``len(y) <= p + q + d + 5``.
    ConvergenceError
        If the optimizer hits its iteration cap; ``exc.best`` holds the best
        fit found.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[0] <= p + q + d + 5:
        raise TooShort(f"ARIMA({p},{d},{q}) needs more than {p + q + d + 5} observations, got {y.shape[0]}")
    w = np.diff(y, n=d) if d else y
    cond = p if condition_on is None else int(condition_on)
    if cond < p:
        raise ValueError("condition_on must be at least p")
    drop = cond - p
    neff = w.shape[0] - cond
    if neff <= p + q + int(include_mean) + 1:
        raise TooShort("too few observations left after conditioning")

    mean0 = float(w[cond:].mean()) if include_mean else 0.0

    def unpack(theta):
        ar = theta[:p]
        ma = theta[p : p + q]
        mu = theta[p + q] if include_mean else 0.0
        return ar, ma, mu

    def ssr(theta):
        ar, ma, mu = unpack(theta)
        if p and not is_stationary(ar):
            return np.inf
        if q and not is_stationary(-ma):
            return np.inf
        e = css_residuals(w, ar, ma, mu)[drop:]
        return float(e @ e)

    x0 = np.zeros(p + q + int(include_mean))
    if include_mean:
        x0[-1] = mean0
    trace: list[float] = [ssr(x0)]
    nit = 0
    converged = True
    if p + q > 0:
        k = x0.shape[0]
        budget = maxiter or 1000 * k
        theta = x0
        step = 0.1
        # Nelder-Mead stalls on the flat ridges ARMA likelihoods often have;
        # restart from the incumbent with a fresh simplex until it stops moving
        for _ in range(MAX_RESTARTS):
            simplex = np.tile(theta, (k + 1, 1))
            for i in range(k):
                # the mean lives on the data scale
                simplex[i + 1, i] += step if i < p + q else step * (np.std(w) + 1e-12)
            before = trace[-1]
            res = minimize(
                ssr,
                theta,
                method="Nelder-Mead",
                callback=lambda xk: trace.append(ssr(xk)),
                options={
                    "initial_simplex": simplex,
                    "maxiter": max(budget - nit, 1),
                    "xatol": 1e-8,
                    "fatol": 1e-12 * max(before, 1e-12),
                },
            )
            nit += int(res.nit)
            if res.fun <= trace[-1]:
                theta = res.x
                trace.append(float(res.fun))
            if not res.success:
                converged = False
                break
            if before - res.fun <= 1e-10 * max(before, 1e-12):
                break
            step = 0.05
    else:
        theta = x0

    ar, ma, mu = unpack(theta)
    s = ssr(theta)
    sigma2 = s / neff
    loglik = -0.5 * neff * (np.log(2 * np.pi * sigma2) + 1.0) if sigma2 > 0 else np.inf
    k = p + q + int(include_mean) + 1
    aic, bic, hqc = information_criteria(loglik, k, neff)
    near = max(_max_inverse_root(ar), _max_inverse_root(-ma)) > NEAR_BOUNDARY
    fit = ArimaFit(
        order=(p, d, q),
        ar=np.asarray(ar, dtype=float).copy(),
        ma=np.asarray(ma, dtype=float).copy(),
        mean=float(mu),
        sigma2=float(sigma2),
        loglik=float(loglik),
        nobs=int(neff),
        nparams=k,
        aic=float(aic),
        bic=float(bic),
        hqc=float(hqc),
        converged=converged,
        near_boundary=bool(near),
        iterations=nit,
        trace=tuple(trace),
    )
    if not converged:
        raise ConvergenceError(f"ARIMA({p},{d},{q}) did not converge in {nit} iterations", best=fit)
    return fit


@dataclass(frozen=True)
class ArimaSelection:
    """Best model plus the full grid of fits (or error messages for failed cells)."""

    best: ArimaFit
    criterion: str
    d: int
    table: dict[tuple[int, int], ArimaFit | str]

    def ic_table(self) -> dict[tuple[int, int], float]:
        return {pq: f.criterion(self.criterion) for pq, f in self.table.items() if isinstance(f, ArimaFit)}


def select_arima(
    y,
    p_max: int = 2,
    q_max: int = 2,
    d: int | None = None,
    criterion: str = "bic",
    include_mean: bool = True,
) -> ArimaSelection:
    """Fit every ARIMA(p, d, q) with ``p <= p_max``, ``q <= q_max`` and keep the IC minimiser.

    All cells condition on the first ``p_max`` differenced observations so the
    criteria are computed on a common sample. Ties are broken by smaller
    ``(p, q)``. ``d`` defaults to the order found by ``integration_order``.
    """
    if p_max > 5 or q_max > 5 or p_max < 0 or q_max < 0:
        raise ValueError("p_max and q_max must lie in 0..5")
    if d is None:
        d = integration_order(y).d
    table: dict[tuple[int, int], ArimaFit | str] = {}
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            try:
                table[(p, q)] = fit_arima(y, p, d, q, include_mean=include_mean, condition_on=p_max)
            except PatentDynError as exc:
                table[(p, q)] = f"{type(exc).__name__}: {exc}"
    fits = [(f.criterion(criterion), pq[0], pq[1], f) for pq, f in table.items() if isinstance(f, ArimaFit)]
    if not fits:
        raise AllCellsFailed("every ARIMA cell failed: " + "; ".join(str(v) for v in table.values()))
    best = min(fits, key=lambda t: t[:3])[3]
    return ArimaSelection(best=best, criterion=criterion.lower(), d=d, table=table)
