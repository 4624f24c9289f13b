"""ADF and KPSS tests and the integration-order search built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from patentdyn.econ.critical import LEVELS, critical_values
from patentdyn.econ.ols import gaussian_loglik, information_criteria, ols
from patentdyn.exceptions import (
    DegenerateSeries,
    NoIntegrationOrder,
    RankDeficient,
    TooShort,
)

__all__ = [
    "UnitRootResult",
    "IntegrationOrder",
    "adf_test",
    "kpss_test",
    "integration_order",
    "schwert_max_lag",
    "newey_west_bandwidth",
]

Deterministic = Literal["n", "c", "ct"]


@dataclass(frozen=True)
class UnitRootResult:
    """Outcome of a unit-root or stationarity test.

    ``reject`` maps each significance level to whether the null is rejected.
    For ADF (and Engle-Granger) the null is a unit root; for KPSS the null is
    stationarity, so the polarity of ``reject`` is reversed between them.
    """

    test: str
    statistic: float
    lags_used: int
    deterministic: str
    critical_values: dict[float, float]
    reject: dict[float, bool]
    nobs: int
    lag_criterion: str | None = None
    max_lag: int | None = None
    degenerate: bool = False

    @property
    def stationary(self) -> dict[float, bool]:
        """Whether the test points to stationarity at each level."""
        if self.test == "kpss":
            return {a: not r for a, r in self.reject.items()}
        return dict(self.reject)

    def to_dict(self) -> dict:
        stat = self.statistic if np.isfinite(self.statistic) else None
        return {
            "test": self.test,
            "statistic": stat,
            "lags_used": self.lags_used,
            "deterministic": self.deterministic,
            "critical_values": {str(k): v for k, v in self.critical_values.items()},
            "reject": {str(k): v for k, v in self.reject.items()},
            "nobs": self.nobs,
            "lag_criterion": self.lag_criterion,
            "max_lag": self.max_lag,
            "degenerate": self.degenerate,
        }


def schwert_max_lag(nobs: int) -> int:
    """``floor(12 * (n / 100) ** 0.25)``."""
    return int(np.floor(12.0 * (nobs / 100.0) ** 0.25))


def _deterministic_columns(det: str, nrows: int) -> list[np.ndarray]:
    if det == "n":
        return []
    if det == "c":
        return [np.ones(nrows)]
    if det == "ct":
        return [np.ones(nrows), np.arange(1, nrows + 1, dtype=float)]
    raise ValueError(f"deterministic must be 'n', 'c' or 'ct', got {det!r}")


def _adf_design(y: np.ndarray, lag: int, start: int, det: str):
    """Regressand and design for the ADF regression on the sample ``i >= start``.

    Row ``i`` explains ``dy[i] = y[i+1] - y[i]`` with ``y[i]``, ``dy[i-1..i-lag]``
    and deterministic terms. The level term is always column 0.
    """
    dy = np.diff(y)
    rows = np.arange(start, dy.shape[0])
    cols = [y[rows]]
    cols += [dy[rows - j] for j in range(1, lag + 1)]
    cols += _deterministic_columns(det, rows.shape[0])
    return dy[rows], np.column_stack(cols)


def _default_max_lag(n: int, det: str) -> int:
    kdet = {"n": 0, "c": 1, "ct": 2}[det]
    lag = schwert_max_lag(n)
    # keep n >= lag + 10 and leave a handful of residual degrees of freedom
    while lag > 0 and (n < lag + 10 or (n - 1 - lag) - (lag + 1 + kdet) < 5):
        lag -= 1
    return lag


def _adf_core(y, det: str, max_lag: int | None, lag_criterion: str):
    """Shared ADF machinery. Returns ``(tstat, lag, nobs, max_lag)``."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 10:
        raise TooShort(f"ADF needs at least 10 observations, got {n}")
    if max_lag is None:
        max_lag = _default_max_lag(n, det)
    elif n < max_lag + 10:
        raise TooShort(f"ADF with max_lag={max_lag} needs at least {max_lag + 10} observations, got {n}")
    if np.ptp(y) == 0:
        raise DegenerateSeries("series is constant")

    crit = lag_criterion.lower()
    if crit == "fixed":
        lag = max_lag
    elif crit in ("aic", "bic", "hqic"):
        which = {"aic": 0, "bic": 1, "hqic": 2}[crit]
        best = None
        for p in range(max_lag + 1):
            yy, X = _adf_design(y, p, max_lag, det)
            try:
                fit = ols(yy, X)
            except RankDeficient:
                continue
            if fit.ssr <= 0:
                continue
            ic = information_criteria(fit.loglik, X.shape[1], fit.nobs)[which]
            if best is None or ic < best[0]:
                best = (ic, p)
        if best is None:
            raise DegenerateSeries("no lag order gives a well-posed ADF regression")
        lag = best[1]
    else:
        raise ValueError(f"unknown lag criterion {lag_criterion!r}")

    yy, X = _adf_design(y, lag, lag, det)
    try:
        fit = ols(yy, X)
    except RankDeficient as exc:
        raise DegenerateSeries(f"ADF regression is collinear: {exc}") from exc
    scale = max(float(yy @ yy), float(np.sum(y * y)), 1e-300)
    if fit.ssr <= 1e-24 * scale:
        raise DegenerateSeries("ADF regression fits exactly; statistic undefined")
    return float(fit.tvalues[0]), lag, fit.nobs, max_lag


def adf_test(
    y,
    deterministic: Deterministic = "c",
    max_lag: int | None = None,
    lag_criterion: str = "aic",
) -> UnitRootResult:
    """Augmented Dickey-Fuller test of a unit root.

    Regresses ``dy_t`` on ``y_{t-1}``, ``dy_{t-1}..dy_{t-p}`` and the
    deterministic terms. ``p`` is picked over ``0..max_lag`` by the criterion
    on a common estimation sample, then the regression is refitted on all
    available observations for that ``p``.

    Parameters
    ----------
    y : array_like
    deterministic : {"n", "c", "ct"}
    max_lag : int, optional
        Defaults to the Schwert rule, reduced when the series is short.
    lag_criterion : {"aic", "hqic", "bic", "fixed"}

    Raises
    ------
    TooShort
        If ``len(y) < max_lag + 10``.
    DegenerateSeries
        If the series is constant or the regression is an exact fit.
    """
    stat, lag, nobs, max_lag = _adf_core(y, deterministic, max_lag, lag_criterion)
    cvs = critical_values("adf", deterministic, 1, nobs)
    cv = dict(zip(LEVELS, cvs))
    return UnitRootResult(
        test="adf",
        statistic=stat,
        lags_used=lag,
        deterministic=deterministic,
        critical_values=cv,
        reject={a: stat < c for a, c in cv.items()},
        nobs=nobs,
        lag_criterion=lag_criterion.lower(),
        max_lag=max_lag,
    )


def _autocov(e: np.ndarray, j: int) -> float:
    n = e.shape[0]
    return float(e[j:] @ e[: n - j]) / n


def newey_west_bandwidth(resid) -> int:
    """Automatic Bartlett bandwidth of Newey and West (1994).

    Uses ``floor(n ** (2/9))`` autocovariances for the plug-in estimate, the
    choice made for the KPSS test by Hobijn, Franses and Ooms.
    """
    e = np.asarray(resid, dtype=float)
    n = e.shape[0]
    pre = int(np.floor(n ** (2.0 / 9.0)))
    gam = [_autocov(e, j) for j in range(pre + 1)]
    s0 = gam[0] + 2.0 * sum(gam[1:])
    s1 = 2.0 * sum(j * gam[j] for j in range(1, pre + 1))
    if s0 <= 0:
        return 0
    gamma_hat = 1.1447 * ((s1 / s0) ** 2) ** (1.0 / 3.0)
    return int(min(n - 1, np.floor(gamma_hat * n ** (1.0 / 3.0))))


def _bartlett_lrv(e: np.ndarray, lags: int) -> float:
    s2 = _autocov(e, 0)
    for j in range(1, lags + 1):
        s2 += 2.0 * (1.0 - j / (lags + 1.0)) * _autocov(e, j)
    return s2


def kpss_test(y, deterministic: Deterministic = "c", bandwidth: str | int = "auto") -> UnitRootResult:
    """KPSS test of (level or trend) stationarity.

    Parameters
    ----------
    y : array_like
    deterministic : {"c", "ct"}
    bandwidth : "auto", "short" or int
        ``"auto"`` is the Newey-West automatic Bartlett bandwidth,
        ``"short"`` is ``floor(4 (n/100)^(1/4))`` and an integer fixes the lag.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 10:
        raise TooShort(f"KPSS needs at least 10 observations, got {n}")
    if deterministic not in ("c", "ct"):
        raise ValueError("KPSS deterministic must be 'c' or 'ct'")
    X = np.column_stack(_deterministic_columns(deterministic, n))
    e = ols(y, X).resid

    if bandwidth == "auto":
        lags = newey_west_bandwidth(e)
    elif bandwidth == "short":
        lags = int(np.floor(4.0 * (n / 100.0) ** 0.25))
    else:
        lags = int(bandwidth)
        if lags < 0 or lags >= n:
            raise ValueError(f"bandwidth must be in [0, {n - 1}], got {lags}")

    s2 = _bartlett_lrv(e, lags)
    # residuals of a constant (or exactly trending) series are pure rounding noise
    if not s2 > 1e-24 * max(float(np.mean(y * y)), 1e-300):
        raise DegenerateSeries("long-run variance estimate is zero")
    S = np.cumsum(e)
    stat = float(S @ S) / (n * n * s2)
    cv = dict(zip(LEVELS, critical_values("kpss", deterministic)))
    return UnitRootResult(
        test="kpss",
        statistic=stat,
        lags_used=lags,
        deterministic=deterministic,
        critical_values=cv,
        reject={a: stat > c for a, c in cv.items()},
        nobs=n,
        lag_criterion=str(bandwidth),
    )


@dataclass(frozen=True)
class IntegrationOrder:
    """Selected order of integration with the tests that support it.

    ``conflict`` is set when ADF and KPSS disagree at the chosen order; the
    ADF verdict decides in that case.
    """

    d: int
    conflict: bool
    adf: list[UnitRootResult] = field(default_factory=list)
    kpss: list[UnitRootResult | None] = field(default_factory=list)


def integration_order(
    y,
    max_d: int = 2,
    deterministic: Deterministic = "c",
    level: float = 0.05,
    lag_criterion: str = "aic",
    bandwidth: str | int = "auto",
    max_lag: int | None = None,
) -> IntegrationOrder:
    """Smallest ``d <= max_d`` for which the ``d``-times differenced series is stationary.

    Stationary means ADF rejects a unit root and KPSS does not reject
    stationarity at ``level``. When the two disagree the ADF verdict is used
    and ``conflict`` is raised.

    Raises
    ------
    NoIntegrationOrder
        If ADF never rejects for ``d = 0..max_d``.
    """
    w = np.asarray(y, dtype=float)
    adfs: list[UnitRootResult] = []
    kpsss: list[UnitRootResult | None] = []
    kpss_det = deterministic if deterministic in ("c", "ct") else "c"
    for d in range(max_d + 1):
        if d:
            w = np.diff(w)
        a = adf_test(w, deterministic, max_lag=max_lag, lag_criterion=lag_criterion)
        try:
            k = kpss_test(w, kpss_det, bandwidth)
        except DegenerateSeries:
            k = None
        adfs.append(a)
        kpsss.append(k)
        adf_stat = a.reject[level]
        if adf_stat:
            kpss_stat = True if k is None else not k.reject[level]
            return IntegrationOrder(d, adf_stat != kpss_stat, adfs, kpsss)
    raise NoIntegrationOrder(f"no unit-root rejection at level {level} for d <= {max_d}")
