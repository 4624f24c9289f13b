"""Engle-Granger two-step cointegration test with zero-observation dummies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from patentdyn.econ.critical import LEVELS, critical_values
from patentdyn.econ.ols import OlsFit, ols
from patentdyn.econ.unitroot import UnitRootResult, _adf_core
from patentdyn.exceptions import YearMismatch

__all__ = ["CointResult", "engle_granger", "zero_dummies"]


@dataclass(frozen=True)
class CointResult:
    """Cointegrating regression ``Y_t = a + B X_t + dummies + e_t`` and the residual ADF.

    ``ols.params`` is ordered ``[a, B, dummy_1, ...]``. ``dummy_sources``
    names the series each dummy column was built from.
    """

    left: object
    right: object
    ols: OlsFit
    residual_adf: UnitRootResult
    lag_criterion: str
    dummy_sources: list[str]
    i1_pretested: bool = False

    @property
    def statistic(self) -> float:
        return self.residual_adf.statistic

    @property
    def reject(self) -> dict[float, bool]:
        """``True`` where the null of no cointegration is rejected."""
        return self.residual_adf.reject

    @property
    def degenerate(self) -> bool:
        return self.residual_adf.degenerate

    def to_dict(self) -> dict:
        return {
            "left": _key_repr(self.left),
            "right": _key_repr(self.right),
            "intercept": float(self.ols.params[0]),
            "slope": float(self.ols.params[1]),
            "dummy_coefficients": [float(c) for c in self.ols.params[2:]],
            "dummy_sources": list(self.dummy_sources),
            "ssr": self.ols.ssr,
            "nobs": self.ols.nobs,
            "lag_criterion": self.lag_criterion,
            "i1_pretested": self.i1_pretested,
            "residual_adf": self.residual_adf.to_dict(),
        }


def _key_repr(key):
    if key is None:
        return None
    if hasattr(key, "to_dict"):
        return key.to_dict()
    return str(key)


def zero_dummies(*masks, names=None) -> tuple[np.ndarray, list[str]]:
    """Build the nil-data dummies: 1 where a series is strictly positive, 0 where it is nil.

    One column per series that has at least one zero. Columns that duplicate
    an earlier one (two series nil in exactly the same years) are dropped.
    """
    names = list(names) if names is not None else [f"series{i}" for i in range(len(masks))]
    cols: list[np.ndarray] = []
    sources: list[str] = []
    for name, mask in zip(names, masks):
        if mask is None:
            continue
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            continue
        col = (~mask).astype(float)
        if any(np.array_equal(col, c) for c in cols):
            continue
        cols.append(col)
        sources.append(name)
    if not cols:
        return np.empty((len(masks[0]) if masks and masks[0] is not None else 0, 0)), []
    return np.column_stack(cols), sources


def _unpack(series):
    """Accept an AnnualSeries or a plain vector."""
    if hasattr(series, "values") and hasattr(series, "years"):
        return np.asarray(series.values, float), np.asarray(series.years), np.asarray(series.zero_mask, bool), series.key
    arr = np.asarray(series, dtype=float)
    return arr, None, None, None


def engle_granger(
    y,
    x,
    lag_criterion: str = "aic",
    max_lag: int | None = None,
    y_zero_mask=None,
    x_zero_mask=None,
    i1_pretested: bool = False,
) -> CointResult:
    """Two-step Engle-Granger test of the null of no cointegration.

    Step 1 regresses ``y`` on a constant, ``x`` and one nil-data dummy per
    series containing zeros. Step 2 runs an ADF regression without
    deterministic terms on the residuals, picking the lag by AIC or HQIC, and
    compares the statistic with residual-based critical values for two
    variables and a constant in the static regression.

    Parameters
    ----------
    y, x : AnnualSeries or array_like
        When AnnualSeries are given their years must match and their
        ``zero_mask`` defines the dummies.
    y_zero_mask, x_zero_mask : array_like of bool, optional
        Zero masks for plain-array inputs.
    i1_pretested : bool
        Recorded on the result; the caller is responsible for pretesting.

    Raises
    ------
    YearMismatch
        If the two series cover different years or lengths.
    RankDeficient
        If ``x`` is constant (or collinear with the dummies).
    """
    yv, yyears, ymask, ykey = _unpack(y)
    xv, xyears, xmask, xkey = _unpack(x)
    if yv.shape != xv.shape:
        raise YearMismatch(f"series lengths differ: {yv.shape[0]} vs {xv.shape[0]}")
    if yyears is not None and xyears is not None and not np.array_equal(yyears, xyears):
        raise YearMismatch("series cover different years")
    ymask = ymask if y_zero_mask is None else np.asarray(y_zero_mask, bool)
    xmask = xmask if x_zero_mask is None else np.asarray(x_zero_mask, bool)

    n = yv.shape[0]
    D, sources = zero_dummies(ymask, xmask, names=["left", "right"])
    X = np.column_stack([np.ones(n), xv, D]) if D.shape[1] else np.column_stack([np.ones(n), xv])
    fit = ols(yv, X)

    crit = lag_criterion.lower()
    scale = max(float(np.sum((yv - yv.mean()) ** 2)), 1e-300)
    if fit.ssr <= 1e-20 * scale or np.ptp(fit.resid) <= 1e-12 * max(np.ptp(yv), 1e-300):
        cvs = critical_values("eg", "c", 2, n)
        adf = UnitRootResult(
            test="eg",
            statistic=-np.inf,
            lags_used=0,
            deterministic="n",
            critical_values=dict(zip(LEVELS, cvs)),
            reject={a: True for a in LEVELS},
            nobs=n,
            lag_criterion=crit,
            max_lag=max_lag,
            degenerate=True,
        )
    else:
        stat, lag, nobs, used_max = _adf_core(fit.resid, "n", max_lag, crit)
        cvs = critical_values("eg", "c", 2, nobs)
        cv = dict(zip(LEVELS, cvs))
        adf = UnitRootResult(
            test="eg",
            statistic=stat,
            lags_used=lag,
            deterministic="n",
            critical_values=cv,
            reject={a: stat < c for a, c in cv.items()},
            nobs=nobs,
            lag_criterion=crit,
            max_lag=used_max,
        )
    return CointResult(
        left=ykey,
        right=xkey,
        ols=fit,
        residual_adf=adf,
        lag_criterion=crit,
        dummy_sources=sources,
        i1_pretested=i1_pretested,
    )
