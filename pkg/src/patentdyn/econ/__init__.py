"""Statistical engine: OLS, unit-root tests, ARIMA, structural breaks and cointegration."""

from patentdyn.econ.arima import ArimaFit, ArimaSelection, fit_arima, select_arima
from patentdyn.econ.breaks import BreakSet, bai_perron
from patentdyn.econ.coint import CointResult, engle_granger
from patentdyn.econ.critical import critical_values
from patentdyn.econ.ols import OlsFit, information_criteria, ols
from patentdyn.econ.unitroot import (
    IntegrationOrder,
    UnitRootResult,
    adf_test,
    integration_order,
    kpss_test,
)

__all__ = [
    "ArimaFit",
    "ArimaSelection",
    "BreakSet",
    "CointResult",
    "IntegrationOrder",
    "OlsFit",
    "UnitRootResult",
    "adf_test",
    "bai_perron",
    "critical_values",
    "engle_granger",
    "fit_arima",
    "information_criteria",
    "integration_order",
    "kpss_test",
    "ols",
    "select_arima",
]
