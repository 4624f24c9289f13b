"""Embedded critical values for ADF, Engle-Granger and KPSS statistics.

ADF and Engle-Granger values come from the MacKinnon response surfaces and
are evaluated at the regression sample size. KPSS values are asymptotic.
Provenance notes live next to the numbers in ``data/critical_values.json``.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from patentdyn.exceptions import UnsupportedCombination

__all__ = ["critical_values", "supported_combinations", "LEVELS"]

LEVELS = (0.01, 0.05, 0.10)


@lru_cache(maxsize=1)
def _table() -> dict:
    text = resources.files("patentdyn.data").joinpath("critical_values.json").read_text()
    return json.loads(text)


def supported_combinations() -> list[tuple[str, str, int]]:
    """All ``(test, deterministic, n_vars)`` triples with embedded values."""
    tab = _table()
    out = []
    for det, rows in tab["response_surface"].items():
        for n_vars in rows:
            n_vars = int(n_vars)
            out.append(("adf" if n_vars == 1 else "eg", det, n_vars))
    for det in tab["kpss"]:
        out.append(("kpss", det, 1))
    return sorted(out)


def critical_values(
    test: str, deterministic: str = "c", n_vars: int | None = None, sample_size: float | None = None
) -> tuple[float, float, float]:
    """Return critical values at the 1%, 5% and 10% levels.

    Parameters
    ----------
    test : {"adf", "eg", "kpss"}
        ``"eg"`` is the residual-based Engle-Granger test.
    deterministic : {"n", "c", "ct"}
        Deterministic terms in the test regression (for ``"eg"`` the terms in
        the static cointegrating regression).
    n_vars : int, optional
        Number of I(1) variables. Defaults to 1 for ADF/KPSS and 2 for EG.
    sample_size : float, optional
        Observations in the test regression. ``None`` (or ``inf``) gives the
        asymptotic values.

    Returns
    -------
    tuple of float
        ``(cv1, cv5, cv10)``. Left tail for ADF/EG, right tail for KPSS.
    """
    test = test.lower()
    if n_vars is None:
        n_vars = 2 if test == "eg" else 1
    key = (test, deterministic, n_vars)
    if key not in supported_combinations():
        raise UnsupportedCombination(
            f"no critical values for {key}; supported: {supported_combinations()}"
        )
    tab = _table()
    if test == "kpss":
        return tuple(tab["kpss"][deterministic])

    rows = tab["response_surface"][deterministic][str(n_vars)]
    if sample_size is None or sample_size == float("inf"):
        return tuple(r[0] for r in rows)
    if sample_size <= 0:
        raise ValueError("sample_size must be positive")
    inv = 1.0 / float(sample_size)
    return tuple(r[0] + r[1] * inv + r[2] * inv**2 + r[3] * inv**3 for r in rows)
