"""Annual count, stock, log, share and differenced series built from labelled families."""

from __future__ import annotations

import csv
import io
import itertools
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from patentdyn._io import atomic_write_text, dumps
from patentdyn.exceptions import NegativeValue, TooShort, WrongTransform, YearMismatch

__all__ = [
    "SeriesKey",
    "AnnualSeries",
    "ShareTable",
    "GROUP_DIMENSIONS",
    "build_counts",
    "cumulate_stock",
    "log_transform",
    "compute_shares",
    "difference",
    "normalize",
    "write_series",
    "read_series",
    "read_series_dir",
]

# dimension name -> (FamilyRecord attribute, geography basis)
GROUP_DIMENSIONS = {
    "domain": ("domain_label", None),
    "region": ("region", "authority"),
    "applicant": ("applicant_region", "applicant"),
    "applicant_country": ("applicant_country", "applicant"),
    "section": ("cpc_sections", None),
}


def _value(x):
    return getattr(x, "value", x)


@dataclass(frozen=True, order=True)
class SeriesKey:
    """Identifies a series: domain label, geography (and its basis), CPC section."""

    domain: str | None = None
    geography: str | None = None
    basis: str | None = None
    cpc_section: str | None = None

    def slug(self) -> str:
        parts = [self.domain or "all", self.basis or "all", self.geography or "all", self.cpc_section or "all"]
        return "__".join(re.sub(r"[^A-Za-z0-9_-]", "-", p) for p in parts)

    def to_dict(self) -> dict:
        return {"domain": self.domain, "geography": self.geography, "basis": self.basis, "cpc_section": self.cpc_section}

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesKey":
        return cls(d.get("domain"), d.get("geography"), d.get("basis"), d.get("cpc_section"))


@dataclass(frozen=True, eq=False)
class AnnualSeries:
    """Year-indexed series with a mask of years whose raw value was zero.

    ``transform`` is one of ``count``, ``stock``, ``log_count``, ``log_stock``,
    ``share`` or ``diff(d)``.
    """

    key: SeriesKey
    years: np.ndarray
    values: np.ndarray
    zero_mask: np.ndarray
    transform: str = "count"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.zero_mask, dtype=bool)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "zero_mask", mask)
        if not (years.shape == values.shape == mask.shape) or years.ndim != 1:
            raise ValueError("years, values and zero_mask must be 1-d and of equal length")
        if years.size > 1 and np.any(np.diff(years) != 1):
            raise ValueError("years must be a contiguous increasing range")
        if self.transform in ("count", "stock") and np.any(values < 0):
            raise NegativeValue(f"{self.transform} series has negative values")
        if self.transform == "stock" and np.any(np.diff(values) < 0):
            raise ValueError("stock series must be nondecreasing")
        if self.transform == "share" and np.any((values < 0) | (values > 1)):
            raise ValueError("share values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.values.shape[0]

    def with_values(self, values, transform: str, zero_mask=None, years=None) -> "AnnualSeries":
        return replace(
            self,
            values=values,
            transform=transform,
            zero_mask=self.zero_mask if zero_mask is None else zero_mask,
            years=self.years if years is None else years,
        )


def _levels_of(family, dim: str) -> list:
    attr, _ = GROUP_DIMENSIONS[dim]
    raw = getattr(family, attr)
    if dim == "section":
        return sorted(_value(s) for s in raw)
    return [] if raw is None else [_value(raw)]


def build_counts(
    families: Iterable,
    group_by: Sequence[str] = ("domain",),
    first: int = 1980,
    last: int = 2018,
    levels: dict[str, Sequence[str]] | None = None,
) -> list[AnnualSeries]:
    """Count families per year for every combination of the grouping dimensions.

    Parameters
    ----------
    families : iterable of FamilyRecord
        Already restricted to ``first..last``.
    group_by : sequence of str
        Any of ``domain``, ``region`` (filing authority), ``applicant``
        (applicant region), ``applicant_country`` and ``section``. A family
        holding several CPC sections is counted once in each of them. Families
        without an applicant country are skipped by applicant groupings.
    levels : dict, optional
        Fixed level lists per dimension. Listed levels get a series even when
        no family falls in them; unlisted observed levels are dropped.

    Returns
    -------
    list of AnnualSeries
        Sorted by key. Years without families hold 0 with ``zero_mask`` set.
    """
    if first > last:
        raise ValueError("first must not exceed last")
    for dim in group_by:
        if dim not in GROUP_DIMENSIONS:
            raise ValueError(f"unknown grouping {dim!r}; choose from {sorted(GROUP_DIMENSIONS)}")
    years = np.arange(first, last + 1)
    levels = dict(levels or {})
    counts: dict[tuple, np.ndarray] = {}
    observed: dict[str, set] = {dim: set() for dim in group_by}
    for fam in families:
        year = fam.application_year
        if not first <= year <= last:
            raise ValueError(f"family {fam.family_id} (year {year}) lies outside {first}-{last}; window first")
        per_dim = [_levels_of(fam, dim) for dim in group_by]
        for dim, lv in zip(group_by, per_dim):
            observed[dim].update(lv)
        for combo in itertools.product(*per_dim):
            arr = counts.setdefault(combo, np.zeros(years.shape[0]))
            arr[year - first] += 1

    dim_levels = [sorted(levels[d]) if d in levels else sorted(observed[d]) for d in group_by]
    combos = list(itertools.product(*dim_levels)) if group_by else [()]
    basis = None
    for dim in group_by:
        basis = GROUP_DIMENSIONS[dim][1] or basis
    out = []
    for combo in combos:
        fields_ = dict(zip(group_by, combo))
        geo = fields_.get("region") or fields_.get("applicant") or fields_.get("applicant_country")
        key = SeriesKey(
            domain=fields_.get("domain"),
            geography=geo,
            basis=basis,
            cpc_section=fields_.get("section"),
        )
        vals = counts.get(combo, np.zeros(years.shape[0]))
        out.append(AnnualSeries(key, years.copy(), vals, vals == 0, "count"))
    out.sort(key=lambda s: s.key.slug())
    return out


def cumulate_stock(series: AnnualSeries) -> AnnualSeries:
    """Cumulative stock ``stock_t = sum_{s <= t} count_s`` (no depreciation)."""
    if series.transform != "count":
        raise WrongTransform(f"stock needs a count series, got {series.transform!r}")
    stock = np.cumsum(series.values)
    return series.with_values(stock, "stock", zero_mask=stock == 0)


def log_transform(series: AnnualSeries, policy: str = "dummy_zeros") -> AnnualSeries:
    """Natural log of a count or stock series.

    ``policy="log1p"`` returns ``log(1 + x)``. ``policy="dummy_zeros"`` returns
    ``log(x)`` where ``x > 0`` and 0 where ``x == 0``; the zero positions stay
    in ``zero_mask`` for the nil-data dummies of the cointegrating regression.
    """
    x = series.values
    if np.any(x < 0):
        raise NegativeValue("log transform of a negative value")
    if policy == "log1p":
        out = np.log1p(x)
    elif policy == "dummy_zeros":
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.log(x[pos])
    else:
        raise ValueError(f"unknown zero policy {policy!r}")
    name = "log_stock" if series.transform == "stock" else "log_count"
    return series.with_values(out, name, zero_mask=x == 0)


def difference(series: AnnualSeries, d: int = 1) -> AnnualSeries:
    """Apply the ``d``-th difference; the first ``d`` years are dropped."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return series
    if len(series) <= d:
        raise TooShort(f"cannot difference a series of length {len(series)} {d} times")
    return replace(
        series,
        years=series.years[d:],
        values=np.diff(series.values, n=d),
        zero_mask=series.zero_mask[d:],
        transform=f"diff({d})",
    )


def normalize(series: AnnualSeries, denominator: AnnualSeries) -> AnnualSeries:
    """Divide counts by a user-supplied total-patenting series over the same years.

    Years where the denominator is zero get 0.
    """
    if not np.array_equal(series.years, denominator.years):
        raise YearMismatch("normaliser must cover the same years")
    num, den = series.values, denominator.values
    if np.any(den < num):
        raise ValueError("denominator is smaller than the series in some year")
    out = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return series.with_values(out, "share")


@dataclass(frozen=True)
class ShareTable:
    """Shares of one year, normalised by the grand total across all entries."""

    year: int
    shares: dict[str, float]
    basis: str | None
    technology_split: bool = False
    zero_total: bool = False


TECH_CODES = {"TraditionalRobot": "NOI", "AIEnhancedRobot": "I"}


def _share_label(key: SeriesKey, split: bool) -> str:
    geo = key.geography or "all"
    if not split:
        return geo
    tech = TECH_CODES.get(key.domain)
    if tech is None:
        raise ValueError(f"technology split needs robot domains, got {key.domain!r}")
    return f"{geo}:{tech}"


def compute_shares(series: Sequence[AnnualSeries], technology_split: bool = False) -> list[ShareTable]:
    """Per-year shares of each series in the sum over all of them.

    With ``technology_split`` the series are expected to be traditional and
    AI-enhanced robot counts per geography, labelled ``<geo>:NOI`` and
    ``<geo>:I``, and the denominator is the total over both technologies.
    Years with a zero total get all-zero shares and ``zero_total=True``.
    """
    if not series:
        return []
    years = series[0].years
    basis = series[0].key.basis
    for s in series[1:]:
        if not np.array_equal(s.years, years):
            raise YearMismatch("all series must cover the same years")
        if s.key.basis != basis:
            raise ValueError("all series must share one geography basis")
    labels = [_share_label(s.key, technology_split) for s in series]
    if len(set(labels)) != len(labels):
        raise ValueError("share labels are not unique; group the inputs first")
    M = np.vstack([s.values for s in series])
    totals = M.sum(axis=0)
    out = []
    for t, year in enumerate(years):
        tot = totals[t]
        if tot > 0:
            shares = {lab: float(M[i, t] / tot) for i, lab in enumerate(labels)}
        else:
            shares = {lab: 0.0 for lab in labels}
        out.append(ShareTable(int(year), shares, basis, technology_split, zero_total=not tot > 0))
    return out


def write_series(series: AnnualSeries, directory) -> Path:
    """Write ``<slug>__<transform>.csv`` (``year,value,zero``) and a JSON sidecar."""
    directory = Path(directory)
    stem = f"{series.key.slug()}__{re.sub(r'[^A-Za-z0-9_]', '', series.transform)}"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "value", "zero"])
    for y, v, z in zip(series.years, series.values, series.zero_mask):
        w.writerow([int(y), repr(float(v)), int(z)])
    path = atomic_write_text(directory / f"{stem}.csv", buf.getvalue())
    sidecar = {"key": series.key.to_dict(), "transform": series.transform, "meta": series.meta}
    atomic_write_text(directory / f"{stem}.json", dumps(sidecar))
    return path


def read_series(path) -> AnnualSeries:
    """Read a series CSV. Without a JSON sidecar the key is taken from the file name.

    The ``zero`` column is optional; when absent it is derived from ``value == 0``.
    """
    path = Path(path)
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
    else:
        meta = {"key": {"domain": path.stem}, "transform": "level"}
    years, values, zeros = [], [], []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"year", "value"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: series files need 'year' and 'value' columns")
        for row in reader:
            years.append(int(row["year"]))
            values.append(float(row["value"]))
            z = row.get("zero")
            zeros.append(z in ("1", "true", "True") if z is not None else float(row["value"]) == 0.0)
    return AnnualSeries(
        SeriesKey.from_dict(meta["key"]),
        np.array(years, dtype=int),
        np.array(values),
        np.array(zeros, dtype=bool),
        meta.get("transform", "count"),
        meta.get("meta", {}),
    )


def read_series_dir(directory) -> list[AnnualSeries]:
    directory = Path(directory)
    return [read_series(p) for p in sorted(directory.glob("*.csv"))]
