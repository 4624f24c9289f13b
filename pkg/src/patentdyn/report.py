"""Result tables and plot data built from a directory of annual count series.

Tables
------
``Stationarity``
    One row per CPC section of the core-AI series: selected ARIMA model and
    whether it reduces to white noise.
``Breaks``
    Break years per CPC section (rows) and domain (columns).
``CointByGeo``, ``CointByApplicant``
    Engle-Granger statistics for the three domain pairs (rows) across filing
    authorities or applicant regions (columns).
``CointBySection``
    The same pairs across CPC sections.
``CointBySectionGeo``
    The same pairs per filing authority (row groups) and CPC section.

Every cell is written next to the table as a JSON file holding the full test
result and the options used. Cells whose series are missing, too short or
degenerate read ``NA`` and carry the reason in their JSON file.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from patentdyn import __version__
from patentdyn._io import atomic_write_text, dumps
from patentdyn.econ import bai_perron, engle_granger, integration_order, select_arima
from patentdyn.exceptions import PatentDynError
from patentdyn.series import AnnualSeries, compute_shares, cumulate_stock, log_transform, read_series_dir

__all__ = [
    "TABLES",
    "FIGURES",
    "ReportOptions",
    "ReportOutput",
    "SeriesIndex",
    "stars",
    "write_report",
    "plot_rows",
    "write_plotdata",
]

log = logging.getLogger(__name__)

TABLES = ("Stationarity", "Breaks", "CointByGeo", "CointByApplicant", "CointBySection", "CointBySectionGeo")

FIGURES = {
    "FamiliesByYear": "fig3",
    "StockBySection": "fig4",
    "RobotFamiliesByYear": "fig5",
    "StockByDomain": "fig6",
    "AuthorityShares": "fig7",
    "RobotAuthorityShares": "fig8",
    "ApplicantShares": "fig9",
    "RobotApplicantShares": "fig10",
}

CORE_AI, TRAD, ENH = "CoreAI", "TraditionalRobot", "AIEnhancedRobot"

PAIRS = (
    ("AI vs. Enhanced Robots", CORE_AI, ENH),
    ("AI vs. Traditional Robots", CORE_AI, TRAD),
    ("Enhanced vs. Traditional Robots", ENH, TRAD),
)

SECTION_NAMES = {
    "A": "A (Human necessities)",
    "B": "B (Transporting)",
    "E": "E (Construction)",
    "F": "F (Mechanical engineering)",
    "G": "G (Physics)",
    "H": "H (Electricity)",
    "Y": "Y (New technologies)",
}
SECTIONS = tuple(SECTION_NAMES)

# (column label, region value)
GEO_COLUMNS = (("China", "China"), ("US", "US"), ("EU", "Europe"), ("Japan", "Japan"), ("S. Korea", "SouthKorea"))
GEO_GROUPS = (
    ("China", "China"),
    ("United States", "US"),
    ("Japan", "Japan"),
    ("Europe", "Europe"),
    ("South Korea", "SouthKorea"),
)
REGIONS = ("US", "China", "Japan", "SouthKorea", "Europe", "RestOfWorld")


@dataclass(frozen=True)
class ReportOptions:
    """Transform and test options shared by all cells; recorded in every result file.

    ``stock=False`` means tests run on log annual counts; ``stock=True`` on
    log cumulative stocks.
    """

    stock: bool = False
    zero_policy: str = "dummy_zeros"
    deterministic: str = "c"
    max_lag: int | None = None
    lag_criterion: str = "aic"
    bandwidth: str | int = "auto"
    ic: str = "bic"
    p_max: int = 3
    q_max: int = 3
    max_breaks: int = 5
    trim: float = 0.15

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ReportOutput:
    table: str
    csv_path: Path
    rows: list[list[str]]
    warnings: list[str] = field(default_factory=list)


class SeriesIndex:
    """Count series of a directory indexed by (domain, basis, geography, section)."""

    def __init__(self, series: list[AnnualSeries]):
        self.by_key: dict[tuple, AnnualSeries] = {}
        for s in series:
            if s.transform != "count":
                continue
            k = s.key
            self.by_key[(k.domain, k.basis, k.geography, k.cpc_section)] = s

    @classmethod
    def from_dir(cls, directory) -> "SeriesIndex":
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"series directory {directory} does not exist")
        series = read_series_dir(directory)
        if not series:
            raise FileNotFoundError(f"no series files in {directory}")
        return cls(series)

    def get(self, domain, basis=None, geography=None, section=None) -> AnnualSeries | None:
        return self.by_key.get((domain, basis, geography, section))

    def __len__(self) -> int:
        return len(self.by_key)


def prepare(series: AnnualSeries, opts: ReportOptions) -> AnnualSeries:
    s = cumulate_stock(series) if opts.stock else series
    return log_transform(s, opts.zero_policy)


def stars(reject: dict[float, bool]) -> str:
    """``***``/``**``/``*`` for rejection at 1/5/10 %."""
    if reject.get(0.01):
        return "***"
    if reject.get(0.05):
        return "**"
    if reject.get(0.10):
        return "*"
    return ""


def _key_desc(*series: AnnualSeries | None) -> list:
    return [s.key.to_dict() if s is not None else None for s in series]


def _base_payload(table: str, row: str, column: str, opts: ReportOptions) -> dict:
    return {
        "table": table,
        "row": row,
        "column": column,
        "options": opts.to_dict(),
        "series_transform": ("log_stock" if opts.stock else "log_count"),
        "version": __version__,
    }


def _na(payload: dict, reason: str) -> tuple[str, dict]:
    payload.update(status="NA", reason=reason, cell="NA")
    return "NA", payload


# ---------------------------------------------------------------------------
# cells


def _coint_cell(idx: SeriesIndex, table, row, column, left_key, right_key, opts) -> tuple[str, dict]:
    payload = _base_payload(table, row, column, opts)
    left, right = idx.get(*left_key), idx.get(*right_key)
    payload["series"] = _key_desc(left, right)
    if left is None or right is None:
        missing = [k for k, s in ((left_key, left), (right_key, right)) if s is None]
        return _na(payload, f"missing series {missing}")
    try:
        yl, xl = prepare(left, opts), prepare(right, opts)
        orders = []
        for s in (yl, xl):
            try:
                orders.append(
                    integration_order(s.values, 2, opts.deterministic, 0.05, opts.lag_criterion, opts.bandwidth, opts.max_lag).d
                )
            except PatentDynError as exc:
                orders.append(f"{type(exc).__name__}: {exc}")
        res = engle_granger(
            yl, xl, lag_criterion=opts.lag_criterion, max_lag=opts.max_lag, i1_pretested=orders == [1, 1]
        )
    except PatentDynError as exc:
        return _na(payload, f"{type(exc).__name__}: {exc}")
    text = f"{res.statistic:.3f}{stars(res.reject)}"
    payload.update(status="ok", cell=text, statistic=res.statistic, integration_orders=orders, result=res.to_dict())
    return text, payload


def _stationarity_cell(idx: SeriesIndex, section: str, opts: ReportOptions) -> tuple[list[str], dict]:
    payload = _base_payload("Stationarity", section, "Selected ARIMA Model", opts)
    s = idx.get(CORE_AI, None, None, section)
    payload["series"] = _key_desc(s)
    if s is None:
        text, payload = _na(payload, f"missing series {(CORE_AI, None, None, section)}")
        return [text, ""], payload
    try:
        y = prepare(s, opts)
        io_ = integration_order(y.values, 2, opts.deterministic, 0.05, opts.lag_criterion, opts.bandwidth, opts.max_lag)
        sel = select_arima(y.values, opts.p_max, opts.q_max, d=io_.d, criterion=opts.ic)
    except PatentDynError as exc:
        text, payload = _na(payload, f"{type(exc).__name__}: {exc}")
        return [text, ""], payload
    p, d, q = sel.best.order
    model = f"ARIMA({p},{d},{q})"
    process = "white noise" if p == 0 and q == 0 else ""
    payload.update(
        status="ok",
        cell=model,
        order=[p, d, q],
        process=process,
        integration_order={
            "d": io_.d,
            "conflict": io_.conflict,
            "adf": [a.to_dict() for a in io_.adf],
            "kpss": [k.to_dict() if k is not None else None for k in io_.kpss],
        },
        ic_table={f"{pq[0]},{pq[1]}": v for pq, v in sel.ic_table().items()},
        failed_cells={f"{pq[0]},{pq[1]}": v for pq, v in sel.table.items() if isinstance(v, str)},
        best=sel.best.to_dict(),
    )
    return [model, process], payload


def _breaks_cell(idx: SeriesIndex, section: str, domain: str, column: str, opts) -> tuple[str, dict]:
    payload = _base_payload("Breaks", SECTION_NAMES[section], column, opts)
    s = idx.get(domain, None, None, section)
    payload["series"] = _key_desc(s)
    if s is None:
        return _na(payload, f"missing series {(domain, None, None, section)}")
    try:
        y = prepare(s, opts)
        if np.ptp(y.values) == 0:
            return _na(payload, "series is constant")
        bs = bai_perron(y.values, max_breaks=opts.max_breaks, trim=opts.trim, years=y.years)
    except PatentDynError as exc:
        return _na(payload, f"{type(exc).__name__}: {exc}")
    text = ", ".join(str(b) for b in bs.break_years) if bs.break_years else "none"
    payload.update(status="ok", cell=text, break_years=list(bs.break_years), result=bs.to_dict())
    return text, payload


# ---------------------------------------------------------------------------
# tables


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() else "-" for ch in text).strip("-")


def _build(idx: SeriesIndex, table: str, opts: ReportOptions):
    """Return (header, rows, cells) where cells map a JSON file stem to its payload."""
    cells: dict[str, dict] = {}
    rows: list[list[str]] = []
    if table == "Stationarity":
        header = ["Series", "Selected ARIMA Model", "Process"]
        for sec in SECTIONS:
            vals, payload = _stationarity_cell(idx, sec, opts)
            rows.append([sec, *vals])
            cells[_slug(sec)] = payload
    elif table == "Breaks":
        cols = (("AI-Enhanced Robots", ENH), ("Traditional Robots", TRAD), ("Core AI", CORE_AI))
        header = ["CPC Section", *(c for c, _ in cols)]
        for sec in SECTIONS:
            row = [SECTION_NAMES[sec]]
            for label, dom in cols:
                text, payload = _breaks_cell(idx, sec, dom, label, opts)
                row.append(text)
                cells[f"{sec}__{_slug(label)}"] = payload
            rows.append(row)
    elif table in ("CointByGeo", "CointByApplicant"):
        basis = "authority" if table == "CointByGeo" else "applicant"
        cols = [(label, (basis, region)) for label, region in GEO_COLUMNS]
        if table == "CointByGeo":
            cols.append(("Total", (None, None)))
        header = ["", *(c for c, _ in cols)]
        for row_label, ld, rd in PAIRS:
            row = [row_label]
            for label, (b, g) in cols:
                text, payload = _coint_cell(idx, table, row_label, label, (ld, b, g, None), (rd, b, g, None), opts)
                row.append(text)
                cells[f"{_slug(row_label)}__{_slug(label)}"] = payload
            rows.append(row)
    elif table == "CointBySection":
        header = ["", *SECTIONS]
        for row_label, ld, rd in PAIRS:
            row = [row_label]
            for sec in SECTIONS:
                text, payload = _coint_cell(idx, table, row_label, sec, (ld, None, None, sec), (rd, None, None, sec), opts)
                row.append(text)
                cells[f"{_slug(row_label)}__{sec}"] = payload
            rows.append(row)
    elif table == "CointBySectionGeo":
        secs = tuple(s for s in SECTIONS if s != "E")
        header = ["Country", "", *secs]
        for group, region in GEO_GROUPS:
            for row_label, ld, rd in PAIRS:
                row = [group, row_label]
                for sec in secs:
                    text, payload = _coint_cell(
                        idx,
                        table,
                        f"{group}: {row_label}",
                        sec,
                        (ld, "authority", region, sec),
                        (rd, "authority", region, sec),
                        opts,
                    )
                    row.append(text)
                    cells[f"{_slug(group)}__{_slug(row_label)}__{sec}"] = payload
                rows.append(row)
    else:
        raise ValueError(f"unknown table {table!r}; choose from {', '.join(TABLES)}")
    return header, rows, cells


def write_report(series_dir, table: str, out_dir, options: ReportOptions | None = None) -> ReportOutput:
    """Compute ``table`` from the count series in ``series_dir`` and write it to ``out_dir``.

    Writes ``<table>.csv`` and a ``<table>/`` folder with one JSON per cell.
    Missing series give ``NA`` cells and a warning, not an error.
    """
    if table not in TABLES:
        raise ValueError(f"unknown table {table!r}; choose from {', '.join(TABLES)}")
    opts = options or ReportOptions()
    idx = SeriesIndex.from_dir(series_dir)
    header, rows, cells = _build(idx, table, opts)
    out_dir = Path(out_dir)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path = atomic_write_text(out_dir / f"{table}.csv", buf.getvalue())
    warnings = []
    for stem, payload in sorted(cells.items()):
        atomic_write_text(out_dir / table / f"{stem}.json", dumps(payload))
        if payload.get("status") == "NA" and str(payload.get("reason", "")).startswith("missing series"):
            warnings.append(f"{table} [{payload['row']} / {payload['column']}]: {payload['reason']}")
    for msg in warnings:
        log.warning(msg)
    return ReportOutput(table, path, [header, *rows], warnings)


# ---------------------------------------------------------------------------
# plot data


def _sum_series(parts: list[AnnualSeries]) -> AnnualSeries:
    vals = np.sum([p.values for p in parts], axis=0)
    return parts[0].with_values(vals, "count", zero_mask=vals == 0)


def _need(idx: SeriesIndex, *key) -> AnnualSeries:
    s = idx.get(*key)
    if s is None:
        raise FileNotFoundError(f"series {key} not found")
    return s


def _level_rows(series: AnnualSeries, label: str, transform: str = "count") -> list[tuple]:
    if transform == "log_stock":
        series = log_transform(cumulate_stock(series), "dummy_zeros")
    return [(int(y), label, float(v)) for y, v in zip(series.years, series.values)]


def _share_rows(series: list[AnnualSeries], split: bool = False) -> list[tuple]:
    out = []
    for table in compute_shares(series, technology_split=split):
        for k in sorted(table.shares):
            out.append((table.year, k, table.shares[k]))
    return out


def plot_rows(series_dir, figure: str) -> list[tuple[int, str, float]]:
    """Long-format ``(year, key, value)`` rows for one figure.

    ``figure`` is a name from ``FIGURES`` or its ``figN`` alias.
    """
    aliases = {v: k for k, v in FIGURES.items()}
    name = aliases.get(figure.lower(), figure)
    if name not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    idx = SeriesIndex.from_dir(series_dir)
    if name == "FamiliesByYear":
        return _level_rows(_need(idx, CORE_AI), CORE_AI)
    if name == "RobotFamiliesByYear":
        return _level_rows(_sum_series([_need(idx, TRAD), _need(idx, ENH)]), "Robots")
    if name == "StockBySection":
        rows = []
        for sec in SECTIONS:
            s = idx.get(CORE_AI, None, None, sec)
            if s is not None:
                rows += _level_rows(s, sec, "log_stock")
        if not rows:
            raise FileNotFoundError("no core-AI section series found")
        return sorted(rows)
    if name == "StockByDomain":
        return sorted(_level_rows(_need(idx, TRAD), TRAD, "log_stock") + _level_rows(_need(idx, ENH), ENH, "log_stock"))
    if name == "AuthorityShares":
        return _share_rows([_need(idx, CORE_AI, "authority", r) for r in REGIONS])
    if name == "ApplicantShares":
        return _share_rows([_need(idx, CORE_AI, "applicant", r) for r in REGIONS])
    if name == "RobotAuthorityShares":
        parts = [_sum_series([_need(idx, TRAD, "authority", r), _need(idx, ENH, "authority", r)]) for r in REGIONS]
        return _share_rows(parts)
    # RobotApplicantShares: countries x {NOI, I}, normalised by the grand total
    parts = [_need(idx, d, "applicant", r) for r in REGIONS for d in (TRAD, ENH)]
    return _share_rows(parts, split=True)


def write_plotdata(series_dir, figure: str, out_path) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "key", "value"])
    for y, k, v in plot_rows(series_dir, figure):
        w.writerow([y, k, repr(float(v))])
    return atomic_write_text(out_path, buf.getvalue())
