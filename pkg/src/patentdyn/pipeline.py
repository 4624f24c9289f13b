"""End-to-end run: parse -> deduplicate -> classify -> window -> series -> reports, with a manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from patentdyn import __version__
from patentdyn._io import atomic_write_text, dumps
from patentdyn.classifier import (
    CpcRuleSet,
    DomainLabel,
    KeywordDictionary,
    Tier,
    classify_families,
    keyword_domain_histogram,
)
from patentdyn.exceptions import PatentDynError
from patentdyn.ingest import RegionMapper, apply_window, deduplicate_families, parse_patent_file, write_families
from patentdyn.report import FIGURES, TABLES, ReportOptions, write_plotdata, write_report
from patentdyn.series import build_counts, write_series

__all__ = ["ConfigError", "StageError", "RunConfig", "SERIES_GROUPINGS", "run_pipeline", "demo_corpus_path"]

log = logging.getLogger(__name__)

SERIES_GROUPINGS = (
    ("domain",),
    ("domain", "region"),
    ("domain", "applicant"),
    ("domain", "section"),
    ("domain", "section", "region"),
)
REGION_LEVELS = ("China", "Europe", "Japan", "RestOfWorld", "SouthKorea", "US")
LEVELS = {
    "domain": tuple(d.value for d in DomainLabel),
    "region": REGION_LEVELS,
    "applicant": REGION_LEVELS,
    "section": tuple("ABCDEFGHY"),
}


class ConfigError(PatentDynError, ValueError):
    """Run configuration is invalid (bad window, missing file, unknown option)."""


class StageError(PatentDynError, RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")


def demo_corpus_path() -> Path:
    return Path(str(resources.files("patentdyn.data").joinpath("demo_corpus.csv")))


@dataclass
class RunConfig:
    """Everything a pipeline run depends on.

    Asset paths left as ``None`` use the bundled baseline files.
    """

    input: str | None = None
    format: str | None = None
    dictionary: str | None = None
    cpc_ai: str | None = None
    cpc_robot: str | None = None
    authorities: str | None = None
    first: int = 1980
    last: int = 2018
    mode: str = "union"
    out: str | None = None
    seed: int = 0
    reports: bool = True
    tables: list[str] = field(default_factory=lambda: list(TABLES))
    figures: list[str] = field(default_factory=lambda: list(FIGURES))
    report: ReportOptions = field(default_factory=ReportOptions)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config field(s) {sorted(unknown)}")
        rep = d.pop("report", None) or {}
        rep_known = {f.name for f in fields(ReportOptions)}
        if set(rep) - rep_known:
            raise ConfigError(f"unknown report option(s) {sorted(set(rep) - rep_known)}")
        return cls(**d, report=ReportOptions(**rep))

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.input is None:
            raise ConfigError("no input file given")
        for name in ("input", "dictionary", "cpc_ai", "cpc_robot", "authorities"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{name} path {p} does not exist")
        if not (1900 <= self.first <= 2100 and 1900 <= self.last <= 2100):
            raise ConfigError(f"window {self.first}-{self.last} must lie within 1900-2100")
        if self.first > self.last:
            raise ConfigError(f"window {self.first}-{self.last} is inverted")
        if self.mode not in ("union", "intrinsic"):
            raise ConfigError(f"mode must be 'union' or 'intrinsic', got {self.mode!r}")
        bad = [t for t in self.tables if t not in TABLES]
        if bad:
            raise ConfigError(f"unknown table(s) {bad}; choose from {', '.join(TABLES)}")
        bad = [f for f in self.figures if f not in FIGURES]
        if bad:
            raise ConfigError(f"unknown figure(s) {bad}; choose from {', '.join(FIGURES)}")
        if self.report.zero_policy not in ("log1p", "dummy_zeros"):
            raise ConfigError("zero_policy must be 'log1p' or 'dummy_zeros'")

    def input_format(self) -> str:
        if self.format:
            return self.format.lower()
        return "jsonl" if str(self.input).lower().endswith((".jsonl", ".ndjson")) else "csv"

    def load_assets(self) -> tuple[KeywordDictionary, CpcRuleSet, RegionMapper]:
        kd = KeywordDictionary.from_csv(self.dictionary) if self.dictionary else KeywordDictionary.baseline()
        if self.cpc_ai or self.cpc_robot:
            base = resources.files("patentdyn.data")
            rules = CpcRuleSet.from_files(
                self.cpc_ai or base.joinpath("cpc_ai.txt"), self.cpc_robot or base.joinpath("cpc_robot.txt")
            )
        else:
            rules = CpcRuleSet.baseline()
        mapper = RegionMapper.from_csv(self.authorities) if self.authorities else RegionMapper()
        return kd, rules, mapper


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _file_digest(path) -> str | None:
    return None if path is None else _sha256(Path(path).read_bytes())


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PatentDynError as exc:
        if isinstance(exc, StageError):
            raise
        raise StageError(name, exc) from exc
    except (OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


def _histogram_csv(families) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["location", "group", "count"])
    robots = [f for f in families if f.domain_label in (DomainLabel.TRADITIONAL_ROBOT, DomainLabel.AI_ENHANCED_ROBOT)]
    hits = [h for f in robots for h in f.keyword_hits]
    for loc in ("Title", "Abstract"):
        for g, c in keyword_domain_histogram(hits, loc, tiers=(Tier.AI_BROAD,)).items():
            w.writerow([loc, g, c])
    return buf.getvalue()


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage and write outputs below ``config.out``.

    Layout::

        families.csv            labelled families inside the window
        keyword_histogram.csv   text-mining hits per group for robot families
        series/                 annual count series (CSV + JSON sidecar)
        reports/<table>.csv     result tables, one JSON per cell in reports/<table>/
        plotdata/<figure>.csv   long-format plot data
        manifest.json           options, counts and a content hash of all the above

    Outputs depend only on the inputs and the options, so two runs with the
    same configuration produce byte-identical files.
    """
    _stage("validate", config.validate)
    if config.out is None:
        raise ConfigError("no output directory given")
    out = Path(config.out)
    kd, rules, mapper = _stage("assets", config.load_assets)
    warnings: list[str] = []

    records = _stage("ingest", parse_patent_file, Path(config.input).read_bytes(), config.input_format())
    if not records:
        warnings.append("input contains no records")
    families = _stage("ingest", deduplicate_families, records, mapper)
    labelled = _stage("classify", classify_families, families, kd, rules, config.mode)
    windowed = _stage("window", apply_window, labelled, config.first, config.last)

    written: list[Path] = []
    written.append(atomic_write_text(out / "families.csv", write_families(windowed)))
    written.append(atomic_write_text(out / "keyword_histogram.csv", _histogram_csv(windowed)))

    series_dir = out / "series"
    n_series = 0
    for group in SERIES_GROUPINGS:
        levels = {dim: LEVELS[dim] for dim in group}
        for s in _stage("series", build_counts, windowed, group, config.first, config.last, levels):
            p = write_series(s, series_dir)
            written += [p, p.with_suffix(".json")]
            n_series += 1

    if config.reports:
        for table in config.tables:
            rep = _stage("report", write_report, series_dir, table, out / "reports", config.report)
            written.append(rep.csv_path)
            written += sorted((out / "reports" / table).glob("*.json"))
            warnings += rep.warnings
        for fig in config.figures:
            written.append(_stage("plotdata", write_plotdata, series_dir, fig, out / "plotdata" / f"{fig}.csv"))

    counts = {d.value: 0 for d in DomainLabel}
    for f in windowed:
        counts[f.domain_label.value] += 1
    files = {p.relative_to(out).as_posix(): _sha256(p.read_bytes()) for p in sorted(set(written))}
    options = config.to_dict()
    options.pop("out")
    # paths are machine specific; the manifest records file names and content digests instead
    inputs = {}
    for name in ("input", "dictionary", "cpc_ai", "cpc_robot", "authorities"):
        p = options.pop(name)
        inputs[name] = {"name": Path(p).name, "sha256": _file_digest(p)} if p else {"name": None, "bundled": True}
    options_hash = _sha256(dumps(options).encode())
    manifest = {
        "versions": {"patentdyn": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "inputs": inputs,
        "options": options,
        "options_hash": options_hash,
        "counts": {
            "records": len(records),
            "families": len(families),
            "families_in_window": len(windowed),
            "series": n_series,
            "by_domain": counts,
            "unknown_authorities": dict(sorted(mapper.unknown.items())),
        },
        "warnings": warnings,
        "files": files,
        "content_hash": _sha256(dumps(files).encode()),
    }
    atomic_write_text(out / "manifest.json", dumps(manifest))
    for msg in warnings:
        log.warning(msg)
    return manifest
