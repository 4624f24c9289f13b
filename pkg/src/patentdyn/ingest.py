"""Patent record parsing, family deduplication, region attribution and windowing."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Sequence

from patentdyn.exceptions import DuplicatePatentId, EmptyAuthority, InvalidWindow, MalformedRow, SchemaError

__all__ = [
    "SCHEMA",
    "Region",
    "Sector",
    "PatentRecord",
    "FamilyRecord",
    "RegionMapper",
    "parse_patent_file",
    "deduplicate_families",
    "attribute_region",
    "apply_window",
    "family_as_record",
    "write_patent_file",
    "write_families",
    "read_families",
]

SCHEMA = (
    "patent_id",
    "family_id",
    "application_year",
    "title",
    "abstract",
    "cpc_codes",
    "authority",
    "applicant_country",
    "applicant_sector",
    "forward_citations",
    "backward_citations",
)

CPC_SECTIONS = frozenset("ABCDEFGHY")


class Region(str, Enum):
    US = "US"
    CHINA = "China"
    JAPAN = "Japan"
    SOUTH_KOREA = "SouthKorea"
    EUROPE = "Europe"
    REST_OF_WORLD = "RestOfWorld"


class Sector(str, Enum):
    COMPANY = "Company"
    GOVERNMENT = "Government"
    UNIVERSITY = "University"
    HOSPITAL = "Hospital"
    INDIVIDUAL = "Individual"
    MIXED = "Mixed"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, text: str | None) -> "Sector":
        if not text:
            return cls.UNKNOWN
        for member in cls:
            if member.value.lower() == text.strip().lower():
                return member
        raise ValueError(f"unknown applicant sector {text!r}")


@dataclass(frozen=True)
class PatentRecord:
    patent_id: str
    family_id: str
    application_year: int
    title: str
    abstract: str
    cpc_codes: tuple[str, ...]
    authority: str
    applicant_country: str | None
    applicant_sector: Sector
    forward_citations: int
    backward_citations: int

    def __post_init__(self):
        if not 1900 <= self.application_year <= 2100:
            raise ValueError(f"application_year {self.application_year} outside 1900-2100")
        if self.forward_citations < 0 or self.backward_citations < 0:
            raise ValueError("citation counts must be nonnegative")

    @property
    def unclassifiable(self) -> bool:
        """True when the record carries no CPC symbol."""
        return not self.cpc_codes


@dataclass(frozen=True)
class FamilyRecord:
    """One invention family, described by its representative patent.

    ``cpc_codes`` and ``cpc_sections`` are the union over all members.
    ``domain_label`` and ``intelligent`` stay ``None`` until classification.
    """

    family_id: str
    representative_patent_id: str
    application_year: int
    region: Region
    applicant_country: str | None
    applicant_region: Region | None
    applicant_sector: Sector
    cpc_codes: tuple[str, ...]
    cpc_sections: frozenset[str]
    title: str
    abstract: str
    authority: str
    forward_citations: int
    backward_citations: int
    members: tuple[str, ...] = ()
    domain_label: object = None
    intelligent: bool | None = None
    robot_types: frozenset[str] = field(default_factory=frozenset)
    keyword_hits: tuple = ()


# ---------------------------------------------------------------------------
# regions


def _load_authority_table(path=None) -> dict[str, Region]:
    if path is None:
        text = resources.files("patentdyn.data").joinpath("authorities.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    table: dict[str, Region] = {}
    for row in csv.DictReader(lines):
        table[row["code"].strip().upper()] = Region(row["region"].strip())
    return table


class RegionMapper:
    """Map office (or country) codes to the six regions.

    The table is configuration data loaded from a ``code,region`` CSV. Codes
    missing from it map to ``RestOfWorld`` and are tallied in ``unknown``.
    """

    def __init__(self, table: dict[str, Region] | None = None):
        self.table = dict(_load_authority_table() if table is None else table)
        self.unknown: Counter[str] = Counter()

    @classmethod
    def from_csv(cls, path) -> "RegionMapper":
        return cls(_load_authority_table(path))

    @property
    def europe(self) -> frozenset[str]:
        return frozenset(c for c, r in self.table.items() if r is Region.EUROPE)

    def __call__(self, code: str) -> Region:
        if code is None or not code.strip():
            raise EmptyAuthority("authority code is empty")
        key = code.strip().upper()
        region = self.table.get(key)
        if region is None:
            self.unknown[key] += 1
            return Region.REST_OF_WORLD
        return region


_DEFAULT_MAPPER: RegionMapper | None = None


def default_mapper() -> RegionMapper:
    global _DEFAULT_MAPPER
    if _DEFAULT_MAPPER is None:
        _DEFAULT_MAPPER = RegionMapper()
    return _DEFAULT_MAPPER


def attribute_region(authority: str, mapper: RegionMapper | None = None) -> Region:
    """Region of a filing authority. Unknown codes go to ``RestOfWorld``.

    >>> attribute_region("KR").value
    'SouthKorea'
    >>> attribute_region("WO").value
    'RestOfWorld'
    """
    return (mapper or default_mapper())(authority)


# ---------------------------------------------------------------------------
# parsing


def _split_cpc(raw) -> tuple[str, ...]:
    if raw is None:
        return ()
    items = raw if isinstance(raw, list) else str(raw).split(";")
    return tuple(s for s in (str(c).strip() for c in items) if s)


def _count(value, name: str, row: int) -> int:
    if value is None or (isinstance(value, str) and not value.strip()):
        return 0
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise MalformedRow(row, f"{name} is not an integer: {value!r}") from None
    if n < 0:
        raise MalformedRow(row, f"{name} is negative: {n}")
    return n


def _record_from_fields(d: dict, row: int) -> PatentRecord:
    def text(name):
        v = d.get(name)
        return "" if v is None else str(v).strip()

    pid, fid, authority = text("patent_id"), text("family_id"), text("authority")
    if not pid:
        raise MalformedRow(row, "patent_id is empty")
    if not fid:
        raise MalformedRow(row, "family_id is empty")
    if not authority:
        raise MalformedRow(row, "authority is empty")
    try:
        year = int(text("application_year"))
    except ValueError:
        raise MalformedRow(row, f"application_year is not an integer: {d.get('application_year')!r}") from None
    if not 1900 <= year <= 2100:
        raise MalformedRow(row, f"application_year {year} outside 1900-2100")
    try:
        sector = Sector.parse(text("applicant_sector"))
    except ValueError as exc:
        raise MalformedRow(row, str(exc)) from None
    country = text("applicant_country").upper() or None
    return PatentRecord(
        patent_id=pid,
        family_id=fid,
        application_year=year,
        title=text("title"),
        abstract=text("abstract"),
        cpc_codes=_split_cpc(d.get("cpc_codes")),
        authority=authority.upper(),
        applicant_country=country,
        applicant_sector=sector,
        forward_citations=_count(d.get("forward_citations"), "forward_citations", row),
        backward_citations=_count(d.get("backward_citations"), "backward_citations", row),
    )


def _check_columns(columns: Sequence[str], extra_ok: Iterable[str] = ()) -> None:
    cols = [c.strip() for c in columns]
    allowed = set(SCHEMA) | set(extra_ok)
    unknown = [c for c in cols if c not in allowed]
    missing = [c for c in SCHEMA if c not in cols]
    if unknown or missing:
        parts = []
        if unknown:
            parts.append(f"unknown column(s) {unknown}")
        if missing:
            parts.append(f"missing column(s) {missing}")
        raise SchemaError("; ".join(parts) + f"; expected {','.join(SCHEMA)}")


def _text_stream(source) -> IO[str]:
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8", newline="")
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data, newline="")


def _iter_rows(source, fmt: str, extra_columns: Iterable[str] = ()):
    fmt = fmt.lower()
    with _text_stream(source) as fh:
        if fmt == "csv":
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            _check_columns(reader.fieldnames, extra_columns)
            width = len(reader.fieldnames)
            for i, row in enumerate(reader, start=1):
                if None in row or any(v is None for v in row.values()):
                    raise MalformedRow(i, f"expected {width} fields")
                yield i, row
        elif fmt == "jsonl":
            i = 0
            for line in fh:
                if not line.strip():
                    continue
                i += 1
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRow(i, f"invalid JSON: {exc.msg}") from None
                if not isinstance(obj, dict):
                    raise MalformedRow(i, "line is not a JSON object")
                _check_columns(list(obj), extra_columns)
                yield i, obj
        else:
            raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'jsonl'")


def parse_patent_file(source, format: str = "csv") -> list[PatentRecord]:
    """Parse a patent file into records.

    Parameters
    ----------
    source : bytes, path or binary/text stream
        UTF-8 encoded content.
    format : {"csv", "jsonl"}

    Raises
    ------
    SchemaError
        Header (or a JSON object) has unknown or missing columns.
    MalformedRow
        A row fails validation; ``row`` is the 1-based data row number.
    DuplicatePatentId
        A patent id appears twice.
    """
    records: list[PatentRecord] = []
    seen: dict[str, int] = {}
    for i, fields in _iter_rows(source, format):
        rec = _record_from_fields(fields, i)
        if rec.patent_id in seen:
            raise DuplicatePatentId(rec.patent_id, i)
        seen[rec.patent_id] = i
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# families


def _representative_key(r: PatentRecord):
    return (-r.forward_citations, -r.backward_citations, r.patent_id)


def cpc_sections(codes: Iterable[str]) -> frozenset[str]:
    return frozenset(c.strip()[0].upper() for c in codes if c.strip() and c.strip()[0].upper() in CPC_SECTIONS)


def deduplicate_families(records: Iterable[PatentRecord], mapper: RegionMapper | None = None) -> list[FamilyRecord]:
    """Collapse records to one family each, keyed on ``family_id``.

    The representative patent has the most forward citations, then the most
    backward citations, then the smallest ``patent_id``. The family year is
    the earliest member year; region, applicant and text come from the
    representative; CPC codes are pooled over members. Output is sorted by
    ``family_id``.
    """
    mapper = mapper or default_mapper()
    groups: dict[str, list[PatentRecord]] = {}
    for r in records:
        groups.setdefault(r.family_id, []).append(r)
    out = []
    for fid in sorted(groups):
        members = sorted(groups[fid], key=_representative_key)
        rep = members[0]
        codes = sorted({c for m in members for c in m.cpc_codes})
        out.append(
            FamilyRecord(
                family_id=fid,
                representative_patent_id=rep.patent_id,
                application_year=min(m.application_year for m in members),
                region=mapper(rep.authority),
                applicant_country=rep.applicant_country,
                applicant_region=mapper(rep.applicant_country) if rep.applicant_country else None,
                applicant_sector=rep.applicant_sector,
                cpc_codes=tuple(codes),
                cpc_sections=cpc_sections(codes),
                title=rep.title,
                abstract=rep.abstract,
                authority=rep.authority,
                forward_citations=rep.forward_citations,
                backward_citations=rep.backward_citations,
                members=tuple(sorted(m.patent_id for m in members)),
            )
        )
    return out


def family_as_record(f: FamilyRecord) -> PatentRecord:
    """View a family as a single patent record (its representative with pooled codes)."""
    return PatentRecord(
        patent_id=f.representative_patent_id,
        family_id=f.family_id,
        application_year=f.application_year,
        title=f.title,
        abstract=f.abstract,
        cpc_codes=f.cpc_codes,
        authority=f.authority,
        applicant_country=f.applicant_country,
        applicant_sector=f.applicant_sector,
        forward_citations=f.forward_citations,
        backward_citations=f.backward_citations,
    )


def apply_window(families: Iterable[FamilyRecord], first: int = 1980, last: int = 2018) -> list[FamilyRecord]:
    """Keep families with ``first <= application_year <= last`` (both inclusive)."""
    if first > last:
        raise InvalidWindow(f"window {first}-{last} is inverted")
    return [f for f in families if first <= f.application_year <= last]


# ---------------------------------------------------------------------------
# labelled family files

FAMILY_EXTRA = ("region", "applicant_region", "domain_label", "intelligent", "robot_types", "keyword_hits")


def write_families(families: Sequence[FamilyRecord]) -> str:
    """Serialise families as CSV: the input schema plus label columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*SCHEMA, *FAMILY_EXTRA])
    for f in families:
        label = getattr(f.domain_label, "value", f.domain_label)
        hits = ";".join(sorted({h.term for h in f.keyword_hits}))
        w.writerow(
            [
                f.representative_patent_id,
                f.family_id,
                f.application_year,
                f.title,
                f.abstract,
                ";".join(f.cpc_codes),
                f.authority,
                f.applicant_country or "",
                f.applicant_sector.value,
                f.forward_citations,
                f.backward_citations,
                f.region.value,
                f.applicant_region.value if f.applicant_region else "",
                label or "",
                "" if f.intelligent is None else int(f.intelligent),
                ";".join(sorted(f.robot_types)),
                hits,
            ]
        )
    return buf.getvalue()


def read_families(source) -> list[FamilyRecord]:
    """Read a file produced by :func:`write_families`."""
    out = []
    for i, row in _iter_rows(source, "csv", FAMILY_EXTRA):
        rec = _record_from_fields(row, i)
        codes = tuple(sorted(rec.cpc_codes))
        intelligent = row.get("intelligent", "")
        out.append(
            FamilyRecord(
                family_id=rec.family_id,
                representative_patent_id=rec.patent_id,
                application_year=rec.application_year,
                region=Region(row["region"]) if row.get("region") else attribute_region(rec.authority),
                applicant_country=rec.applicant_country,
                applicant_region=Region(row["applicant_region"]) if row.get("applicant_region") else None,
                applicant_sector=rec.applicant_sector,
                cpc_codes=codes,
                cpc_sections=cpc_sections(codes),
                title=rec.title,
                abstract=rec.abstract,
                authority=rec.authority,
                forward_citations=rec.forward_citations,
                backward_citations=rec.backward_citations,
                members=(rec.patent_id,),
                domain_label=row.get("domain_label") or None,
                intelligent=None if intelligent == "" else intelligent == "1",
                robot_types=frozenset(t for t in row.get("robot_types", "").split(";") if t),
            )
        )
    return out


def with_labels(f: FamilyRecord, **labels) -> FamilyRecord:
    return replace(f, **labels)


def write_patent_file(records: Iterable[PatentRecord]) -> str:
    """Serialise records in the documented CSV schema (inverse of :func:`parse_patent_file`)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCHEMA)
    for r in records:
        w.writerow(
            [
                r.patent_id,
                r.family_id,
                r.application_year,
                r.title,
                r.abstract,
                ";".join(r.cpc_codes),
                r.authority,
                r.applicant_country or "",
                r.applicant_sector.value,
                r.forward_citations,
                r.backward_citations,
            ]
        )
    return buf.getvalue()
