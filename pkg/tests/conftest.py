from __future__ import annotations

import pytest

from patentdyn.ingest import PatentRecord, Sector

HEADER = (
    "patent_id,family_id,application_year,title,abstract,cpc_codes,authority,"
    "applicant_country,applicant_sector,forward_citations,backward_citations\n"
)


def make_record(
    patent_id="P1",
    family_id="F1",
    year=2015,
    title="",
    abstract="",
    cpc=("B25J9/16",),
    authority="CN",
    country="CN",
    sector=Sector.COMPANY,
    fwd=0,
    bwd=0,
) -> PatentRecord:
    return PatentRecord(
        patent_id=patent_id,
        family_id=family_id,
        application_year=year,
        title=title,
        abstract=abstract,
        cpc_codes=tuple(cpc),
        authority=authority,
        applicant_country=country,
        applicant_sector=sector,
        forward_citations=fwd,
        backward_citations=bwd,
    )


@pytest.fixture
def record_factory():
    return make_record


@pytest.fixture
def csv_bytes():
    def build(*rows: str) -> bytes:
        return (HEADER + "".join(r + "\n" for r in rows)).encode("utf-8")

    return build


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
