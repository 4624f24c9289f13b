from __future__ import annotations

import json
from dataclasses import replace

import pytest
from conftest import make_record
from hypothesis import given, settings
from hypothesis import strategies as st

from patentdyn.exceptions import (
    DuplicatePatentId,
    EmptyAuthority,
    InvalidWindow,
    MalformedRow,
    SchemaError,
)
from patentdyn.ingest import (
    SCHEMA,
    Region,
    RegionMapper,
    Sector,
    apply_window,
    attribute_region,
    deduplicate_families,
    family_as_record,
    parse_patent_file,
    read_families,
    write_families,
    write_patent_file,
)

ROW = 'P1,F1,2015,"robot arm","an industrial robot...",B25J9/16,CN,CN,Company,3,7'


def test_parse_direct_field_mapping(csv_bytes):
    (rec,) = parse_patent_file(csv_bytes(ROW))
    assert rec.patent_id == "P1"
    assert rec.family_id == "F1"
    assert rec.application_year == 2015
    assert rec.title == "robot arm"
    assert rec.abstract == "an industrial robot..."
    assert rec.cpc_codes == ("B25J9/16",)
    assert rec.authority == "CN"
    assert rec.applicant_country == "CN"
    assert rec.applicant_sector is Sector.COMPANY
    assert (rec.forward_citations, rec.backward_citations) == (3, 7)


def test_parse_empty_applicant_country_is_absent(csv_bytes):
    (rec,) = parse_patent_file(csv_bytes('P1,F1,2015,t,a,G06N3/02,US,,Unknown,0,0'))
    assert rec.applicant_country is None


def test_parse_duplicate_patent_id(csv_bytes):
    with pytest.raises(DuplicatePatentId):
        parse_patent_file(csv_bytes(ROW, ROW.replace("F1", "F2")))


def test_parse_multiple_cpc_codes(csv_bytes):
    (rec,) = parse_patent_file(csv_bytes('P1,F1,2015,t,a,"G06N3/02; B25J9/16",US,US,Company,0,0'))
    assert rec.cpc_codes == ("G06N3/02", "B25J9/16")


def test_parse_empty_cpc_is_unclassifiable(csv_bytes):
    (rec,) = parse_patent_file(csv_bytes("P1,F1,2015,t,a,,US,US,Company,0,0"))
    assert rec.unclassifiable


def test_unknown_column_lists_schema():
    data = ("extra," + ",".join(SCHEMA) + "\n").encode()
    with pytest.raises(SchemaError) as exc:
        parse_patent_file(data)
    assert "extra" in str(exc.value)
    assert ",".join(SCHEMA) in str(exc.value)


def test_missing_column_is_schema_error():
    data = (",".join(SCHEMA[:-1]) + "\n").encode()
    with pytest.raises(SchemaError, match="backward_citations"):
        parse_patent_file(data)


@pytest.mark.parametrize(
    "bad_row, fragment",
    [
        ("P2,F2,notayear,t,a,B25J,US,US,Company,0,0", "application_year"),
        ("P2,F2,1800,t,a,B25J,US,US,Company,0,0", "1900-2100"),
        ("P2,F2,2015,t,a,B25J,US,US,Company,-1,0", "negative"),
        ("P2,F2,2015,t,a,B25J,US,US,Pirate,0,0", "Pirate"),
        ("P2,F2,2015,t,a,B25J,US,US,Company,0", "fields"),
        ("P2,F2,2015,t,a,B25J,,US,Company,0,0", "authority"),
    ],
)
def test_malformed_row_reports_row_number(csv_bytes, bad_row, fragment):
    with pytest.raises(MalformedRow) as exc:
        parse_patent_file(csv_bytes(ROW, bad_row))
    assert exc.value.row == 2
    assert fragment in str(exc.value)


def test_parse_jsonl_mirror(csv_bytes):
    obj = dict(zip(SCHEMA, ["P1", "F1", 2015, "robot arm", "x", ["B25J9/16"], "cn", "CN", "Company", 3, 7]))
    (rec,) = parse_patent_file((json.dumps(obj) + "\n\n").encode(), "jsonl")
    assert rec == parse_patent_file(csv_bytes('P1,F1,2015,robot arm,x,B25J9/16,CN,CN,Company,3,7'))[0]


def test_parse_path_and_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_bytes(b"")
    assert parse_patent_file(p) == []


def test_write_patent_file_round_trip(csv_bytes):
    recs = parse_patent_file(csv_bytes(ROW, 'P2,F1,2016,"a, quoted",,,WO,,Unknown,0,0'))
    assert parse_patent_file(write_patent_file(recs).encode()) == recs


# ---------------------------------------------------------------------------
# families


@pytest.mark.parametrize(
    "members, expected",
    [
        ([("P1", 3, 0), ("P2", 7, 0)], "P2"),
        ([("P1", 0, 2), ("P2", 0, 9)], "P2"),
        ([("P1", 5, 1), ("P2", 5, 1)], "P1"),
        ([("P9", 5, 1), ("P2", 5, 1), ("P5", 5, 1)], "P2"),
        ([("P1", 2, 50), ("P2", 3, 0)], "P2"),
    ],
)
def test_representative_selection(members, expected):
    recs = [make_record(patent_id=p, fwd=f, bwd=b) for p, f, b in members]
    (fam,) = deduplicate_families(recs)
    assert fam.representative_patent_id == expected


def test_family_year_is_earliest_and_cpc_union():
    recs = [
        make_record("P1", year=2012, cpc=("G06N3/02",), fwd=9, authority="US"),
        make_record("P2", year=2010, cpc=("B25J9/16",), authority="JP"),
    ]
    (fam,) = deduplicate_families(recs)
    assert fam.application_year == 2010
    assert set(fam.cpc_codes) == {"G06N3/02", "B25J9/16"}
    assert fam.cpc_sections == {"G", "B"}
    assert fam.region is Region.US  # from the representative
    assert fam.members == ("P1", "P2")


def test_empty_input_gives_empty_output():
    assert deduplicate_families([]) == []


family_ids = st.sampled_from([f"F{i}" for i in range(6)])
record_specs = st.lists(
    st.tuples(family_ids, st.integers(1980, 2018), st.integers(0, 5), st.integers(0, 5)), max_size=25
)


@settings(max_examples=60, deadline=None)
@given(record_specs)
def test_one_family_per_distinct_id(specs):
    recs = [make_record(f"P{i:03d}", fid, y, fwd=f, bwd=b) for i, (fid, y, f, b) in enumerate(specs)]
    fams = deduplicate_families(recs)
    assert len(fams) == len({r.family_id for r in recs})
    assert [f.family_id for f in fams] == sorted({r.family_id for r in recs})


@settings(max_examples=60, deadline=None)
@given(record_specs)
def test_deduplication_is_idempotent(specs):
    recs = [make_record(f"P{i:03d}", fid, y, fwd=f, bwd=b) for i, (fid, y, f, b) in enumerate(specs)]
    once = deduplicate_families(recs)
    twice = deduplicate_families([family_as_record(f) for f in once])
    # the member list records provenance, so a re-run sees only the representative
    assert [replace(f, members=()) for f in twice] == [replace(f, members=()) for f in once]
    assert all(f.members == (f.representative_patent_id,) for f in twice)


@settings(max_examples=40, deadline=None)
@given(record_specs)
def test_representative_is_order_independent(specs):
    recs = [make_record(f"P{i:03d}", fid, y, fwd=f, bwd=b) for i, (fid, y, f, b) in enumerate(specs)]
    assert deduplicate_families(recs) == deduplicate_families(list(reversed(recs)))


# ---------------------------------------------------------------------------
# regions


@pytest.mark.parametrize(
    "code, region",
    [
        ("US", Region.US),
        ("CN", Region.CHINA),
        ("JP", Region.JAPAN),
        ("KR", Region.SOUTH_KOREA),
        ("EP", Region.EUROPE),
        ("DE", Region.EUROPE),
        ("fr", Region.EUROPE),
        ("WO", Region.REST_OF_WORLD),
        ("EA", Region.REST_OF_WORLD),
        ("AP", Region.REST_OF_WORLD),
        ("OA", Region.REST_OF_WORLD),
        ("EM", Region.REST_OF_WORLD),
        ("AU", Region.REST_OF_WORLD),
    ],
)
def test_attribute_region(code, region):
    assert attribute_region(code) is region


def test_empty_authority_raises():
    with pytest.raises(EmptyAuthority):
        attribute_region("")


def test_unknown_authorities_are_tallied():
    m = RegionMapper()
    assert m("ZZ") is Region.REST_OF_WORLD
    assert m("zz") is Region.REST_OF_WORLD
    assert m("US") is Region.US
    assert m.unknown == {"ZZ": 2}


def test_europe_set_is_configuration(tmp_path):
    p = tmp_path / "auth.csv"
    p.write_text("# custom\ncode,region\nUS,US\nGB,RestOfWorld\nCH,Europe\n")
    m = RegionMapper.from_csv(p)
    assert m("GB") is Region.REST_OF_WORLD
    assert m("CH") is Region.EUROPE
    assert m.europe == {"CH"}


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=1, max_size=6).filter(lambda s: s.strip()))
def test_attribute_region_is_total_and_pure(code):
    assert attribute_region(code) == attribute_region(code)
    assert isinstance(attribute_region(code), Region)


# ---------------------------------------------------------------------------
# window


def _fam(year):
    return deduplicate_families([make_record("P1", "F1", year)])[0]


@pytest.mark.parametrize("year, kept", [(2019, False), (1980, True), (2018, True), (1979, False), (2000, True)])
def test_apply_window(year, kept):
    assert (len(apply_window([_fam(year)])) == 1) is kept


def test_apply_window_empty_and_inverted():
    assert apply_window([]) == []
    with pytest.raises(InvalidWindow):
        apply_window([], 2018, 1980)


def test_family_file_round_trip():
    recs = [make_record("P1", "F1", 2011, cpc=("G06N3/02", "B25J9/16"), country=None), make_record("P2", "F2")]
    fams = deduplicate_families(recs)
    back = read_families(write_families(fams).encode())
    for a, b in zip(fams, back):
        assert (a.family_id, a.application_year, a.region, a.cpc_sections, a.applicant_country) == (
            b.family_id,
            b.application_year,
            b.region,
            b.cpc_sections,
            b.applicant_country,
        )
