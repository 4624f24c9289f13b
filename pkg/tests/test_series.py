from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from conftest import make_record
from hypothesis import given, settings
from hypothesis import strategies as st

from patentdyn.classifier import CpcRuleSet, DomainLabel, KeywordDictionary, classify_families
from patentdyn.exceptions import NegativeValue, TooShort, WrongTransform, YearMismatch
from patentdyn.ingest import apply_window, deduplicate_families, parse_patent_file
from patentdyn.pipeline import demo_corpus_path
from patentdyn.series import (
    AnnualSeries,
    SeriesKey,
    build_counts,
    compute_shares,
    cumulate_stock,
    difference,
    log_transform,
    normalize,
    read_series,
    read_series_dir,
    write_series,
)


def counts(values, first=2000, key=None):
    v = np.asarray(values, float)
    return AnnualSeries(key or SeriesKey("CoreAI"), np.arange(first, first + v.size), v, v == 0, "count")


def families(years, cpc=("G06N3/02",), authority="US"):
    recs = [make_record(f"P{i}", f"F{i}", y, cpc=cpc, authority=authority) for i, y in enumerate(years)]
    return deduplicate_families(recs)


# ---------------------------------------------------------------------------
# AnnualSeries invariants


def test_series_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        AnnualSeries(SeriesKey(), [2000, 2001], [1.0], [False], "count")
    with pytest.raises(ValueError):
        AnnualSeries(SeriesKey(), [2000, 2002], [1.0, 2.0], [False, False], "count")
    with pytest.raises(NegativeValue):
        AnnualSeries(SeriesKey(), [2000], [-1.0], [False], "count")
    with pytest.raises(ValueError):
        AnnualSeries(SeriesKey(), [2000, 2001], [2.0, 1.0], [False, False], "stock")
    with pytest.raises(ValueError):
        AnnualSeries(SeriesKey(), [2000], [1.5], [False], "share")


# ---------------------------------------------------------------------------
# build_counts


def test_build_counts_direct():
    (s,) = build_counts(families([2010, 2010, 2012]), (), 2010, 2012)
    assert s.values.tolist() == [2, 0, 1]
    assert s.zero_mask.tolist() == [False, True, False]


def test_build_counts_empty_with_levels():
    (s,) = build_counts([], ("domain",), 2010, 2012, levels={"domain": ["CoreAI"]})
    assert s.values.tolist() == [0, 0, 0]
    assert s.zero_mask.all()


def test_build_counts_section_multicount():
    fams = families([2011], cpc=("G06N3/02", "H04L29/08"))
    by_section = {s.key.cpc_section: s.values.tolist() for s in build_counts(fams, ("section",), 2010, 2012)}
    assert by_section == {"G": [0, 1, 0], "H": [0, 1, 0]}


def test_build_counts_region_and_basis():
    fams = families([2010, 2011]) + [replace(f, family_id="X" + f.family_id) for f in families([2010], authority="KR")]
    out = build_counts(fams, ("region",), 2010, 2011)
    assert {s.key.geography: s.values.tolist() for s in out} == {"US": [1, 1], "SouthKorea": [1, 0]}
    assert {s.key.basis for s in out} == {"authority"}


def test_build_counts_applicant_skips_absent_country():
    fams = deduplicate_families([make_record("P1", "F1", 2010, country=None), make_record("P2", "F2", 2010, country="JP")])
    out = build_counts(fams, ("applicant",), 2010, 2010)
    assert [(s.key.geography, s.key.basis, s.values.tolist()) for s in out] == [("Japan", "applicant", [1])]


def test_build_counts_requires_window():
    with pytest.raises(ValueError, match="outside"):
        build_counts(families([2019]), (), 1980, 2018)


def test_build_counts_unknown_dimension():
    with pytest.raises(ValueError, match="unknown grouping"):
        build_counts([], ("planet",))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1990, 1999), max_size=40), st.lists(st.sampled_from(["US", "CN", "JP", "DE", "WO"]), min_size=40, max_size=40))
def test_partitioning_groupings_sum_to_family_count(years, auths):
    recs = [make_record(f"P{i}", f"F{i}", y, authority=auths[i]) for i, y in enumerate(years)]
    fams = deduplicate_families(recs)
    for group in [(), ("region",), ("domain",)]:
        fs = [replace(f, domain_label="CoreAI") for f in fams]
        total = sum(s.values.sum() for s in build_counts(fs, group, 1990, 1999))
        assert total == len(fams)


# ---------------------------------------------------------------------------
# transforms


@pytest.mark.parametrize("values, stock", [([2, 0, 1], [2, 2, 3]), ([0, 0, 0], [0, 0, 0]), ([5], [5])])
def test_cumulate_stock(values, stock):
    s = cumulate_stock(counts(values))
    assert s.values.tolist() == stock
    assert s.transform == "stock"


def test_cumulate_stock_wrong_transform():
    with pytest.raises(WrongTransform):
        cumulate_stock(cumulate_stock(counts([1, 2])))


def test_log1p():
    s = log_transform(counts([0, math.e - 1]), "log1p")
    np.testing.assert_allclose(s.values, [0, 1], atol=1e-15)


def test_dummy_zeros():
    s = log_transform(counts([0, 1, math.e]), "dummy_zeros")
    np.testing.assert_allclose(s.values, [0, 0, 1], atol=1e-15)
    assert s.zero_mask.tolist() == [True, False, False]
    assert s.transform == "log_count"
    assert log_transform(cumulate_stock(counts([1, 2])), "dummy_zeros").transform == "log_stock"


def test_log_negative():
    s = AnnualSeries(SeriesKey(), [2000], [-1.0], [False], "level")
    with pytest.raises(NegativeValue):
        log_transform(s)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=2, max_size=30))
def test_log1p_strictly_monotone(xs):
    xs = sorted(set(xs))
    if len(xs) < 2:
        return
    out = log_transform(counts(xs), "log1p").values
    assert np.all(np.diff(out) > 0)


@pytest.mark.parametrize("values, d, expected", [([1, 3, 6, 10], 1, [2, 3, 4]), ([1, 3, 6, 10], 2, [1, 1])])
def test_difference(values, d, expected):
    s = difference(counts(values), d)
    assert s.values.tolist() == expected
    assert s.years[0] == 2000 + d
    assert s.transform == f"diff({d})"


def test_difference_identity_and_too_short():
    s = counts([4, 5])
    assert difference(s, 0) is s
    with pytest.raises(TooShort):
        difference(counts([5]), 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=2, max_size=40))
def test_difference_inverts_stock(values):
    c = counts(values)
    d = difference(cumulate_stock(c), 1)
    assert d.values.tolist() == c.values[1:].tolist()


def test_normalize():
    s = normalize(counts([1, 0, 2]), counts([4, 0, 8]))
    np.testing.assert_allclose(s.values, [0.25, 0, 0.25])
    with pytest.raises(YearMismatch):
        normalize(counts([1]), counts([1], first=1999))


# ---------------------------------------------------------------------------
# shares


def test_shares_simple():
    ss = [counts([v], key=SeriesKey(None, g, "authority")) for g, v in [("A", 2), ("B", 3), ("C", 5)]]
    (t,) = compute_shares(ss)
    assert t.shares == pytest.approx({"A": 0.2, "B": 0.3, "C": 0.5}, abs=1e-15)


def test_shares_technology_split():
    def s(dom, geo, v):
        return counts([v], key=SeriesKey(dom, geo, "authority"))

    ss = [s("TraditionalRobot", "A", 1), s("AIEnhancedRobot", "A", 1), s("TraditionalRobot", "B", 2), s("AIEnhancedRobot", "B", 0)]
    (t,) = compute_shares(ss, technology_split=True)
    # oracle: each cell over the grand total 1 + 1 + 2 + 0 = 4
    assert t.shares == {"A:NOI": 0.25, "A:I": 0.25, "B:NOI": 0.5, "B:I": 0.0}
    assert t.technology_split


def test_shares_zero_total_flagged():
    (t,) = compute_shares([counts([0], key=SeriesKey(None, "A")), counts([0], key=SeriesKey(None, "B"))])
    assert t.zero_total
    assert set(t.shares.values()) == {0.0}


def test_shares_year_mismatch():
    with pytest.raises(YearMismatch):
        compute_shares([counts([1], key=SeriesKey(None, "A")), counts([1], 1999, SeriesKey(None, "B"))])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 10_000), min_size=5, max_size=5), min_size=1, max_size=8))
def test_shares_sum_to_one(matrix):
    ss = [counts(row, key=SeriesKey(None, f"g{i}")) for i, row in enumerate(matrix)]
    for t in compute_shares(ss):
        total = math.fsum(t.shares.values())
        assert (abs(total - 1) <= 1e-12) if not t.zero_total else total == 0


# ---------------------------------------------------------------------------
# I/O


def test_write_read_round_trip(tmp_path):
    s = log_transform(counts([0, 3, 7], key=SeriesKey("CoreAI", "US", "authority", "G")))
    p = write_series(s, tmp_path)
    assert p.name == "CoreAI__authority__US__G__log_count.csv"
    back = read_series(p)
    assert back.key == s.key
    assert back.transform == "log_count"
    assert back.values.tolist() == s.values.tolist()
    assert back.zero_mask.tolist() == [True, False, False]
    assert [x.key for x in read_series_dir(tmp_path)] == [s.key]


def test_read_plain_csv_without_sidecar(tmp_path):
    p = tmp_path / "mine.csv"
    p.write_text("year,value\n2000,1.5\n2001,0\n")
    s = read_series(p)
    assert s.key.domain == "mine"
    assert s.zero_mask.tolist() == [False, True]
    p.write_text("t,y\n1,2\n")
    with pytest.raises(ValueError):
        read_series(p)


def test_demo_corpus_shares_sum_to_one():
    fams = apply_window(
        classify_families(
            deduplicate_families(parse_patent_file(demo_corpus_path())),
            KeywordDictionary.baseline(),
            CpcRuleSet.baseline(),
        )
    )
    robots = [f for f in fams if f.domain_label in (DomainLabel.TRADITIONAL_ROBOT, DomainLabel.AI_ENHANCED_ROBOT)]
    ss = build_counts(robots, ("domain", "region"), levels={"domain": ["TraditionalRobot", "AIEnhancedRobot"]})
    for t in compute_shares(ss, technology_split=True):
        if not t.zero_total:
            assert abs(math.fsum(t.shares.values()) - 1) <= 1e-12
