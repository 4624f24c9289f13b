"""Acceptance criteria, each run at its stated size and tolerance.

Every test prints one ``PASS/FAIL criterion N: ...`` line; the lines are
repeated in the terminal summary.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from patentdyn.classifier import CpcRuleSet, DomainLabel, KeywordDictionary, classify_families
from patentdyn.econ import (
    adf_test,
    bai_perron,
    critical_values,
    engle_granger,
    integration_order,
    kpss_test,
    ols,
    select_arima,
)
from patentdyn.econ.breaks import min_segment_length
from patentdyn.ingest import apply_window, deduplicate_families, parse_patent_file
from patentdyn.pipeline import RunConfig, demo_corpus_path, run_pipeline
from patentdyn.series import AnnualSeries, SeriesKey, build_counts, compute_shares
from patentdyn.simulate import SimSpec, generate

pytestmark = pytest.mark.acceptance

N = 300
RW = SimSpec("RandomWalk", n=N)
AR05 = SimSpec("AR", {"ar": [0.5]}, n=N)


def draws(spec: SimSpec, reps: int):
    for i in range(reps):
        yield generate(spec.with_seed(spec.seed + i)).values


def freq(flags) -> float:
    flags = list(flags)
    return sum(flags) / len(flags)


# ---------------------------------------------------------------------------
# unit roots


def test_criterion_01_adf_size(verdict):
    start = time.perf_counter()
    rate = freq(adf_test(y, "c").reject[0.05] for y in draws(RW, 1000))
    elapsed = time.perf_counter() - start
    ok = 0.03 <= rate <= 0.07 and elapsed < 60
    verdict(1, ok, f"ADF size {rate:.3f} in [0.03, 0.07], runtime {elapsed:.1f}s < 60s")


def test_criterion_02_adf_power(verdict):
    rate = freq(adf_test(y, "c").reject[0.05] for y in draws(AR05, 1000))
    verdict(2, rate >= 0.95, f"ADF power {rate:.3f} >= 0.95")


def test_criterion_03_kpss_polarity(verdict):
    rw = freq(kpss_test(y, "c", "auto").reject[0.05] for y in draws(RW, 1000))
    ar = freq(kpss_test(y, "c", "auto").reject[0.05] for y in draws(AR05, 1000))
    ok = rw >= 0.90 and ar <= 0.10
    verdict(3, ok, f"KPSS rejection {rw:.3f} >= 0.90 on random walks, {ar:.3f} <= 0.10 on AR(1)")


def test_criterion_04_integration_order(verdict):
    rw = freq(integration_order(y).d == 1 for y in draws(RW, 500))
    ar = freq(integration_order(y).d == 0 for y in draws(AR05, 500))
    ok = rw >= 0.90 and ar >= 0.90
    verdict(4, ok, f"d=1 for {rw:.3f} of random walks, d=0 for {ar:.3f} of AR(1); both >= 0.90")


# ---------------------------------------------------------------------------
# structural breaks


def _exact_ssr(y, breaks) -> Fraction:
    edges = [0, *breaks, len(y)]
    total = Fraction(0)
    for a, b in zip(edges[:-1], edges[1:]):
        seg = [Fraction(int(v)) for v in y[a:b]]
        mean = sum(seg) / len(seg)
        total += sum((v - mean) ** 2 for v in seg)
    return total


def _enumerate(y, m: int, h: int) -> Fraction:
    n = len(y)
    best = None
    for bks in itertools.combinations(range(h, n - h + 1), m):
        edges = [0, *bks, n]
        if all(b - a >= h for a, b in zip(edges[:-1], edges[1:])):
            s = _exact_ssr(y, bks)
            best = s if best is None or s < best else best
    return best


def test_criterion_05_bai_perron_oracle(verdict):
    rng = np.random.Generator(np.random.PCG64(20240501))
    agree = checked = 0
    while checked < 200:
        n = int(rng.integers(6, 21))
        m = int(rng.integers(0, 3))
        trim = float(rng.choice([0.1, 0.15, 0.2, 0.25]))
        h = min_segment_length(n, trim)
        if h < 2 or (m + 1) * h > n:
            continue
        # integer data makes the exhaustive SSR exact
        y = rng.integers(-9, 10, n).astype(float)
        res = bai_perron(y, m, trim)
        checked += 1
        agree += all(_exact_ssr(y, res.breaks_by_m[k]) == _enumerate(y, k, h) for k in range(m + 1))
    verdict(5, agree == checked, f"DP optimum equals exhaustive minimum on {agree}/{checked} fixtures")


def test_criterion_06_bai_perron_recovery(verdict):
    spec = SimSpec("MeanBreak", {"means": [0.0, 3.0], "breaks": [100]}, n=200)
    hits = 0
    for y in draws(spec, 500):
        res = bai_perron(y)
        hits += res.n_breaks == 1 and abs(res.breaks[0] - 100) <= 2
    rate = hits / 500
    verdict(6, rate >= 0.95, f"one break within +-2 of t=100 in {rate:.3f} of seeds (>= 0.95)")


# ---------------------------------------------------------------------------
# cointegration and ARIMA


def test_criterion_07_engle_granger(verdict):
    pair = SimSpec("CointegratedPair", {"a": 1.0, "b": 2.0, "ar": [0.3]}, n=150)
    power = freq(engle_granger(y.values, x.values).reject[0.05] for x, y in (generate(pair.with_seed(i)) for i in range(500)))
    walk = SimSpec("RandomWalk", n=150)
    size = freq(
        engle_granger(generate(walk.with_seed(2 * i)).values, generate(walk.with_seed(2 * i + 1)).values).reject[0.05]
        for i in range(500)
    )
    ok = power >= 0.80 and 0.02 <= size <= 0.08
    verdict(7, ok, f"EG power {power:.3f} >= 0.80, size {size:.3f} in [0.02, 0.08]")


def test_criterion_08_arima_selection(verdict):
    rate = freq(select_arima(y, criterion="bic").best.order == (0, 1, 0) for y in draws(RW, 500))
    verdict(8, rate >= 0.80, f"BIC selects ARIMA(0,1,0) for {rate:.3f} of integrated white noise (>= 0.80)")


# ---------------------------------------------------------------------------
# OLS and critical values


def _normal_equations(X, y) -> list[Fraction]:
    Xf = [[Fraction(float(v)) for v in row] for row in X]
    yf = [Fraction(float(v)) for v in y]
    k = len(Xf[0])
    A = [[sum(r[i] * r[j] for r in Xf) for j in range(k)] + [sum(r[i] * t for r, t in zip(Xf, yf))] for i in range(k)]
    for c in range(k):
        piv = next(r for r in range(c, k) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        for r in range(k):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [A[i][k] / A[i][i] for i in range(k)]


def test_criterion_09_ols_oracle(verdict):
    rng = np.random.Generator(np.random.PCG64(7))
    worst_rel = worst_orth = 0.0
    for _ in range(100):
        n, k = int(rng.integers(10, 60)), int(rng.integers(1, 6))
        X = np.column_stack([np.ones(n), rng.standard_normal((n, k - 1))]) if k > 1 else np.ones((n, 1))
        y = X @ rng.normal(0, 3, k) + rng.standard_normal(n)
        fit = ols(y, X)
        exact = np.array([float(b) for b in _normal_equations(X, y)])
        worst_rel = max(worst_rel, float(np.max(np.abs(fit.params - exact) / np.maximum(np.abs(exact), 1e-300))))
        worst_orth = max(worst_orth, float(np.max(np.abs(X.T @ fit.resid))))
    ok = worst_rel <= 1e-10 and worst_orth < 1e-8
    verdict(9, ok, f"max relative error {worst_rel:.1e} <= 1e-10, max |X'e| {worst_orth:.1e} < 1e-8")


# asymptotic values from MacKinnon's published response surfaces and the KPSS tables
PUBLISHED = [
    ("adf", "n", 1, (-2.5658, -1.9393, -1.6156)),
    ("adf", "c", 1, (-3.4336, -2.8621, -2.5671)),
    ("adf", "ct", 1, (-3.9638, -3.4126, -3.1279)),
    ("eg", "c", 2, (-3.9001, -3.3377, -3.0462)),
    ("kpss", "c", 1, (0.739, 0.463, 0.347)),
    ("kpss", "ct", 1, (0.216, 0.146, 0.119)),
]
# Fuller's finite-sample table (constant)
FULLER = [(250, (-3.46, -2.88, -2.57)), (500, (-3.44, -2.87, -2.57))]


def test_criterion_10_critical_values(verdict):
    worst = 0.0
    for test, det, nv, ref in PUBLISHED:
        worst = max(worst, max(abs(a - b) for a, b in zip(critical_values(test, det, nv), ref)))
    for n, ref in FULLER:
        worst = max(worst, max(abs(a - b) for a, b in zip(critical_values("adf", "c", 1, n), ref)))
    verdict(10, worst <= 0.01, f"max deviation from published critical values {worst:.4f} <= 0.01")


# ---------------------------------------------------------------------------
# corpus, pipeline and shares


def _demo_families():
    return deduplicate_families(parse_patent_file(demo_corpus_path()))


def test_criterion_11_golden_corpus(verdict):
    text = resources.files("patentdyn.data").joinpath("demo_labels.csv").read_text()
    rows = csv.DictReader(io.StringIO("\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))))
    expected = {r["family_id"]: (r["domain_label"], r["intelligent"] == "1") for r in rows}
    fams = classify_families(_demo_families(), KeywordDictionary.baseline(), CpcRuleSet.baseline())
    got = {f.family_id: (f.domain_label.value, f.intelligent) for f in fams}
    agree = sum(got.get(k) == v for k, v in expected.items())
    exclusive = all(isinstance(f.domain_label, DomainLabel) for f in fams)
    sizes = sum(sum(f.domain_label is d for f in fams) for d in DomainLabel)
    robots_only = all(f.domain_label in (DomainLabel.AI_ENHANCED_ROBOT, DomainLabel.TRADITIONAL_ROBOT) or not f.intelligent for f in fams)
    ok = agree == len(expected) == len(got) and exclusive and sizes == len(fams) and robots_only
    verdict(11, ok, f"{agree}/{len(expected)} labels agree; partition covers {sizes}/{len(fams)} families")


def test_criterion_12_pipeline_determinism(verdict, tmp_path):
    outs = []
    for name in ("a", "b"):
        run_pipeline(RunConfig(input=str(demo_corpus_path()), out=str(tmp_path / name)))
        files = sorted(p.relative_to(tmp_path / name) for p in (tmp_path / name).rglob("*") if p.is_file())
        outs.append({rel: (tmp_path / name / rel).read_bytes() for rel in files})
    reports = sum(1 for rel in outs[0] if rel.parts[0] == "reports")
    ok = outs[0] == outs[1] and reports > 0 and any(rel.name == "manifest.json" for rel in outs[0])
    verdict(12, ok, f"{len(outs[0])} files ({reports} report files and the manifest) byte-identical across runs")


def _share_sums(tables) -> float:
    worst = 0.0
    for t in tables:
        if not t.zero_total:
            worst = max(worst, abs(math.fsum(t.shares.values()) - 1))
    return worst


def test_criterion_13_share_normalisation(verdict):
    fams = apply_window(classify_families(_demo_families(), KeywordDictionary.baseline(), CpcRuleSet.baseline()))
    robots = [f for f in fams if f.domain_label in (DomainLabel.TRADITIONAL_ROBOT, DomainLabel.AI_ENHANCED_ROBOT)]
    levels = {"domain": ["TraditionalRobot", "AIEnhancedRobot"]}
    worst = max(
        _share_sums(compute_shares(build_counts(fams, ("region",)))),
        _share_sums(compute_shares(build_counts(robots, ("domain", "region"), levels=levels), technology_split=True)),
    )
    rng = np.random.Generator(np.random.PCG64(13))
    for _ in range(100):
        groups, years = int(rng.integers(1, 9)), int(rng.integers(1, 40))
        counts = rng.integers(0, 10_000, (groups, years)) * (rng.random((groups, years)) < 0.7)
        series = [
            AnnualSeries(SeriesKey(None, f"g{g}", "authority"), np.arange(2000, 2000 + years), row.astype(float), row == 0, "count")
            for g, row in enumerate(counts)
        ]
        worst = max(worst, _share_sums(compute_shares(series)))
    verdict(13, worst <= 1e-12, f"largest |sum of shares - 1| is {worst:.1e} <= 1e-12")
