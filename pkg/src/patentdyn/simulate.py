"""Seeded ground-truth processes and a Monte Carlo harness for size and power checks.

All noise is Gaussian, drawn from NumPy's PCG64 bit generator seeded with the
spec's ``seed``; replication ``i`` of a Monte Carlo run uses ``seed + i``.
Stationary AR/ARMA components discard 100 burn-in draws.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import lfilter

from patentdyn.econ.arima import is_stationary
from patentdyn.econ.critical import LEVELS
from patentdyn.exceptions import InvalidSpec, ReplicationError
from patentdyn.series import AnnualSeries, SeriesKey

__all__ = ["KINDS", "BURN_IN", "SimSpec", "generate", "MonteCarloResult", "monte_carlo", "synthetic_corpus"]

BURN_IN = 100

# kind -> allowed parameters with defaults
KINDS: dict[str, dict] = {
    "RandomWalk": {"drift": 0.0},
    "AR": {"ar": [], "mean": 0.0},
    "ARMA": {"ar": [], "ma": [], "mean": 0.0},
    "IntegratedARMA": {"ar": [], "ma": [], "d": 1, "drift": 0.0},
    "CointegratedPair": {"a": 0.0, "b": 1.0, "ar": [], "drift": 0.0},
    "MeanBreak": {"means": [0.0], "breaks": []},
}


@dataclass(frozen=True)
class SimSpec:
    """Description of a simulated process.

    Parameters
    ----------
    kind : str
        One of ``RandomWalk``, ``AR``, ``ARMA``, ``IntegratedARMA``,
        ``CointegratedPair`` or ``MeanBreak``.
    params : dict
        Kind-specific parameters (see ``KINDS`` for names and defaults).
        ``ar`` and ``ma`` are coefficient lists in the convention
        ``x_t = sum ar_i x_{t-i} + e_t + sum ma_j e_{t-j}``. ``breaks`` are
        the first indices of each new regime.
    n : int
        Series length, at least 10.
    seed : int
    noise_sd : float
        Innovation standard deviation, positive.
    start_year : int
        Year label of the first observation.
    """

    kind: str
    params: dict = field(default_factory=dict)
    n: int = 300
    seed: int = 0
    noise_sd: float = 1.0
    start_year: int = 1

    def __post_init__(self):
        self.validate()

    def param(self, name):
        return self.params.get(name, KINDS[self.kind][name])

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise InvalidSpec(f"kind must be one of {sorted(KINDS)}, got {self.kind!r}")
        unknown = set(self.params) - set(KINDS[self.kind])
        if unknown:
            raise InvalidSpec(f"unknown parameter(s) {sorted(unknown)} for {self.kind}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 10:
            raise InvalidSpec(f"n must be an integer >= 10, got {self.n!r}")
        if not (self.noise_sd > 0 and math.isfinite(self.noise_sd)):
            raise InvalidSpec(f"noise_sd must be positive, got {self.noise_sd!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidSpec(f"seed must be a nonnegative integer, got {self.seed!r}")
        if "ar" in KINDS[self.kind] and not is_stationary(self.param("ar")):
            raise InvalidSpec(f"ar coefficients {list(self.param('ar'))} are outside the stationarity region")
        if "ma" in KINDS[self.kind] and not is_stationary([-c for c in self.param("ma")]):
            raise InvalidSpec(f"ma coefficients {list(self.param('ma'))} are outside the invertibility region")
        if self.kind == "IntegratedARMA" and self.param("d") not in (0, 1, 2, 3):
            raise InvalidSpec("d must lie in 0..3")
        if self.kind == "MeanBreak":
            means, breaks = list(self.param("means")), list(self.param("breaks"))
            if len(means) != len(breaks) + 1:
                raise InvalidSpec("MeanBreak needs one more mean than breaks")
            edges = [0, *breaks, self.n]
            if any(b <= a for a, b in zip(edges[:-1], edges[1:])):
                raise InvalidSpec("breaks must be strictly increasing inside (0, n)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {k: (list(v) if isinstance(v, (list, tuple, np.ndarray)) else v) for k, v in self.params.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimSpec":
        known = {"kind", "params", "n", "seed", "noise_sd", "start_year"}
        extra = set(d) - known
        if extra:
            raise InvalidSpec(f"unknown spec field(s) {sorted(extra)}")
        if "kind" not in d:
            raise InvalidSpec("spec needs a 'kind'")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "SimSpec":
        return cls.from_dict(json.loads(text))

    def with_seed(self, seed: int) -> "SimSpec":
        return SimSpec(self.kind, self.params, self.n, seed, self.noise_sd, self.start_year)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _arma(rng, n: int, ar, ma, sd: float) -> np.ndarray:
    """Stationary zero-mean ARMA path of length ``n`` after ``BURN_IN`` discarded draws."""
    e = rng.standard_normal(n + BURN_IN) * sd
    x = lfilter(np.r_[1.0, np.asarray(ma, float)], np.r_[1.0, -np.asarray(ar, float)], e)
    return x[BURN_IN:]


def _series(spec: SimSpec, values, name: str, meta: dict | None = None) -> AnnualSeries:
    years = np.arange(spec.start_year, spec.start_year + spec.n)
    m = {"spec": spec.to_dict()}
    m.update(meta or {})
    return AnnualSeries(
        SeriesKey(domain=name), years, np.asarray(values, float), np.zeros(spec.n, bool), "level", m
    )


def generate(spec: SimSpec):
    """Draw one realisation of ``spec``.

    Returns an AnnualSeries, or for ``CointegratedPair`` the tuple ``(X, Y)``
    with ``X`` a random walk and ``Y = a + b X + u``, ``u`` a stationary AR
    error. ``MeanBreak`` stores ``breaks`` and ``means`` in ``meta``.
    """
    spec.validate()
    rng = _rng(spec.seed)
    n, sd = spec.n, spec.noise_sd
    kind = spec.kind
    if kind == "RandomWalk":
        x = np.cumsum(spec.param("drift") + sd * rng.standard_normal(n))
        return _series(spec, x, kind)
    if kind == "AR":
        return _series(spec, spec.param("mean") + _arma(rng, n, spec.param("ar"), [], sd), kind)
    if kind == "ARMA":
        x = spec.param("mean") + _arma(rng, n, spec.param("ar"), spec.param("ma"), sd)
        return _series(spec, x, kind)
    if kind == "IntegratedARMA":
        x = spec.param("drift") + _arma(rng, n, spec.param("ar"), spec.param("ma"), sd)
        for _ in range(spec.param("d")):
            x = np.cumsum(x)
        return _series(spec, x, kind)
    if kind == "CointegratedPair":
        x = np.cumsum(spec.param("drift") + sd * rng.standard_normal(n))
        u = _arma(rng, n, spec.param("ar"), [], sd)
        y = spec.param("a") + spec.param("b") * x + u
        return _series(spec, x, "X"), _series(spec, y, "Y")
    if kind == "MeanBreak":
        means, breaks = list(spec.param("means")), list(spec.param("breaks"))
        level = np.repeat(means, np.diff([0, *breaks, n]))
        y = level + sd * rng.standard_normal(n)
        return _series(spec, y, kind, {"breaks": breaks, "means": means})
    raise InvalidSpec(f"unknown kind {kind!r}")  # unreachable after validate


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class MonteCarloResult:
    """Rejection frequencies per level with binomial standard errors ``sqrt(p(1-p)/R)``."""

    statistic: str
    replications: int
    rejection: dict[float, float]
    std_error: dict[float, float]
    statistics: np.ndarray = field(repr=False)
    seed: int = 0

    def to_dict(self) -> dict:
        finite = self.statistics[np.isfinite(self.statistics)]
        return {
            "statistic": self.statistic,
            "replications": self.replications,
            "seed": self.seed,
            "rejection": {str(k): v for k, v in self.rejection.items()},
            "std_error": {str(k): v for k, v in self.std_error.items()},
            "statistic_mean": float(finite.mean()) if finite.size else None,
            "statistic_sd": float(finite.std(ddof=1)) if finite.size > 1 else None,
        }


def _named_statistic(name: str, options: dict) -> Callable:
    from patentdyn.econ import adf_test, bai_perron, engle_granger, kpss_test

    name = name.lower()
    if name == "adf":
        return lambda s: adf_test(s.values, **options)
    if name == "kpss":
        return lambda s: kpss_test(s.values, **options)
    if name in ("eg", "engle_granger", "coint"):
        return lambda pair: engle_granger(pair[1], pair[0], **options)
    if name in ("breaks", "bai_perron"):
        return lambda s: bai_perron(s.values, **options)
    raise ValueError(f"unknown statistic {name!r}; use adf, kpss, eg or breaks")


def _outcome(result, levels) -> tuple[float, dict[float, bool]]:
    """Extract (statistic, reject-by-level) from a test result."""
    if hasattr(result, "n_breaks"):
        # for break searches a "rejection" is selecting at least one break
        return float(result.n_breaks), {a: result.n_breaks > 0 for a in levels}
    if hasattr(result, "reject"):
        return float(result.statistic), {a: bool(result.reject[a]) for a in levels}
    if isinstance(result, tuple) and len(result) == 2:
        stat, rej = result
        return float(stat), {a: bool(rej[a]) for a in levels}
    raise TypeError("statistic must return a test result or a (statistic, reject-dict) pair")


def monte_carlo(
    spec: SimSpec,
    replications: int,
    statistic: str | Callable = "adf",
    levels=LEVELS,
    **options,
) -> MonteCarloResult:
    """Run a test on ``replications`` independent draws of ``spec``.

    Parameters
    ----------
    statistic : str or callable
        ``"adf"``, ``"kpss"``, ``"eg"`` (for ``CointegratedPair``; ``Y`` is
        regressed on ``X``) or ``"breaks"``; extra keyword arguments go to the
        test. A callable receives the generated data and returns a result
        with ``statistic`` and ``reject`` or a ``(statistic, reject)`` pair.

    Raises
    ------
    ReplicationError
        Wrapping any failure, with the replication index and seed.

    Notes
    -----
    Fewer than 100 replications are allowed but warned about, since the
    binomial standard error is then too wide to judge size or power.
    """
    if replications < 1:
        raise ValueError("replications must be positive")
    if replications < 100:
        warnings.warn(f"only {replications} replications; rejection frequencies are very noisy", stacklevel=2)
    fn = _named_statistic(statistic, options) if isinstance(statistic, str) else statistic
    name = statistic if isinstance(statistic, str) else getattr(statistic, "__name__", "custom")
    stats = np.empty(replications)
    hits = {a: 0 for a in levels}
    for i in range(replications):
        seed = spec.seed + i
        try:
            data = generate(spec.with_seed(seed))
            stat, rej = _outcome(fn(data), levels)
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise ReplicationError(i, seed, exc) from exc
        stats[i] = stat
        for a in levels:
            hits[a] += rej[a]
    freq = {a: hits[a] / replications for a in levels}
    se = {a: math.sqrt(freq[a] * (1 - freq[a]) / replications) for a in levels}
    return MonteCarloResult(name, replications, freq, se, stats, spec.seed)


# ---------------------------------------------------------------------------
# synthetic patent corpus

_TEMPLATES = {
    "CoreAI": [
        ("Neural network training method", "A neural network is trained on labelled images. The model improves image recognition accuracy.", "G06N3/08"),
        ("Speech recognition system", "Speech recognition uses a probabilistic model of acoustic units.", "G10L15/00"),
        ("Machine learning based data analysis", "A machine learning model predicts component failure from sensor logs.", "G06N20/00"),
    ],
    "TraditionalRobot": [
        ("Industrial robot gripper", "An industrial robot carries a gripper with two parallel fingers. The gripper improves torque transfer.", "B25J15/00"),
        ("Robot arm joint", "A joint for an industrial robot arm with a harmonic reducer.", "B25J9/10"),
        ("Welding robot system", "A robot system for spot welding car bodies with a fixed program.", "B25J11/00"),
    ],
    "AIEnhancedRobot": [
        ("Industrial robot with learning controller", "An industrial robot uses machine learning to adapt grasp positions.", "B25J9/161"),
        ("Service robot navigation", "A service robot builds a map with computer vision and plans paths.", "B25J11/00"),
        ("Robot system control", "A robot system applies control theory and a cognitive system to assembly tasks.", "B25J9/16"),
    ],
    "Other": [
        ("Bicycle frame", "A lightweight frame for a bicycle made of aluminium tubes.", "B62K19/02"),
        ("Coffee machine valve", "A valve for a coffee machine prevents dripping.", "A47J31/46"),
    ],
}

_AUTHORITIES = {"US": "US", "China": "CN", "Japan": "JP", "SouthKorea": "KR", "Europe": "DE", "RestOfWorld": "WO"}
_APPLICANTS = {"US": "US", "China": "CN", "Japan": "JP", "SouthKorea": "KR", "Europe": "FR", "RestOfWorld": "CA"}


def synthetic_corpus(
    seed: int = 0,
    first: int = 1980,
    last: int = 2018,
    base_rate: float = 3.0,
    growth: dict[str, float] | None = None,
    members: int = 2,
):
    """Simulated patent records with known domain labels.

    Yearly family counts per (domain, region) are Poisson with an
    exponentially growing mean. Each family has up to ``members`` filings at
    different offices; the first carries the most forward citations so it is
    the representative. Titles and abstracts come from fixed templates whose
    expected label under the baseline rules is the domain name.

    Returns
    -------
    records : list of PatentRecord
    truth : dict
        ``family_id -> domain label``.
    """
    from patentdyn.ingest import PatentRecord, Sector

    rng = _rng(seed)
    growth = growth or {"CoreAI": 0.10, "TraditionalRobot": 0.05, "AIEnhancedRobot": 0.12, "Other": 0.02}
    region_weight = {"US": 1.0, "China": 0.8, "Japan": 0.9, "SouthKorea": 0.5, "Europe": 0.8, "RestOfWorld": 0.3}
    offices = list(_AUTHORITIES.values())
    records, truth = [], {}
    fam = 0
    for year in range(first, last + 1):
        t = year - first
        for domain, templates in _TEMPLATES.items():
            for region, w in region_weight.items():
                lam = base_rate * w * math.exp(growth[domain] * t) / math.exp(growth[domain] * (last - first) / 2)
                k = int(rng.poisson(lam))
                for _ in range(k):
                    fam += 1
                    fid = f"F{fam:06d}"
                    title, abstract, cpc = templates[int(rng.integers(len(templates)))]
                    truth[fid] = domain
                    fwd = int(rng.integers(5, 20))
                    n_mem = int(rng.integers(1, members + 1))
                    for j in range(n_mem):
                        auth = _AUTHORITIES[region] if j == 0 else offices[int(rng.integers(len(offices)))]
                        records.append(
                            PatentRecord(
                                patent_id=f"P{fam:06d}{j}",
                                family_id=fid,
                                application_year=min(last, year + j),
                                title=title,
                                abstract=abstract,
                                cpc_codes=(cpc,),
                                authority=auth,
                                applicant_country=_APPLICANTS[region],
                                applicant_sector=Sector.COMPANY,
                                forward_citations=fwd if j == 0 else int(rng.integers(0, fwd)),
                                backward_citations=int(rng.integers(0, 10)),
                            )
                        )
    return records, truth
