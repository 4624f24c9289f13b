"""Dictionary- and CPC-based labelling of patent families into AI and robot domains.

Term patterns
-------------
Dictionary terms are lowercase phrases with a small query syntax:

* ``*`` or ``+`` after a stem matches any word continuation (``reinforc* learn*``),
* ``?`` matches zero or one character and ``#`` exactly one,
* an inner hyphen matches a hyphen or a space (``random-forest``); a trailing
  hyphen is literal (``ai-*`` matches ``ai-based``),
* ``nW`` between two words allows up to ``n`` intervening words in order and
  ``nD`` the same in either order, always within one sentence,
* ``(a OR b)`` groups alternatives.

Every term is anchored at word boundaries. Proximity windows approximate
patent-office query operators; they are not claimed to be equivalent.
"""

from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from patentdyn.exceptions import DuplicateEntry, NotARobot

__all__ = [
    "Group",
    "Tier",
    "Location",
    "DomainLabel",
    "RobotType",
    "KeywordEntry",
    "KeywordDictionary",
    "KeywordHit",
    "CpcRuleSet",
    "CpcMatch",
    "Classification",
    "compile_term",
    "normalize_text",
    "normalize_cpc",
    "match_cpc",
    "match_keywords",
    "record_hits",
    "classify_robot_type",
    "flag_intelligent",
    "classify_domain",
    "classify",
    "classify_families",
    "keyword_domain_histogram",
]


class Group(str, Enum):
    LEARNING_INTELLIGENCE = "LearningIntelligence"
    PERCEPTION_RECOGNITION = "PerceptionRecognition"
    DATA_CONNECTIVITY = "DataConnectivity"
    CONTROL_DECISION = "ControlDecision"
    ROBOTICS_AUTONOMY = "RoboticsAutonomy"
    OTHER_AI = "OtherAI"


class Tier(str, Enum):
    ROBOT_CORE = "RobotCore"
    AI_INTRINSIC = "AIIntrinsic"
    AI_BROAD = "AIBroad"


class Location(str, Enum):
    TITLE = "Title"
    ABSTRACT = "Abstract"


class DomainLabel(str, Enum):
    CORE_AI = "CoreAI"
    TRADITIONAL_ROBOT = "TraditionalRobot"
    AI_ENHANCED_ROBOT = "AIEnhancedRobot"
    OTHER = "Other"


class RobotType(str, Enum):
    INDUSTRIAL = "Industrial"
    SERVICE = "Service"
    SOCIAL = "Social"
    SYSTEM = "System"


ROBOT_CORE_TYPES = {
    "industrial robot": RobotType.INDUSTRIAL,
    "service robot": RobotType.SERVICE,
    "social robot": RobotType.SOCIAL,
    "robot system": RobotType.SYSTEM,
}

# ---------------------------------------------------------------------------
# pattern compiler

_WORD_CHARS = "a-z0-9"
_TOKEN = re.compile(r"\(|\)|[^\s()]+")
_PROX = re.compile(r"^(\d+)([wd])$")


def _word_regex(word: str) -> str:
    out = []
    for i, ch in enumerate(word):
        if ch in "*+":
            out.append(f"[{_WORD_CHARS}]*")
        elif ch == "$":
            # office truncation: ``machin$*`` behaves as ``machin*``
            if i + 1 < len(word) and word[i + 1] in "*+":
                continue
            out.append(f"[{_WORD_CHARS}]*")
        elif ch == "?":
            out.append(f"[{_WORD_CHARS}]?")
        elif ch == "#":
            out.append(f"[{_WORD_CHARS}]")
        elif ch in "-_":
            trailing = i + 1 == len(word) or word[i + 1] in "*+$"
            out.append("-" if trailing else r"[-_ ]")
        else:
            out.append(re.escape(ch))
    return "".join(out)


def _gap(n: int) -> str:
    return rf" (?:[^ ]+ ){{0,{n}}}"


def _parse_seq(tokens: list[str], pos: int, stop: set[str]) -> tuple[str, int]:
    """Parse a sequence of words/groups joined by adjacency or proximity operators."""
    expr: str | None = None
    pending = " "
    while pos < len(tokens) and tokens[pos] not in stop:
        tok = tokens[pos]
        m = _PROX.match(tok)
        if m and expr is not None:
            n, kind = int(m.group(1)), m.group(2)
            pending = (kind, n)
            pos += 1
            continue
        if tok == "(":
            item, pos = _parse_group(tokens, pos + 1)
        else:
            item, pos = _word_regex(tok), pos + 1
        if expr is None:
            expr = item
        elif pending == " ":
            expr = f"{expr} {item}"
        else:
            kind, n = pending
            if kind == "w":
                expr = f"(?:{expr}){_gap(n)}(?:{item})"
            else:
                expr = f"(?:(?:{expr}){_gap(n)}(?:{item})|(?:{item}){_gap(n)}(?:{expr}))"
        pending = " "
    if expr is None:
        raise ValueError("empty term")
    return expr, pos


def _parse_group(tokens: list[str], pos: int) -> tuple[str, int]:
    alts = []
    while True:
        alt, pos = _parse_seq(tokens, pos, {"or", ")"})
        alts.append(alt)
        if pos >= len(tokens):
            raise ValueError("unbalanced parenthesis")
        if tokens[pos] == ")":
            return "(?:" + "|".join(alts) + ")", pos + 1
        pos += 1


def compile_term(term: str) -> re.Pattern:
    """Compile a dictionary term to a word-boundary anchored regex.

    >>> bool(compile_term("reinforc* learn*").search("uses reinforcement learning"))
    True
    >>> bool(compile_term("robot system").search("robot systems"))
    False
    """
    tokens = _TOKEN.findall(term.strip().lower())
    body, pos = _parse_seq(tokens, 0, set())
    if pos != len(tokens):
        raise ValueError(f"cannot parse term {term!r}")
    return re.compile(rf"(?<![{_WORD_CHARS}]){body}(?![{_WORD_CHARS}])")


# ---------------------------------------------------------------------------
# dictionaries


@dataclass(frozen=True)
class KeywordEntry:
    term: str
    group: Group
    tier: Tier


class KeywordDictionary:
    """Grouped, tiered term list. Terms are stored lowercase.

    Duplicate ``(term, tier)`` pairs raise :class:`DuplicateEntry`. The same
    term may sit in two tiers (``control theory`` is both a co-occurrence
    term and a text-mining term).
    """

    def __init__(self, entries: Iterable[KeywordEntry]):
        seen = set()
        clean = []
        for e in entries:
            e = KeywordEntry(" ".join(e.term.lower().split()), Group(e.group), Tier(e.tier))
            if (e.term, e.tier) in seen:
                raise DuplicateEntry(f"duplicate term {e.term!r} in tier {e.tier.value}")
            seen.add((e.term, e.tier))
            clean.append(e)
        # a canonical order makes every downstream result independent of file order
        self.entries: tuple[KeywordEntry, ...] = tuple(sorted(clean, key=lambda e: (e.tier.value, e.term)))
        self._patterns = {e.term: compile_term(e.term) for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def terms(self, tier: Tier | str) -> set[str]:
        tier = Tier(tier)
        return {e.term for e in self.entries if e.tier is tier}

    def pattern(self, term: str) -> re.Pattern:
        return self._patterns[term]

    @classmethod
    def from_csv(cls, path) -> "KeywordDictionary":
        text = Path(path).read_text(encoding="utf-8")
        return cls._from_text(text)

    @classmethod
    def _from_text(cls, text: str) -> "KeywordDictionary":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["term", "group", "tier"]:
            raise ValueError("dictionary header must be term,group,tier")
        return cls(KeywordEntry(r["term"], Group(r["group"].strip()), Tier(r["tier"].strip())) for r in reader)

    @classmethod
    def baseline(cls) -> "KeywordDictionary":
        text = resources.files("patentdyn.data").joinpath("keywords_baseline.csv").read_text(encoding="utf-8")
        return cls._from_text(text)


def normalize_cpc(symbol: str) -> str:
    """Strip all whitespace and uppercase: ``"b25j 9/161"`` -> ``"B25J9/161"``."""
    return "".join(symbol.split()).upper()


def _split_symbol(symbol: str) -> tuple[str, str | None]:
    head, sep, sub = symbol.partition("/")
    return head, (sub if sep else None)


@dataclass(frozen=True)
class CpcMatch:
    is_ai_cpc: bool
    is_robot_cpc: bool


class CpcRuleSet:
    """AI CPC symbols plus robot CPC prefixes.

    A code is an AI code when it equals a listed symbol, when the listed
    symbol is a main group (``/00``) and the code lies in that main group, or
    when the code's subgroup digits extend the listed subgroup
    (``G06N3/02`` covers ``G06N3/0245``).
    """

    def __init__(self, ai_codes: Iterable[str], robot_prefixes: Iterable[str] = ("B25J",)):
        self.ai_codes = frozenset(normalize_cpc(c) for c in ai_codes if c.strip())
        self.robot_prefixes = tuple(sorted({normalize_cpc(p) for p in robot_prefixes if p.strip()}))
        if not self.ai_codes and not self.robot_prefixes:
            raise ValueError("CPC rule set is empty")
        self._by_head: dict[str, list[str | None]] = {}
        for c in self.ai_codes:
            head, sub = _split_symbol(c)
            self._by_head.setdefault(head, []).append(sub)

    @staticmethod
    def _read_list(path) -> list[str]:
        text = Path(path).read_text(encoding="utf-8") if not hasattr(path, "read_text") else path.read_text(encoding="utf-8")
        return [ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()]

    @classmethod
    def from_files(cls, ai_path, robot_path) -> "CpcRuleSet":
        return cls(cls._read_list(ai_path), cls._read_list(robot_path))

    @classmethod
    def baseline(cls) -> "CpcRuleSet":
        base = resources.files("patentdyn.data")
        return cls(cls._read_list(base.joinpath("cpc_ai.txt")), cls._read_list(base.joinpath("cpc_robot.txt")))

    def is_ai(self, code: str) -> bool:
        code = normalize_cpc(code)
        if code in self.ai_codes:
            return True
        head, sub = _split_symbol(code)
        if sub is None:
            return False
        for listed in self._by_head.get(head, ()):
            if listed is None or listed == "00" or sub.startswith(listed):
                return True
        return False

    def is_robot(self, code: str) -> bool:
        code = normalize_cpc(code)
        return any(code.startswith(p) for p in self.robot_prefixes)


def match_cpc(record, rules: CpcRuleSet) -> CpcMatch:
    codes = record.cpc_codes
    return CpcMatch(any(rules.is_ai(c) for c in codes), any(rules.is_robot(c) for c in codes))


# ---------------------------------------------------------------------------
# text

_SENTENCE_END = re.compile(r"[.;!?]+(?=\s|$)")


def normalize_text(text: str | None) -> list[str]:
    """Lowercase, split into sentences on ``. ; ! ?`` before whitespace or end, collapse spaces.

    The splitter is a punctuation heuristic: abbreviations such as ``fig.``
    end a sentence.

    >>> normalize_text("A Robot. It learns fast.")
    ['a robot', 'it learns fast']
    """
    if not text:
        return []
    out = []
    for part in _SENTENCE_END.split(text.lower()):
        s = " ".join(part.split())
        if s:
            out.append(s)
    return out


@dataclass(frozen=True, order=True)
class KeywordHit:
    location: Location
    sentence_index: int
    tier: Tier
    term: str
    group: Group


def match_keywords(
    sentences: Sequence[str],
    dictionary: KeywordDictionary,
    tier_filter: Iterable[Tier | str] | None = None,
    location: Location | str = Location.ABSTRACT,
) -> list[KeywordHit]:
    """Scan sentences for dictionary terms.

    Each ``(term, tier, sentence)`` is reported once however often it occurs.
    Hits are sorted by sentence, tier and term.
    """
    tiers = {Tier(t) for t in tier_filter} if tier_filter is not None else set(Tier)
    location = Location(location)
    hits = []
    for e in dictionary.entries:
        if e.tier not in tiers:
            continue
        pat = dictionary.pattern(e.term)
        for i, s in enumerate(sentences):
            if pat.search(s):
                hits.append(KeywordHit(location, i, e.tier, e.term, e.group))
    return sorted(set(hits))


def record_hits(record, dictionary: KeywordDictionary, tier_filter=None) -> list[KeywordHit]:
    """Hits over the title and abstract sentences of a record."""
    return match_keywords(normalize_text(record.title), dictionary, tier_filter, Location.TITLE) + match_keywords(
        normalize_text(record.abstract), dictionary, tier_filter, Location.ABSTRACT
    )


def classify_robot_type(hits: Iterable[KeywordHit]) -> set[RobotType]:
    return {ROBOT_CORE_TYPES[h.term] for h in hits if h.tier is Tier.ROBOT_CORE and h.term in ROBOT_CORE_TYPES}


def _is_robot(cpc: CpcMatch, hits: Sequence[KeywordHit]) -> bool:
    return cpc.is_robot_cpc or any(h.tier is Tier.ROBOT_CORE for h in hits)


def _intelligent(hits: Sequence[KeywordHit], mode: str) -> bool:
    core = any(h.tier is Tier.ROBOT_CORE for h in hits)
    intrinsic = core and any(h.tier is Tier.AI_INTRINSIC for h in hits)
    if mode == "intrinsic":
        return intrinsic
    if mode == "union":
        return intrinsic or any(h.tier is Tier.AI_BROAD for h in hits)
    raise ValueError(f"unknown mode {mode!r}; use 'union' or 'intrinsic'")


def flag_intelligent(record, dictionary: KeywordDictionary, rules: CpcRuleSet, mode: str = "union") -> bool:
    """Whether a robot record embeds AI.

    ``union`` (default): an AI-intrinsic term co-occurs with a robot core
    term anywhere in title or abstract, or the text-mining dictionary finds
    at least one term. ``intrinsic``: only the co-occurrence condition.

    Raises
    ------
    NotARobot
        If the record has neither a robot CPC code nor a robot core term.
    """
    hits = record_hits(record, dictionary)
    if not _is_robot(match_cpc(record, rules), hits):
        raise NotARobot(f"record {getattr(record, 'family_id', '?')} is not a robot patent")
    return _intelligent(hits, mode)


@dataclass(frozen=True)
class Classification:
    domain_label: DomainLabel
    intelligent: bool
    robot_types: frozenset[RobotType]
    hits: tuple[KeywordHit, ...]
    cpc: CpcMatch


def classify(record, dictionary: KeywordDictionary, rules: CpcRuleSet, mode: str = "union") -> Classification:
    """Full labelling of one record: domain, intelligent flag, robot types and hits.

    Robots take precedence over core AI so the domains are mutually exclusive.
    """
    hits = record_hits(record, dictionary)
    cpc = match_cpc(record, rules)
    robot = _is_robot(cpc, hits)
    intelligent = robot and _intelligent(hits, mode)
    if robot:
        label = DomainLabel.AI_ENHANCED_ROBOT if intelligent else DomainLabel.TRADITIONAL_ROBOT
    elif cpc.is_ai_cpc:
        label = DomainLabel.CORE_AI
    else:
        label = DomainLabel.OTHER
    return Classification(label, intelligent, frozenset(classify_robot_type(hits)), tuple(hits), cpc)


def classify_domain(record, dictionary: KeywordDictionary, rules: CpcRuleSet, mode: str = "union") -> DomainLabel:
    return classify(record, dictionary, rules, mode).domain_label


def classify_families(families, dictionary: KeywordDictionary, rules: CpcRuleSet, mode: str = "union") -> list:
    """Return copies of the families with label fields filled in."""
    out = []
    for f in families:
        c = classify(f, dictionary, rules, mode)
        out.append(
            replace(
                f,
                domain_label=c.domain_label,
                intelligent=c.intelligent,
                robot_types=frozenset(t.value for t in c.robot_types),
                keyword_hits=c.hits,
            )
        )
    return out


def keyword_domain_histogram(
    hits: Iterable[KeywordHit],
    location_filter: Location | str | None = None,
    tiers: Iterable[Tier | str] | None = (Tier.AI_BROAD,),
) -> dict[str, int]:
    """Count hits per group; every group is present, zeros included.

    By default only text-mining (``AIBroad``) hits count. Pass ``tiers=None``
    to count all tiers.
    """
    loc = Location(location_filter) if location_filter is not None else None
    tier_set = {Tier(t) for t in tiers} if tiers is not None else None
    counts = Counter(
        h.group.value
        for h in hits
        if (loc is None or h.location is loc) and (tier_set is None or h.tier in tier_set)
    )
    return {g.value: int(counts.get(g.value, 0)) for g in Group}
