"""Publisher-specific ID detection in page text, request URLs and cookies.

Four identifier kinds are recognized, each with a fixed, case-sensitive
shape:

    Publisher    pub-[0-9]{9,}        ad-revenue account
    Tracking     UA-[0-9]{4,}-[0-9]+  legacy analytics property (account prefix)
    Measurement  G-[A-Z0-9]{7,}       current analytics property
    Container    GTM-[A-Z0-9]{6,}     tag-manager container

A match embedded in a longer token is rejected: the character before a
match must not be alphanumeric, and the character after it must not extend
the pattern's final character class. Two data-driven filters remove false
positives (dictionary words and a keyword blocklist) before the surviving
values are canonicalized and aggregated into per-site profiles.
"""

from __future__ import annotations

import enum
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .corpus import CrawlRecord


class IdKind(enum.Enum):
    PUBLISHER = "publisher"
    TRACKING = "tracking"
    MEASUREMENT = "measurement"
    CONTAINER = "container"


class Source(enum.Enum):
    HTML = "html"
    REQUEST = "request"
    COOKIE = "cookie"


# Kind order fixes the reporting order everywhere downstream.
KIND_ORDER: tuple[IdKind, ...] = (
    IdKind.PUBLISHER,
    IdKind.TRACKING,
    IdKind.MEASUREMENT,
    IdKind.CONTAINER,
)

_NOT_ALNUM_BEFORE = r"(?<![0-9A-Za-z])"
PATTERNS: dict[IdKind, re.Pattern[str]] = {
    IdKind.PUBLISHER: re.compile(_NOT_ALNUM_BEFORE + r"pub-[0-9]{9,}(?![0-9])"),
    IdKind.TRACKING: re.compile(_NOT_ALNUM_BEFORE + r"UA-[0-9]{4,}-[0-9]+(?![0-9])"),
    IdKind.MEASUREMENT: re.compile(_NOT_ALNUM_BEFORE + r"G-[A-Z0-9]{7,}(?![A-Z0-9])"),
    IdKind.CONTAINER: re.compile(_NOT_ALNUM_BEFORE + r"GTM-[A-Z0-9]{6,}(?![A-Z0-9])"),
}

# Tracking keys canonicalize to the account prefix: UA-<account>.
_TRACKING_CANONICAL = re.compile(r"UA-[0-9]{4,}\Z")

RawMatch = tuple[str, IdKind]


def scan_text(text: str) -> list[RawMatch]:
    """All boundary-respecting matches of the four patterns, as
    (value, kind) pairs ordered by position in the text."""
    found: list[tuple[int, int, str, IdKind]] = []
    for order, kind in enumerate(KIND_ORDER):
        for m in PATTERNS[kind].finditer(text):
            found.append((m.start(), order, m.group(), kind))
    found.sort()
    return [(value, kind) for _, _, value, kind in found]


def filter_dictionary(matches: Iterable[RawMatch], dictionary: frozenset[str] | set[str]) -> list[RawMatch]:
    """Drop G-/GTM- matches whose post-hyphen suffix is an English word.

    Publisher and Tracking values have all-numeric suffixes and are never
    dropped here.
    """
    kept = []
    for value, kind in matches:
        if kind in (IdKind.MEASUREMENT, IdKind.CONTAINER):
            suffix = value.split("-", 1)[1].lower()
            if suffix in dictionary:
                continue
        kept.append((value, kind))
    return kept


def filter_keywords(matches: Iterable[RawMatch], blocklist: frozenset[str] | set[str]) -> list[RawMatch]:
    """Drop matches whose raw value appears verbatim in the blocklist."""
    return [(value, kind) for value, kind in matches if value not in blocklist]


def canonical_key(value: str, kind: IdKind) -> str:
    """Tracking values collapse to their account prefix; others pass through."""
    if kind is IdKind.TRACKING:
        return "UA-" + value.split("-")[1]
    return value


def load_dictionary(path: str | Path | None = None) -> frozenset[str]:
    """One lowercase word per line; defaults to the packaged seed list."""
    text = _read_data_file(path, "english_words.txt")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def load_blocklist(path: str | Path | None = None) -> frozenset[str]:
    """One raw value per line, '#' comments allowed; defaults to the
    packaged seed list."""
    text = _read_data_file(path, "keyword_blocklist.txt")
    values = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.add(line)
    return frozenset(values)


def _read_data_file(path: str | Path | None, default_name: str) -> str:
    if path is None:
        return resources.files("adgraph.data").joinpath(default_name).read_text(encoding="utf-8")
    return Path(path).read_text(encoding="utf-8")


# ---------------------------------------------------------------------------
# Validated hits and per-site profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentifierHit:
    """One validated identifier value on one site: the raw match, its kind,
    the canonical key it maps to, and every channel it appeared in."""

    raw: str
    kind: IdKind
    canonical: str
    sources: frozenset[Source]


def _iter_channel_matches(
    record: CrawlRecord,
    dictionary: frozenset[str] | set[str],
    blocklist: frozenset[str] | set[str],
) -> Iterator[tuple[Source, str, IdKind]]:
    """Every filtered match occurrence across the record's page text,
    request URLs, and cookie names and values."""
    channels: list[tuple[Source, Iterable[str]]] = [
        (Source.HTML, (record.page_text,)),
        (Source.REQUEST, record.request_urls),
        (Source.COOKIE, [t for pair in record.cookies for t in pair]),
    ]
    for source, texts in channels:
        for text in texts:
            if not text:
                continue
            matches = filter_keywords(filter_dictionary(scan_text(text), dictionary), blocklist)
            for value, kind in matches:
                yield source, value, kind


def scan_record(
    record: CrawlRecord,
    dictionary: frozenset[str] | set[str],
    blocklist: frozenset[str] | set[str],
) -> list[IdentifierHit]:
    """Filtered identifier hits for one record, one per raw value, ordered
    by (kind, raw)."""
    seen: dict[tuple[str, IdKind], set[Source]] = {}
    for source, value, kind in _iter_channel_matches(record, dictionary, blocklist):
        seen.setdefault((value, kind), set()).add(source)
    return [
        IdentifierHit(raw=value, kind=kind, canonical=canonical_key(value, kind),
                      sources=frozenset(sources))
        for (value, kind), sources in sorted(seen.items(), key=lambda kv: (kv[0][1].value, kv[0][0]))
    ]


@dataclass
class SiteIdProfile:
    """Validated identifier keys found on one site, with provenance."""

    landing_domain: str
    keys: dict[IdKind, frozenset[str]] = field(default_factory=dict)
    sources: dict[str, frozenset[Source]] = field(default_factory=dict)
    raw_counts: dict[IdKind, int] = field(default_factory=dict)

    def keys_for(self, kind: IdKind) -> frozenset[str]:
        return self.keys.get(kind, frozenset())

    def total_keys(self) -> int:
        return sum(len(v) for v in self.keys.values())

    def is_empty(self) -> bool:
        return self.total_keys() == 0

    def to_json_obj(self) -> dict:
        return {
            "domain": self.landing_domain,
            "ids": {
                kind.value: {
                    key: sorted(s.value for s in self.sources.get(key, frozenset()))
                    for key in sorted(self.keys_for(kind))
                }
                for kind in KIND_ORDER
            },
            "raw_counts": {kind.value: self.raw_counts.get(kind, 0) for kind in KIND_ORDER},
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "SiteIdProfile":
        keys: dict[IdKind, frozenset[str]] = {}
        sources: dict[str, frozenset[Source]] = {}
        for kind in KIND_ORDER:
            entry = obj.get("ids", {}).get(kind.value, {})
            if entry:
                keys[kind] = frozenset(entry)
                for key, srcs in entry.items():
                    sources[key] = frozenset(Source(s) for s in srcs)
        raw_counts = {
            kind: int(obj.get("raw_counts", {}).get(kind.value, 0)) for kind in KIND_ORDER
        }
        return cls(
            landing_domain=obj["domain"],
            keys=keys,
            sources=sources,
            raw_counts={k: v for k, v in raw_counts.items() if v},
        )


def extract_profile(
    record: CrawlRecord,
    dictionary: frozenset[str] | set[str],
    blocklist: frozenset[str] | set[str],
) -> SiteIdProfile:
    """Scan one record's page text, request URLs and cookies (names and
    values) and aggregate the filtered, canonicalized keys.

    raw_counts tally every filtered match occurrence per kind, before
    canonical merging.
    """
    keys: dict[IdKind, set[str]] = {}
    sources: dict[str, set[Source]] = {}
    raw_counts: dict[IdKind, int] = {}
    for source, value, kind in _iter_channel_matches(record, dictionary, blocklist):
        key = canonical_key(value, kind)
        keys.setdefault(kind, set()).add(key)
        sources.setdefault(key, set()).add(source)
        raw_counts[kind] = raw_counts.get(kind, 0) + 1
    return SiteIdProfile(
        landing_domain=record.landing_domain,
        keys={k: frozenset(v) for k, v in keys.items()},
        sources={k: frozenset(v) for k, v in sources.items()},
        raw_counts=raw_counts,
    )


def merge_profiles(profiles: Iterable[SiteIdProfile]) -> SiteIdProfile:
    """Union profiles that share a landing domain (deterministic merge)."""
    profiles = list(profiles)
    domain = profiles[0].landing_domain
    keys: dict[IdKind, set[str]] = {}
    sources: dict[str, set[Source]] = {}
    raw_counts: dict[IdKind, int] = {}
    for p in profiles:
        if p.landing_domain != domain:
            raise ValueError("cannot merge profiles of different domains")
        for kind, ks in p.keys.items():
            keys.setdefault(kind, set()).update(ks)
        for key, srcs in p.sources.items():
            sources.setdefault(key, set()).update(srcs)
        for kind, n in p.raw_counts.items():
            raw_counts[kind] = raw_counts.get(kind, 0) + n
    return SiteIdProfile(
        landing_domain=domain,
        keys={k: frozenset(v) for k, v in keys.items()},
        sources={k: frozenset(v) for k, v in sources.items()},
        raw_counts=raw_counts,
    )


def extract_profiles(
    records: Sequence[CrawlRecord],
    dictionary: frozenset[str] | set[str] | None = None,
    blocklist: frozenset[str] | set[str] | None = None,
    threads: int = 1,
    keep_empty: bool = False,
) -> list[SiteIdProfile]:
    """Extract per-site profiles for a whole corpus, sorted by domain.

    Records sharing a landing domain are merged. Results are identical for
    any thread count. Empty profiles are dropped unless ``keep_empty``.
    """
    if dictionary is None:
        dictionary = load_dictionary()
    if blocklist is None:
        blocklist = load_blocklist()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            raw = list(pool.map(lambda r: extract_profile(r, dictionary, blocklist), records))
    else:
        raw = [extract_profile(r, dictionary, blocklist) for r in records]
    by_domain: dict[str, list[SiteIdProfile]] = {}
    for p in raw:
        by_domain.setdefault(p.landing_domain, []).append(p)
    merged = [merge_profiles(group) for _, group in sorted(by_domain.items())]
    if keep_empty:
        return merged
    return [p for p in merged if not p.is_empty()]


# ---------------------------------------------------------------------------
# Corpus summaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KindSummary:
    unique_ids: int
    unique_sites: int
    pct_of_sites: float
    pct_in_html: float
    pct_in_requests: float
    pct_in_cookies: float


@dataclass(frozen=True)
class ExtractionSummary:
    corpus_size: int
    kinds: dict[IdKind, KindSummary]

    def to_json_obj(self) -> dict:
        return {
            "corpus_size": self.corpus_size,
            "kinds": {
                kind.value: {
                    "unique_ids": ks.unique_ids,
                    "unique_sites": ks.unique_sites,
                    "pct_of_sites": ks.pct_of_sites,
                    "pct_in_html": ks.pct_in_html,
                    "pct_in_requests": ks.pct_in_requests,
                    "pct_in_cookies": ks.pct_in_cookies,
                }
                for kind, ks in self.kinds.items()
            },
        }


def summarize_extraction(profiles: Sequence[SiteIdProfile], corpus_size: int) -> ExtractionSummary:
    """Per-kind ID counts, site coverage and source-channel shares.

    Channel shares are fractions of the kind's unique keys whose source set
    (unioned across sites) includes that channel.
    """
    if corpus_size <= 0:
        raise ValueError("corpus_size must be positive")
    bearing = [p for p in profiles if not p.is_empty()]
    if len({p.landing_domain for p in bearing}) > corpus_size:
        raise ValueError("more profiled sites than corpus_size")
    kinds: dict[IdKind, KindSummary] = {}
    for kind in KIND_ORDER:
        key_sources: dict[str, set[Source]] = {}
        sites = 0
        for p in bearing:
            ks = p.keys_for(kind)
            if ks:
                sites += 1
            for key in ks:
                key_sources.setdefault(key, set()).update(p.sources.get(key, frozenset()))
        n_ids = len(key_sources)

        def share(source: Source) -> float:
            if n_ids == 0:
                return 0.0
            return sum(1 for s in key_sources.values() if source in s) / n_ids

        kinds[kind] = KindSummary(
            unique_ids=n_ids,
            unique_sites=sites,
            pct_of_sites=sites / corpus_size,
            pct_in_html=share(Source.HTML),
            pct_in_requests=share(Source.REQUEST),
            pct_in_cookies=share(Source.COOKIE),
        )
    return ExtractionSummary(corpus_size=corpus_size, kinds=kinds)


def flag_anomalies(
    profiles: Sequence[SiteIdProfile], threshold: int = 40
) -> list[tuple[str, int]]:
    """Sites whose distinct keys across all kinds strictly exceed the
    threshold, heaviest first. High counts tend to indicate scripted or
    abusive ID stuffing rather than ordinary multi-author sites."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    flagged = [
        (p.landing_domain, p.total_keys())
        for p in profiles
        if p.total_keys() > threshold
    ]
    flagged.sort(key=lambda t: (-t[1], t[0]))
    return flagged


# ---------------------------------------------------------------------------
# Profile dumps (JSONL, one profile per line)
# ---------------------------------------------------------------------------

def dump_profiles(profiles: Iterable[SiteIdProfile], stream: IO[str]) -> None:
    for p in sorted(profiles, key=lambda p: p.landing_domain):
        stream.write(json.dumps(p.to_json_obj(), sort_keys=True) + "\n")


def load_profiles(source: str | Path | IO[str]) -> list[SiteIdProfile]:
    if hasattr(source, "read"):
        lines = source
        return [SiteIdProfile.from_json_obj(json.loads(l)) for l in lines if l.strip()]
    with open(source, encoding="utf-8") as fh:
        return [SiteIdProfile.from_json_obj(json.loads(l)) for l in fh if l.strip()]
