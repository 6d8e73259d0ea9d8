"""Crawl-data ingestion and domain canonicalization.

Normalizes crawl dumps (JSONL or HAR), Tranco-style rank lists and
domain-category CSVs into an immutable record model keyed by the
registrable landing domain (public suffix + one label).
"""

from __future__ import annotations

import ipaddress
import json
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence
from urllib.parse import urlsplit

logger = logging.getLogger(__name__)


class CanonicalizationError(ValueError):
    """Input cannot be reduced to a registrable domain."""


class FormatError(ValueError):
    """Structurally invalid input file (e.g. a HAR without log.entries)."""


# ---------------------------------------------------------------------------
# Public suffix handling
# ---------------------------------------------------------------------------

class PublicSuffixTable:
    """Public-suffix rules in the standard list format.

    Supports exact rules, leftmost ``*.`` wildcards and ``!`` exceptions,
    with the implicit ``*`` default rule (unknown TLDs are public suffixes).
    """

    def __init__(self, rules: Iterable[str]):
        self._exact: set[tuple[str, ...]] = set()
        self._wildcard: set[tuple[str, ...]] = set()  # labels after the "*."
        self._exception: set[tuple[str, ...]] = set()
        for raw in rules:
            rule = raw.strip()
            if not rule or rule.startswith("//"):
                continue
            rule = rule.split()[0].lower()
            if rule.startswith("!"):
                self._exception.add(tuple(rule[1:].split(".")))
            elif rule.startswith("*."):
                self._wildcard.add(tuple(rule[2:].split(".")))
            else:
                self._exact.add(tuple(rule.split(".")))

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PublicSuffixTable":
        """Load from ``path``, or from the packaged snapshot when omitted."""
        if path is None:
            text = (
                resources.files("adgraph.data")
                .joinpath("public_suffix_list.dat")
                .read_text(encoding="utf-8")
            )
        else:
            text = Path(path).read_text(encoding="utf-8")
        return cls(text.splitlines())

    def _suffix_length(self, labels: tuple[str, ...]) -> int:
        """Number of trailing labels forming the public suffix."""
        best = 1  # implicit "*" rule
        for i in range(len(labels)):
            tail = labels[i:]
            if tail in self._exception:
                return len(tail) - 1
            if tail in self._exact:
                best = max(best, len(tail))
            # "*.foo" matches one extra label in front of foo
            if len(tail) >= 2 and tail[1:] in self._wildcard:
                best = max(best, len(tail))
        return best

    def public_suffix(self, host: str) -> str:
        labels = tuple(host.lower().split("."))
        return ".".join(labels[len(labels) - self._suffix_length(labels):])

    def registrable_domain(self, host: str) -> str:
        """Public suffix plus one label; the host itself when it already is
        a bare public suffix (no registrable part exists)."""
        labels = tuple(host.lower().split("."))
        n = self._suffix_length(labels)
        if len(labels) <= n:
            return ".".join(labels)
        return ".".join(labels[len(labels) - n - 1:])


_default_table: PublicSuffixTable | None = None


def default_suffix_table() -> PublicSuffixTable:
    global _default_table
    if _default_table is None:
        _default_table = PublicSuffixTable.load()
    return _default_table


def _is_ip_literal(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        return False


def canonicalize(url_or_host: str, table: PublicSuffixTable | None = None) -> str:
    """Reduce a URL or hostname to its lowercase registrable domain.

    IP literals pass through unchanged. Raises CanonicalizationError on
    unparseable input (no extractable, well-formed hostname).
    """
    if not isinstance(url_or_host, str) or not url_or_host.strip():
        raise CanonicalizationError(f"empty or non-string input: {url_or_host!r}")
    s = url_or_host.strip()
    if "://" in s or s.startswith("//"):
        try:
            host = urlsplit(s).hostname
        except ValueError as exc:
            raise CanonicalizationError(f"unparseable URL: {s!r}") from exc
        if not host:
            raise CanonicalizationError(f"URL has no hostname: {s!r}")
    else:
        host = s.split("/")[0].rsplit("@", 1)[-1]
        if host.startswith("[") and host.endswith("]"):
            host = host[1:-1]
        elif host.count(":") == 1:  # host:port (bare IPv6 keeps its colons)
            host = host.split(":")[0]
    host = host.lower().rstrip(".")
    if not host:
        raise CanonicalizationError(f"empty hostname in: {s!r}")
    if _is_ip_literal(host):
        return host
    labels = host.split(".")
    if any(not lab or " " in lab for lab in labels):
        raise CanonicalizationError(f"malformed hostname: {host!r}")
    return (table or default_suffix_table()).registrable_domain(host)


# ---------------------------------------------------------------------------
# Record model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrawlRecord:
    """One crawled website: rendered text plus observed requests and cookies."""

    requested_domain: str
    landing_url: str
    landing_domain: str
    page_text: str = ""
    request_urls: tuple[str, ...] = ()
    cookies: tuple[tuple[str, str], ...] = ()
    rank: int | None = None
    snapshot_id: str | None = None


@dataclass
class ParseResult:
    """Records parsed from a crawl JSONL stream plus skipped-line log."""

    records: list[CrawlRecord] = field(default_factory=list)
    skips: list[tuple[int, str]] = field(default_factory=list)  # (line_no, reason)

    def __iter__(self) -> Iterator[CrawlRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _record_from_obj(obj: dict, table: PublicSuffixTable | None) -> CrawlRecord:
    domain = obj.get("domain")
    landing_url = obj.get("landing_url")
    if not isinstance(domain, str) or not domain:
        raise ValueError("missing or non-string 'domain'")
    if not isinstance(landing_url, str):
        raise ValueError("missing or non-string 'landing_url'")
    html = obj.get("html", "")
    if not isinstance(html, str):
        raise ValueError("'html' is not a string")
    requests = obj.get("requests", [])
    if not isinstance(requests, list) or any(not isinstance(u, str) for u in requests):
        raise ValueError("'requests' is not an array of strings")
    raw_cookies = obj.get("cookies", [])
    cookies = []
    for c in raw_cookies if isinstance(raw_cookies, list) else ():
        if not isinstance(c, dict) or "name" not in c or "value" not in c:
            raise ValueError("cookie entries need 'name' and 'value'")
        cookies.append((str(c["name"]), str(c["value"])))
    if not isinstance(raw_cookies, list):
        raise ValueError("'cookies' is not an array")
    rank = obj.get("rank")
    if rank is not None and (not isinstance(rank, int) or isinstance(rank, bool) or rank < 1):
        raise ValueError("'rank' must be a positive integer")
    snapshot = obj.get("snapshot")
    if snapshot is not None and not isinstance(snapshot, str):
        raise ValueError("'snapshot' must be a string")

    # Landing domain from the landing URL; a failed render falls back to the
    # requested domain so the record still counts toward coverage totals.
    try:
        landing_domain = canonicalize(landing_url, table)
    except CanonicalizationError:
        landing_domain = canonicalize(domain, table)
    return CrawlRecord(
        requested_domain=domain.lower(),
        landing_url=landing_url,
        landing_domain=landing_domain,
        page_text=html,
        request_urls=tuple(requests),
        cookies=tuple(cookies),
        rank=rank,
        snapshot_id=snapshot,
    )


def parse_crawl_jsonl(
    stream: IO[str] | Iterable[str],
    table: PublicSuffixTable | None = None,
) -> ParseResult:
    """Parse crawl JSONL: one record per well-formed line, in input order.

    Malformed lines never abort the stream; they are recorded in
    ``result.skips`` as ``(line_number, reason)``.
    """
    result = ParseResult()
    for line_no, line in enumerate(stream, start=1):
        stripped = line.strip()
        if not stripped:
            result.skips.append((line_no, "empty line"))
            continue
        try:
            obj = json.loads(stripped)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            result.records.append(_record_from_obj(obj, table))
        except (ValueError, CanonicalizationError) as exc:
            result.skips.append((line_no, str(exc)))
    if result.skips:
        logger.warning("skipped %d malformed crawl line(s)", len(result.skips))
    return result


def record_to_json_obj(record: CrawlRecord) -> dict:
    obj: dict = {
        "domain": record.requested_domain,
        "landing_url": record.landing_url,
        "html": record.page_text,
        "requests": list(record.request_urls),
        "cookies": [{"name": n, "value": v} for n, v in record.cookies],
    }
    if record.rank is not None:
        obj["rank"] = record.rank
    if record.snapshot_id is not None:
        obj["snapshot"] = record.snapshot_id
    return obj


def serialize_crawl_jsonl(records: Iterable[CrawlRecord], stream: IO[str]) -> None:
    """Inverse of parse_crawl_jsonl for well-formed records."""
    for record in records:
        stream.write(json.dumps(record_to_json_obj(record), sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# HAR ingestion
# ---------------------------------------------------------------------------

def parse_har(source: str | Path | IO[str], table: PublicSuffixTable | None = None) -> CrawlRecord:
    """Build one CrawlRecord from a HAR 1.2 capture of a single page load.

    page_text is the body of the first successful (2xx) text/html response;
    request_urls lists every entry's request URL; cookies are the union of
    response cookie pairs. A HAR without entries is a FormatError; a HAR
    without a document response yields an empty page_text.
    """
    if hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    try:
        entries = data["log"]["entries"]
    except (KeyError, TypeError):
        raise FormatError("HAR is missing the log.entries section")
    if not isinstance(entries, list) or not entries:
        raise FormatError("HAR has no entries")

    request_urls: list[str] = []
    cookies: list[tuple[str, str]] = []
    seen_cookies: set[tuple[str, str]] = set()
    page_text = ""
    landing_url = ""
    for entry in entries:
        url = entry.get("request", {}).get("url", "")
        if url:
            request_urls.append(url)
        response = entry.get("response", {})
        status = response.get("status", 0)
        content = response.get("content", {})
        mime = content.get("mimeType", "")
        if not landing_url and url and 200 <= status < 300 and mime.startswith("text/html"):
            landing_url = url
            page_text = content.get("text", "") or ""
        for c in response.get("cookies", []):
            pair = (str(c.get("name", "")), str(c.get("value", "")))
            if pair not in seen_cookies:
                seen_cookies.add(pair)
                cookies.append(pair)
    if not landing_url:
        landing_url = request_urls[0] if request_urls else ""
    if not landing_url:
        raise FormatError("HAR entries carry no request URLs")
    host = urlsplit(landing_url).hostname or ""
    return CrawlRecord(
        requested_domain=host.lower(),
        landing_url=landing_url,
        landing_domain=canonicalize(landing_url, table),
        page_text=page_text,
        request_urls=tuple(request_urls),
        cookies=tuple(cookies),
    )


# ---------------------------------------------------------------------------
# Deduplication and auxiliary loaders
# ---------------------------------------------------------------------------

def dedup_by_landing(records: Sequence[CrawlRecord]) -> list[CrawlRecord]:
    """Keep one record per landing domain.

    Survivor: best (smallest) rank; rank-less records lose to ranked ones;
    full ties keep the earliest input record. Output follows the first
    occurrence order of each landing domain.
    """
    best: dict[str, tuple[int, int, CrawlRecord]] = {}  # domain -> (rank key, pos, rec)
    order: list[str] = []
    for pos, rec in enumerate(records):
        if not rec.landing_domain:
            raise ValueError("record without landing_domain cannot be deduplicated")
        key = rec.rank if rec.rank is not None else float("inf")
        current = best.get(rec.landing_domain)
        if current is None:
            best[rec.landing_domain] = (key, pos, rec)
            order.append(rec.landing_domain)
        elif (key, pos) < (current[0], current[1]):
            best[rec.landing_domain] = (key, pos, rec)
    return [best[d][2] for d in order]


def assign_ranks(records: Sequence[CrawlRecord], ranks: Mapping[str, int]) -> list[CrawlRecord]:
    """Fill record ranks from a rank list keyed by requested domain."""
    return [
        replace(r, rank=ranks.get(r.requested_domain, r.rank)) for r in records
    ]


def load_rank_list(path: str | Path) -> dict[str, int]:
    """Load a headerless ``rank,domain`` CSV into domain -> rank.

    Duplicate domains: last occurrence wins (warning logged with the count).
    """
    ranks: dict[str, int] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",", 1)
            if len(parts) != 2 or not parts[0].strip().isdigit():
                raise FormatError(f"{path}: malformed rank row {row_no}: {line!r}")
            rank, domain = int(parts[0]), parts[1].strip().lower()
            if not domain:
                raise FormatError(f"{path}: empty domain at row {row_no}")
            if domain in ranks:
                duplicates += 1
            ranks[domain] = rank
    if duplicates:
        logger.warning("%s: %d duplicate domain row(s), last occurrence kept", path, duplicates)
    if len(set(ranks.values())) != len(ranks):
        logger.warning("%s: rank values are not unique", path)
    return ranks


def load_category_map(path: str | Path) -> dict[str, str]:
    """Load a headerless ``domain,category`` CSV into domain -> label."""
    categories: dict[str, str] = {}
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split(",", 1)
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise FormatError(f"{path}: malformed category row {row_no}: {line!r}")
            domain, label = parts[0].strip().lower(), parts[1].strip()
            if domain in categories:
                duplicates += 1
            categories[domain] = label
    if duplicates:
        logger.warning("%s: %d duplicate domain row(s), last occurrence kept", path, duplicates)
    return categories
