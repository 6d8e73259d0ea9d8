from __future__ import annotations

import io
import random
import re

import pytest

from adgraph.corpus import CrawlRecord
from adgraph.extractor import (
    IdKind,
    Source,
    canonical_key,
    scan_record,
    dump_profiles,
    extract_profile,
    extract_profiles,
    filter_dictionary,
    filter_keywords,
    flag_anomalies,
    load_profiles,
    scan_text,
    summarize_extraction,
)
from helpers import make_profile


def _record(domain="a.example", html="", requests=(), cookies=()):
    return CrawlRecord(domain, f"https://{domain}/", domain, html,
                       tuple(requests), tuple(cookies))


# --- scan_text --------------------------------------------------------------

def test_scan_minimal_publisher():
    assert scan_text("ca-pub-123456789") == [("pub-123456789", IdKind.PUBLISHER)]


def test_scan_tracking_format():
    assert scan_text("UA-12345-6") == [("UA-12345-6", IdKind.TRACKING)]


def test_scan_boundary_rejects_embedded_prefix():
    assert scan_text("XG-ABCDEFG") == []
    assert scan_text("datapub-999999999") == []
    assert scan_text("9UA-1234-5") == []


def test_scan_no_midstream_subreads():
    # One long id, never a shorter id carved out of its digits.
    assert scan_text("pub-12345678901") == [("pub-12345678901", IdKind.PUBLISHER)]


def test_scan_too_short_values():
    assert scan_text("pub-12345678 UA-123-4 G-ABC12 GTM-AB1") == []


def test_scan_is_case_sensitive():
    assert scan_text("PUB-123456789 ua-1234-5 gtm-abc123 g-abcdefg") == []


def test_scan_position_order_and_kinds():
    text = "GTM-XYZ999 then ca-pub-123456789 then G-AB12345 and UA-4444-1"
    assert scan_text(text) == [
        ("GTM-XYZ999", IdKind.CONTAINER),
        ("pub-123456789", IdKind.PUBLISHER),
        ("G-AB12345", IdKind.MEASUREMENT),
        ("UA-4444-1", IdKind.TRACKING),
    ]


def test_scan_empty_text():
    assert scan_text("") == []


def test_scan_separators_allow_adjacent_ids():
    assert len(scan_text("UA-1111-1,UA-2222-2;UA-3333-3")) == 3


# --- filters ----------------------------------------------------------------

def test_dictionary_drops_word_suffixes(dictionary):
    matches = scan_text("G-BACKPACK G-1A2B3C4")
    kept = filter_dictionary(matches, dictionary)
    assert kept == [("G-1A2B3C4", IdKind.MEASUREMENT)]


def test_dictionary_drops_gtm_word(dictionary):
    assert filter_dictionary(scan_text("GTM-NOODLE"), dictionary) == []


def test_dictionary_never_touches_numeric_kinds(dictionary):
    matches = scan_text("pub-123456789 UA-1234-5")
    assert filter_dictionary(matches, dictionary) == matches


def test_keywords_exact_case_sensitive(blocklist):
    assert filter_keywords(scan_text("G-APRIL2020"), blocklist) == []
    kept = filter_keywords(scan_text("G-APRIL20XX"), blocklist)
    assert kept == [("G-APRIL20XX", IdKind.MEASUREMENT)]


def test_keywords_empty_blocklist_is_identity():
    matches = scan_text("G-APRIL2020 GTM-XYZ999")
    assert filter_keywords(matches, frozenset()) == matches


def test_filters_only_remove_and_commute(dictionary, blocklist):
    rng = random.Random(4)
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    pieces = ["G-BACKPACK", "G-APRIL2020", "GTM-NOODLE", "pub-123456789"]
    pieces += ["G-" + "".join(rng.choice(alphabet) for _ in range(8)) for _ in range(200)]
    text = " ".join(pieces)
    matches = scan_text(text)
    a = filter_keywords(filter_dictionary(matches, dictionary), blocklist)
    b = filter_dictionary(filter_keywords(matches, blocklist), dictionary)
    assert a == b
    assert set(a) <= set(matches)


# --- canonical_key ----------------------------------------------------------

def test_tracking_prefix_collapse():
    assert canonical_key("UA-12345-6", IdKind.TRACKING) == "UA-12345"
    assert canonical_key("UA-12345-77", IdKind.TRACKING) == "UA-12345"


def test_other_kinds_identity():
    assert canonical_key("GTM-ABC123", IdKind.CONTAINER) == "GTM-ABC123"
    assert canonical_key("pub-123456789", IdKind.PUBLISHER) == "pub-123456789"
    assert canonical_key("G-AB12CD34", IdKind.MEASUREMENT) == "G-AB12CD34"


def test_canonical_tracking_shape(dictionary, blocklist):
    rng = random.Random(11)
    texts = [f"UA-{rng.randrange(1000, 10**8)}-{rng.randrange(1, 100)}" for _ in range(300)]
    rec = _record(html=" ".join(texts))
    profile = extract_profile(rec, dictionary, blocklist)
    pattern = re.compile(r"UA-[0-9]{4,}\Z")
    for key in profile.keys_for(IdKind.TRACKING):
        assert pattern.match(key)


# --- scan_record (hit-level view) -------------------------------------------

def test_scan_record_hits(dictionary, blocklist):
    rec = _record(html="UA-1111-1 G-BACKPACK", cookies=[("sid", "UA-1111-2")])
    hits = scan_record(rec, dictionary, blocklist)
    assert [(h.raw, h.canonical) for h in hits] == [
        ("UA-1111-1", "UA-1111"),
        ("UA-1111-2", "UA-1111"),
    ]
    assert hits[0].sources == {Source.HTML}
    assert hits[1].sources == {Source.COOKIE}
    assert all(h.sources for h in hits)


def test_scan_record_raw_matches_pattern(dictionary, blocklist):
    from adgraph.extractor import PATTERNS

    rec = _record(html="pub-123456789 UA-1234-5 G-AB12345 GTM-XYZ999")
    for hit in scan_record(rec, dictionary, blocklist):
        assert PATTERNS[hit.kind].fullmatch(hit.raw)


# --- extract_profile --------------------------------------------------------

def test_profile_composition(dictionary, blocklist):
    rec = _record(
        html="pub-123456789",
        requests=["https://www.googletagmanager.com/gtm.js?id=GTM-ABC123"],
    )
    profile = extract_profile(rec, dictionary, blocklist)
    assert profile.keys_for(IdKind.PUBLISHER) == {"pub-123456789"}
    assert profile.sources["pub-123456789"] == {Source.HTML}
    assert profile.keys_for(IdKind.CONTAINER) == {"GTM-ABC123"}
    assert profile.sources["GTM-ABC123"] == {Source.REQUEST}


def test_profile_merges_tracking_prefix_across_channels(dictionary, blocklist):
    rec = _record(html="UA-1111-1", cookies=[("sid", "UA-1111-2")])
    profile = extract_profile(rec, dictionary, blocklist)
    assert profile.keys_for(IdKind.TRACKING) == {"UA-1111"}
    assert profile.sources["UA-1111"] == {Source.HTML, Source.COOKIE}


def test_profile_scans_cookie_names(dictionary, blocklist):
    rec = _record(cookies=[("UA-2222-1", "enabled")])
    profile = extract_profile(rec, dictionary, blocklist)
    assert profile.keys_for(IdKind.TRACKING) == {"UA-2222"}


def test_empty_record_empty_profile(dictionary, blocklist):
    profile = extract_profile(_record(), dictionary, blocklist)
    assert profile.is_empty()


def test_extraction_deterministic(dictionary, blocklist):
    rec = _record(html="pub-123456789 UA-1234-5 G-AB12345 GTM-XYZ999",
                  requests=["https://x.example/?id=G-AB12345"],
                  cookies=[("a", "UA-1234-9")])
    first = extract_profile(rec, dictionary, blocklist)
    second = extract_profile(rec, dictionary, blocklist)
    assert first == second


def test_extract_profiles_thread_invariance(corpus50, dictionary, blocklist):
    records, _ = corpus50
    assert extract_profiles(records, dictionary, blocklist, threads=1) == \
        extract_profiles(records, dictionary, blocklist, threads=8)


def test_extract_profiles_merges_same_landing(dictionary, blocklist):
    records = [
        _record(html="pub-111111111"),
        _record(html="pub-222222222"),
    ]
    profiles = extract_profiles(records, dictionary, blocklist)
    assert len(profiles) == 1
    assert profiles[0].keys_for(IdKind.PUBLISHER) == {"pub-111111111", "pub-222222222"}


# --- summaries --------------------------------------------------------------

def test_summary_shared_key_counts():
    profiles = [
        make_profile("a.example", publisher={"pub-111111111"}),
        make_profile("b.example", publisher={"pub-111111111"}),
    ]
    summary = summarize_extraction(profiles, corpus_size=2)
    ks = summary.kinds[IdKind.PUBLISHER]
    assert ks.unique_ids == 1 and ks.unique_sites == 2 and ks.pct_of_sites == 1.0


def test_summary_pct_of_sites_fixture():
    profiles = [make_profile(f"s{i}.example", publisher={f"pub-10000000{i}"}) for i in range(3)]
    profiles += [make_profile(f"t{i}.example", tracking={f"UA-900{i}"}) for i in range(4)]
    summary = summarize_extraction(profiles, corpus_size=10)
    assert summary.kinds[IdKind.PUBLISHER].pct_of_sites == 0.3


def test_summary_html_only_sources():
    profiles = [make_profile("a.example", publisher={"pub-111111111"})]
    ks = summarize_extraction(profiles, 1).kinds[IdKind.PUBLISHER]
    assert ks.pct_in_html == 1.0 and ks.pct_in_requests == 0.0 and ks.pct_in_cookies == 0.0


def test_summary_unique_sites_matches_bearing_profiles():
    rng = random.Random(5)
    profiles = []
    for i in range(40):
        kinds = {}
        if rng.random() < 0.5:
            kinds["publisher"] = {f"pub-{rng.randrange(10**8, 10**9)}"}
        if rng.random() < 0.5:
            kinds["tracking"] = {f"UA-{rng.randrange(1000, 10**6)}"}
        profiles.append(make_profile(f"s{i}.example", **kinds))
    summary = summarize_extraction(profiles, corpus_size=40)
    for kind in (IdKind.PUBLISHER, IdKind.TRACKING):
        expected = sum(1 for p in profiles if p.keys_for(kind))
        assert summary.kinds[kind].unique_sites == expected


def test_summary_rejects_zero_corpus():
    with pytest.raises(ValueError):
        summarize_extraction([], corpus_size=0)


# --- anomalies --------------------------------------------------------------

def test_flag_anomalies_strict_threshold():
    big = make_profile("big.example", tracking={f"UA-9{i:06d}" for i in range(94)})
    edge = make_profile("edge.example", tracking={f"UA-8{i:06d}" for i in range(40)})
    flagged = flag_anomalies([big, edge], threshold=40)
    assert flagged == [("big.example", 94)]


def test_flag_anomalies_empty():
    assert flag_anomalies([]) == []


def test_flag_anomalies_counts_across_kinds():
    p = make_profile("m.example",
                     publisher={f"pub-10000000{i:02d}" for i in range(30)},
                     container={f"GTM-Z{i:05d}" for i in range(15)})
    assert flag_anomalies([p], threshold=40) == [("m.example", 45)]


# --- profile dumps ----------------------------------------------------------

def test_profile_jsonl_roundtrip(corpus50, dictionary, blocklist):
    records, _ = corpus50
    profiles = extract_profiles(records, dictionary, blocklist)
    buf = io.StringIO()
    dump_profiles(profiles, buf)
    buf.seek(0)
    again = load_profiles(buf)
    assert again == profiles
