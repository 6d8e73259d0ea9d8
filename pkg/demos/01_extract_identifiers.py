"""
Extracting publisher-specific IDs from crawled pages
====================================================

A walk through the extraction layer: scan raw page text, filter the
false positives, and aggregate per-site profiles with provenance.
"""

from adgraph import (
    CrawlRecord,
    extract_profile,
    filter_dictionary,
    filter_keywords,
    load_blocklist,
    load_dictionary,
    scan_text,
    summarize_extraction,
)

# Four identifier shapes are recognized. Note the boundary rule: the
# "XG-ABCDEFG" candidate is rejected because its G- prefix sits inside a
# longer token, while the canonical "ca-pub-..." AdSense form matches.
page = """
<script data-ad-client="ca-pub-123456789"></script>
<script>ga('create', 'UA-12345-6', 'auto');</script>
<script>gtag('config', 'G-AB12CD34');</script>
XG-ABCDEFG is noise, GTM-XYZ999 is a container.
"""
for value, kind in scan_text(page):
    print(f"  {kind.value:12s} {value}")

# Two data-driven filters remove values that merely look like IDs:
# dictionary words (G-BACKPACK) and blocklisted campaign strings
# (G-APRIL2020). Both lists ship with the package and can be replaced.
dictionary = load_dictionary()
blocklist = load_blocklist()
noisy = scan_text("G-BACKPACK G-APRIL2020 G-REAL1234")
print("\nraw:", [v for v, _ in noisy])
clean = filter_keywords(filter_dictionary(noisy, dictionary), blocklist)
print("filtered:", [v for v, _ in clean])

# A full record is scanned across three channels: rendered HTML, request
# URLs, and cookies (names and values). Tracking IDs collapse to their
# account prefix, so UA-1111-1 and UA-1111-2 below are one account seen
# in two channels.
record = CrawlRecord(
    requested_domain="news-site.example",
    landing_url="https://news-site.example/",
    landing_domain="news-site.example",
    page_text="ga('create', 'UA-1111-1')",
    request_urls=("https://pagead2.googlesyndication.com/js?client=ca-pub-987654321",),
    cookies=(("_tracker", "UA-1111-2"),),
)
profile = extract_profile(record, dictionary, blocklist)
for kind, keys in profile.keys.items():
    for key in sorted(keys):
        sources = sorted(s.value for s in profile.sources[key])
        print(f"  {kind.value:12s} {key:20s} seen in {sources}")

# Corpus-level summary: unique IDs, site coverage, and where IDs appear.
summary = summarize_extraction([profile], corpus_size=1)
print("\npublisher summary:", summary.kinds[list(summary.kinds)[0]])
