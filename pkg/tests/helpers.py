"""Independent oracles and fixture builders shared across the test suite.

Everything here deliberately avoids the library's own algorithms: the
metagraph oracle is a naive triple loop, betweenness enumerates shortest
paths explicitly, modularity uses the ordered-pair formula, and the
power-law sampler inverts the CDF from a table. Oracles stay simple and
slow so the production code has something honest to be checked against.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from collections import deque
from fractions import Fraction

import numpy as np
from scipy.special import zeta

from adgraph.corpus import CrawlRecord
from adgraph.extractor import IdKind, SiteIdProfile, Source
from adgraph.graphs import FAMILY_ORDER, KINDS_OF_FAMILY, Metagraph


# ---------------------------------------------------------------------------
# Profile construction shortcuts
# ---------------------------------------------------------------------------

def make_profile(domain, publisher=(), tracking=(), measurement=(), container=()):
    keys = {}
    for kind, values in (
        (IdKind.PUBLISHER, publisher),
        (IdKind.TRACKING, tracking),
        (IdKind.MEASUREMENT, measurement),
        (IdKind.CONTAINER, container),
    ):
        if values:
            keys[kind] = frozenset(values)
    sources = {k: frozenset({Source.HTML}) for ks in keys.values() for k in ks}
    return SiteIdProfile(landing_domain=domain, keys=keys, sources=sources)


# ---------------------------------------------------------------------------
# Metagraph oracle: triple loop over (family, key, site pair)
# ---------------------------------------------------------------------------

def brute_force_metagraph(profiles, normalizers=None):
    sites_per_key = {family: {} for family in FAMILY_ORDER}
    for family in FAMILY_ORDER:
        for p in profiles:
            for kind in KINDS_OF_FAMILY[family]:
                for key in p.keys_for(kind):
                    sites_per_key[family].setdefault(key, set()).add(p.landing_domain)
    weights = {}
    nodes = set()
    for family in FAMILY_ORDER:
        for sites in sites_per_key[family].values():
            nodes.update(sites)
        if normalizers is not None:
            n = normalizers.get(family, 0)
        else:
            n = sum(1 for sites in sites_per_key[family].values() if len(sites) > 1)
        if n == 0:
            continue
        for key, sites in sites_per_key[family].items():
            for u, v in itertools.combinations(sorted(sites), 2):
                weights[(u, v)] = weights.get((u, v), Fraction(0)) + Fraction(1, n)
    return nodes, weights


# ---------------------------------------------------------------------------
# Betweenness oracle: explicit shortest-path enumeration
# ---------------------------------------------------------------------------

def enumerate_edge_betweenness(adj):
    """Score every edge by summing, over unordered node pairs, the exact
    fraction of the pair's shortest paths that cross the edge."""
    nodes = sorted(adj)
    scores = {}
    for u in nodes:
        for v in adj[u]:
            if u < v:
                scores[(u, v)] = Fraction(0)
    for s, t in itertools.combinations(nodes, 2):
        paths = _all_shortest_paths(adj, s, t)
        if not paths:
            continue
        per_edge = {}
        for path in paths:
            for a, b in zip(path, path[1:]):
                e = (a, b) if a < b else (b, a)
                per_edge[e] = per_edge.get(e, 0) + 1
        for e, count in per_edge.items():
            scores[e] += Fraction(count, len(paths))
    return scores


def _all_shortest_paths(adj, s, t):
    dist = {s: 0}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    if t not in dist:
        return []
    paths = []

    def walk(node, acc):
        if node == t:
            paths.append(acc)
            return
        for w in adj[node]:
            if dist.get(w) == dist[node] + 1:
                walk(w, acc + [w])

    walk(s, [s])
    return paths


def components_of(adj):
    seen, out = set(), []
    for start in sorted(adj):
        if start in seen:
            continue
        stack, members = [start], {start}
        while stack:
            node = stack.pop()
            for nb in adj[node]:
                if nb not in members:
                    members.add(nb)
                    stack.append(nb)
        seen.update(members)
        out.append(frozenset(members))
    out.sort(key=lambda c: (-len(c), min(c)))
    return tuple(out)


def modularity_oracle(mg: Metagraph, communities):
    """Ordered-pair modularity: (1/2m) * sum_ij (A_ij - k_i k_j / 2m)."""
    m = sum(mg.weights.values(), Fraction(0))
    if m == 0:
        return Fraction(0)
    a = {}
    degree = {n: Fraction(0) for n in mg.nodes}
    for (u, v), w in mg.weights.items():
        a[(u, v)] = a[(v, u)] = w
        degree[u] += w
        degree[v] += w
    q = Fraction(0)
    for community in communities:
        for i in community:
            for j in community:
                q += a.get((i, j), Fraction(0)) - degree.get(i, Fraction(0)) * degree.get(j, Fraction(0)) / (2 * m)
    return q / (2 * m)


def girvan_newman_oracle(mg: Metagraph):
    """Replay edge removal with enumerated betweenness and full recompute,
    then pick the modularity-maximal recorded partition (earliest tie)."""
    adj = {n: set() for n in mg.nodes}
    for u, v in mg.weights:
        adj[u].add(v)
        adj[v].add(u)
    candidates = [components_of(adj)]
    while any(adj[n] for n in adj):
        scores = enumerate_edge_betweenness(adj)
        u, v = min(scores, key=lambda e: (-scores[e], e))
        adj[u].discard(v)
        adj[v].discard(u)
        parts = components_of(adj)
        if len(parts) > len(candidates[-1]):
            candidates.append(parts)
    best = candidates[0]
    best_q = modularity_oracle(mg, best)
    for parts in candidates[1:]:
        q = modularity_oracle(mg, parts)
        if q > best_q:
            best, best_q = parts, q
    return best, best_q


def metagraph_from_edges(edges, weight=Fraction(1)):
    mg = Metagraph()
    for item in edges:
        if len(item) == 3:
            u, v, w = item
        else:
            (u, v), w = item, weight
        mg.nodes.update((u, v))
        mg.weights[(min(u, v), max(u, v))] = Fraction(w)
    return mg


# ---------------------------------------------------------------------------
# Distribution samplers (generation oracles for the fitting machinery)
# ---------------------------------------------------------------------------

def sample_discrete_power_law(alpha, n, seed, xmin=1, table_max=2_000_000):
    """Inverse-CDF sampling of P(x) ~ x^-alpha / zeta(alpha, xmin) on
    integers >= xmin. Mass beyond table_max (~1e-5 at alpha=1.8) clamps."""
    xs = np.arange(xmin, table_max + 1, dtype=np.int64)
    cdf = 1.0 - zeta(alpha, xs + 1) / zeta(alpha, xmin)
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(n), side="left")
    return xs[np.minimum(idx, xs.size - 1)]


def sample_discrete_exponential(lam, n, seed, xmin=1):
    """Geometric sampling of P(x) ~ exp(-lam*x) on integers >= xmin."""
    rng = np.random.default_rng(seed)
    return xmin - 1 + rng.geometric(p=-math.expm1(-lam), size=n)


def hypergeometric_expected_richness(category_counts, k):
    """Closed-form E[distinct categories] for k draws without replacement."""
    n_total = sum(category_counts)
    return sum(1 - math.comb(n_total - c, k) / math.comb(n_total, k) for c in category_counts)


# ---------------------------------------------------------------------------
# Crawl fixtures
# ---------------------------------------------------------------------------

def fixture_corpus():
    """50 synthetic crawl records embedding every ID kind across HTML,
    request URLs and cookies, plus the documented false-positive shapes.

    Returns (records, manifest) where manifest maps
    domain -> kind -> {canonical key -> set of source names}. The manifest
    is written by hand alongside the pages; extraction must reproduce it
    exactly for 100% precision and recall.
    """
    records = []
    manifest = {}

    def add(i, html="", requests=(), cookies=(), expect=None, rank=None):
        domain = f"site{i:02d}.example"
        records.append(
            CrawlRecord(
                requested_domain=domain,
                landing_url=f"https://{domain}/",
                landing_domain=domain,
                page_text=html,
                request_urls=tuple(requests),
                cookies=tuple(cookies),
                rank=rank,
            )
        )
        manifest[domain] = expect or {}

    # Plain single-ID sites across all kinds and channels.
    add(0, html='<script data-ad-client="ca-pub-100000000001"></script>',
        expect={"publisher": {"pub-100000000001": {"html"}}}, rank=10)
    add(1, requests=["https://pagead2.googlesyndication.com/pagead/js/adsbygoogle.js?client=ca-pub-100000000002"],
        expect={"publisher": {"pub-100000000002": {"request"}}}, rank=20)
    add(2, html="ga('create', 'UA-20000002-1', 'auto');",
        expect={"tracking": {"UA-20000002": {"html"}}}, rank=30)
    add(3, requests=["https://www.google-analytics.com/collect?tid=UA-20000003-1"],
        expect={"tracking": {"UA-20000003": {"request"}}}, rank=40)
    add(4, cookies=[("__utma", "UA-20000004-2")],
        expect={"tracking": {"UA-20000004": {"cookie"}}}, rank=50)
    add(5, html="gtag('config', 'G-AB12CD34');",
        expect={"measurement": {"G-AB12CD34": {"html"}}}, rank=60)
    add(6, requests=["https://www.googletagmanager.com/gtag/js?id=G-EF56GH78"],
        expect={"measurement": {"G-EF56GH78": {"request"}}}, rank=70)
    add(7, html="<iframe src='ns.html?id=GTM-AAA111'></iframe>",
        expect={"container": {"GTM-AAA111": {"html"}}}, rank=80)
    add(8, requests=["https://www.googletagmanager.com/gtm.js?id=GTM-BBB222"],
        expect={"container": {"GTM-BBB222": {"request"}}}, rank=90)

    # Same Tracking account seen in two channels with different properties.
    add(9, html="ga('create', 'UA-20000009-1');",
        cookies=[("_tracker", "UA-20000009-2")],
        expect={"tracking": {"UA-20000009": {"html", "cookie"}}}, rank=100)

    # Multi-kind sites.
    add(10, html='ca-pub-100000000010 and gtag("config", "G-MULTI778")',
        requests=["https://www.googletagmanager.com/gtm.js?id=GTM-CCC333"],
        expect={"publisher": {"pub-100000000010": {"html"}},
                "measurement": {"G-MULTI778": {"html"}},
                "container": {"GTM-CCC333": {"request"}}}, rank=110)
    add(11, html="UA-20000011-1 UA-20000012-4",
        expect={"tracking": {"UA-20000011": {"html"}, "UA-20000012": {"html"}}}, rank=120)

    # Shared publisher across three sites (one co-ownership cluster).
    for j, i in enumerate((12, 13, 14)):
        add(i, html='<script>adsbygoogle client="ca-pub-777777777"</script>',
            requests=[f"https://site{i:02d}.example/asset{j}.js"],
            expect={"publisher": {"pub-777777777": {"html"}}}, rank=130 + 10 * j)

    # Shared analytics pair.
    for i in (15, 16):
        add(i, html="ga('create', 'UA-88888888-1', 'auto');",
            expect={"tracking": {"UA-88888888": {"html"}}}, rank=200 + i)

    # False positives that the filters must drop, next to one real key.
    add(17, html="Buy a G-BACKPACK today! gtag('config','G-REAL1234');",
        expect={"measurement": {"G-REAL1234": {"html"}}}, rank=300)
    add(18, html="promo G-APRIL2020 banner", expect={}, rank=310)
    add(19, html="GTM-NOODLE is on the menu", expect={}, rank=320)
    add(20, html="GTM-SALE2020 everything must go", expect={}, rank=330)

    # Boundary-rule negatives: embedded in longer tokens, or too short.
    add(21, html="XG-ABCDEFG is not an id", expect={}, rank=340)
    add(22, html="version pub-12345678 (too short) and UA-123-4", expect={}, rank=350)
    add(23, html="GTM-AB12 gtm-abc123 ua-4444-4", expect={}, rank=360)
    add(24, html="datapub-999999999 mid-token", expect={}, rank=370)
    add(25, html="pub-12345678901 contains no shorter id",
        expect={"publisher": {"pub-12345678901": {"html"}}}, rank=380)

    # Cookie-name scanning.
    add(26, cookies=[("UA-20000026-1", "on")],
        expect={"tracking": {"UA-20000026": {"cookie"}}}, rank=390)

    # Empty page (failed render) and request-only site.
    add(27, expect={}, rank=400)
    add(28, requests=["https://cdn.example/lib.js"], expect={}, rank=410)

    # A site with many tracking accounts (anomaly material).
    many = {f"UA-3{i:07d}": {"html"} for i in range(45)}
    add(29, html=" ".join(f"UA-3{i:07d}-1" for i in range(45)),
        expect={"tracking": many}, rank=420)

    # Bulk of ordinary single-publisher sites, each unique.
    for i in range(30, 50):
        add(i, html=f'<ins class="adsbygoogle" data-ad-client="ca-pub-10000000{i:04d}"></ins>',
            requests=[f"https://pagead2.googlesyndication.com/js?client=ca-pub-10000000{i:04d}"],
            expect={"publisher": {f"pub-10000000{i:04d}": {"html", "request"}}},
            rank=500 + i)

    return records, manifest


def profiles_to_manifest(profiles):
    """Project extracted profiles into the manifest shape for comparison."""
    out = {}
    for p in profiles:
        entry = {}
        for kind, keys in p.keys.items():
            entry[kind.value] = {
                key: {s.value for s in p.sources.get(key, frozenset())} for key in keys
            }
        out[p.landing_domain] = entry
    return out


def scale_corpus_lines(n_sites, seed=99):
    """n_sites synthetic crawl JSONL lines with realistic sharing structure.

    Sites 0 and 1 of every block of 50 form a co-owned pair sharing a
    publisher key (odd blocks also share an analytics account, giving two
    pruning weight tiers); ~5% of sites carry one intermediary analytics
    key that intermediary exclusion must strip; the rest carry unique IDs
    or none, mixed by a seeded RNG.
    """
    rng = random.Random(seed)
    lines = []
    for i in range(n_sites):
        domain = f"s{i:06d}.example"
        block, offset = divmod(i, 50)
        html_parts = ["<html><body>content"]
        requests = [f"https://{domain}/app.js"]
        cookies = []
        if offset in (0, 1):
            html_parts.append(f'data-ad-client="ca-pub-5550{block:08d}"')
            if block % 2 == 1:
                html_parts.append(f"ga('create','UA-7{block:06d}-1')")
        roll = rng.random()
        if roll < 0.05:
            requests.append("https://www.google-analytics.com/collect?tid=UA-99999999-9")
        elif roll < 0.13:
            html_parts.append(f'data-ad-client="ca-pub-9000{i:08d}"')
        if 0.13 <= roll < 0.55:
            html_parts.append(f"gtag('config','UA-8{i:06d}-1')")
            cookies.append({"name": "_tracker", "value": f"UA-8{i:06d}-2"})
        if 0.55 <= roll < 0.70:
            html_parts.append(f"gtag('config','G-Z{i:06d}X')")
        if 0.70 <= roll < 0.80:
            html_parts.append(f"gtm.start id=GTM-Q{i:06d}")
        html_parts.append("</body></html>")
        lines.append(
            json.dumps(
                {
                    "domain": domain,
                    "landing_url": f"https://{domain}/",
                    "html": " ".join(html_parts),
                    "requests": requests,
                    "cookies": cookies,
                    "rank": i + 1,
                }
            )
        )
    return lines
