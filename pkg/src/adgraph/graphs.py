"""Site-identifier bipartite graphs and the weighted site-site metagraph.

Three bipartite graphs (one per identifier family; Tracking and Measurement
share the analytics family) project into an undirected metagraph: every
identifier shared by two sites adds 1/n to their edge weight, where n is
the number of distinct identifiers of that family found on more than one
site. Weights are exact rationals so downstream pruning ties are exact.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

from .extractor import IdKind, SiteIdProfile


class IdFamily(enum.Enum):
    PUBLISHER = "publisher"
    ANALYTICS = "analytics"
    CONTAINER = "container"


FAMILY_ORDER: tuple[IdFamily, ...] = (
    IdFamily.PUBLISHER,
    IdFamily.ANALYTICS,
    IdFamily.CONTAINER,
)

FAMILY_OF_KIND: dict[IdKind, IdFamily] = {
    IdKind.PUBLISHER: IdFamily.PUBLISHER,
    IdKind.TRACKING: IdFamily.ANALYTICS,
    IdKind.MEASUREMENT: IdFamily.ANALYTICS,
    IdKind.CONTAINER: IdFamily.CONTAINER,
}

KINDS_OF_FAMILY: dict[IdFamily, tuple[IdKind, ...]] = {
    IdFamily.PUBLISHER: (IdKind.PUBLISHER,),
    IdFamily.ANALYTICS: (IdKind.TRACKING, IdKind.MEASUREMENT),
    IdFamily.CONTAINER: (IdKind.CONTAINER,),
}

Edge = tuple[str, str]


def _edge(u: str, v: str) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass
class BipartiteGraph:
    """Directed site -> identifier edges for one identifier family."""

    family: IdFamily
    site_to_keys: dict[str, frozenset[str]] = field(default_factory=dict)
    key_to_sites: dict[str, frozenset[str]] = field(default_factory=dict)

    @property
    def site_nodes(self) -> set[str]:
        return set(self.site_to_keys)

    @property
    def id_nodes(self) -> set[str]:
        return set(self.key_to_sites)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.site_to_keys.values())

    def edges(self) -> Iterable[tuple[str, str]]:
        for site in sorted(self.site_to_keys):
            for key in sorted(self.site_to_keys[site]):
                yield site, key


@dataclass
class Metagraph:
    """Undirected, rationally-weighted site-site graph."""

    nodes: set[str] = field(default_factory=set)
    weights: dict[Edge, Fraction] = field(default_factory=dict)
    normalizers: dict[IdFamily, int] = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return len(self.weights)

    def weight(self, u: str, v: str) -> Fraction:
        return self.weights.get(_edge(u, v), Fraction(0))

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in self.weights:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree_weight(self, node: str) -> Fraction:
        total = Fraction(0)
        for (u, v), w in self.weights.items():
            if node in (u, v):
                total += w
        return total

    def total_weight(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))


@dataclass(frozen=True)
class Component:
    members: frozenset[str]

    @property
    def size(self) -> int:
        return len(self.members)


def build_bipartite(profiles: Sequence[SiteIdProfile], family: IdFamily) -> BipartiteGraph:
    """One site node per profile with at least one key in the family, one id
    node per distinct canonical key, one edge per (site, key) pair."""
    site_to_keys: dict[str, set[str]] = {}
    key_to_sites: dict[str, set[str]] = {}
    for p in profiles:
        keys: set[str] = set()
        for kind in KINDS_OF_FAMILY[family]:
            keys.update(p.keys_for(kind))
        if not keys:
            continue
        site_to_keys.setdefault(p.landing_domain, set()).update(keys)
        for key in keys:
            key_to_sites.setdefault(key, set()).add(p.landing_domain)
    return BipartiteGraph(
        family=family,
        site_to_keys={s: frozenset(k) for s, k in site_to_keys.items()},
        key_to_sites={k: frozenset(s) for k, s in key_to_sites.items()},
    )


def connected_components(graph: BipartiteGraph | Metagraph) -> list[Component]:
    """Undirected components, largest first, ties by smallest member."""
    adj: dict[str, set[str]]
    if isinstance(graph, BipartiteGraph):
        adj = {n: set() for n in list(graph.site_to_keys) + list(graph.key_to_sites)}
        for site, keys in graph.site_to_keys.items():
            for key in keys:
                adj[site].add(key)
                adj[key].add(site)
    else:
        adj = graph.adjacency()
    seen: set[str] = set()
    components: list[Component] = []
    for start in sorted(adj):
        if start in seen:
            continue
        stack = [start]
        members = {start}
        seen.add(start)
        while stack:
            node = stack.pop()
            for nb in adj[node]:
                if nb not in members:
                    members.add(nb)
                    seen.add(nb)
                    stack.append(nb)
        components.append(Component(frozenset(members)))
    components.sort(key=lambda c: (-c.size, min(c.members)))
    return components


def family_normalizers(profiles: Sequence[SiteIdProfile]) -> dict[IdFamily, int]:
    """Per family, the number of distinct canonical keys found on more than
    one site of the given profile set."""
    out: dict[IdFamily, int] = {}
    for family in FAMILY_ORDER:
        sites_per_key: dict[str, set[str]] = {}
        for p in profiles:
            for kind in KINDS_OF_FAMILY[family]:
                for key in p.keys_for(kind):
                    sites_per_key.setdefault(key, set()).add(p.landing_domain)
        out[family] = sum(1 for sites in sites_per_key.values() if len(sites) > 1)
    return out


def build_metagraph(
    publisher_bg: BipartiteGraph,
    analytics_bg: BipartiteGraph,
    container_bg: BipartiteGraph,
    normalizers: Mapping[IdFamily, int] | None = None,
) -> Metagraph:
    """Project the three bipartite graphs onto sites.

    For every family key shared by >= 2 sites, each unordered site pair
    sharing it gains 1/n_family weight. By default n_family counts the
    multi-site keys of the graphs being projected; pass ``normalizers``
    (e.g. from family_normalizers over a pre-exclusion profile set) to
    normalize against a different population.
    """
    graphs = {
        IdFamily.PUBLISHER: publisher_bg,
        IdFamily.ANALYTICS: analytics_bg,
        IdFamily.CONTAINER: container_bg,
    }
    for family, bg in graphs.items():
        if bg.family is not family:
            raise ValueError(f"expected a {family.value} bipartite graph, got {bg.family.value}")

    effective: dict[IdFamily, int] = {}
    for family, bg in graphs.items():
        if normalizers is not None:
            effective[family] = normalizers.get(family, 0)
        else:
            effective[family] = sum(1 for sites in bg.key_to_sites.values() if len(sites) > 1)

    mg = Metagraph(normalizers=dict(effective))
    for bg in graphs.values():
        mg.nodes.update(bg.site_to_keys)
    for family, bg in graphs.items():
        n = effective[family]
        if n == 0:
            continue
        unit = Fraction(1, n)
        for key in sorted(bg.key_to_sites):
            sites = sorted(bg.key_to_sites[key])
            if len(sites) < 2:
                continue
            for i, u in enumerate(sites):
                for v in sites[i + 1:]:
                    e = _edge(u, v)
                    mg.weights[e] = mg.weights.get(e, Fraction(0)) + unit
    return mg


def exclude_intermediaries(
    profiles: Sequence[SiteIdProfile], threshold: float = 100
) -> list[SiteIdProfile]:
    """Strip canonical keys present on more than ``threshold`` sites.

    Intermediary monetization platforms place one ID across hundreds of
    client sites; their keys drown the co-ownership signal. Profiles keep
    their identity (possibly with no keys left); graph construction ignores
    keyless sites.
    """
    if threshold < 2:
        raise ValueError("threshold must be >= 2")
    if math.isinf(threshold):
        return list(profiles)
    sites_per_key: dict[str, set[str]] = {}
    for p in profiles:
        for keys in p.keys.values():
            for key in keys:
                sites_per_key.setdefault(key, set()).add(p.landing_domain)
    heavy = {k for k, sites in sites_per_key.items() if len(sites) > threshold}
    if not heavy:
        return list(profiles)
    out = []
    for p in profiles:
        keys = {kind: frozenset(ks - heavy) for kind, ks in p.keys.items()}
        keys = {kind: ks for kind, ks in keys.items() if ks}
        kept = {k for ks in keys.values() for k in ks}
        out.append(
            SiteIdProfile(
                landing_domain=p.landing_domain,
                keys=keys,
                sources={k: s for k, s in p.sources.items() if k in kept},
                raw_counts=dict(p.raw_counts),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Edge-list CSV dumps
# ---------------------------------------------------------------------------

def dump_bipartite_csv(graph: BipartiteGraph, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["site", "key", "family"])
    for site, key in graph.edges():
        writer.writerow([site, key, graph.family.value])


def load_bipartite_csv(source: str | Path | IO[str]) -> BipartiteGraph:
    rows = _read_csv_rows(source)
    header, rows = rows[0], rows[1:]
    if header != ["site", "key", "family"]:
        raise ValueError("bipartite CSV must start with header site,key,family")
    family: IdFamily | None = None
    site_to_keys: dict[str, set[str]] = {}
    key_to_sites: dict[str, set[str]] = {}
    for site, key, fam in rows:
        f = IdFamily(fam)
        if family is None:
            family = f
        elif family is not f:
            raise ValueError("bipartite CSV mixes families")
        site_to_keys.setdefault(site, set()).add(key)
        key_to_sites.setdefault(key, set()).add(site)
    if family is None:
        raise ValueError("bipartite CSV has no edges")
    return BipartiteGraph(
        family=family,
        site_to_keys={s: frozenset(k) for s, k in site_to_keys.items()},
        key_to_sites={k: frozenset(s) for k, s in key_to_sites.items()},
    )


def dump_metagraph_csv(mg: Metagraph, stream: IO[str]) -> None:
    """Edge list ``site_a,site_b,weight`` with site_a < site_b, as decimals.

    Isolated metagraph nodes are not representable in the edge list.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["site_a", "site_b", "weight"])
    for (u, v) in sorted(mg.weights):
        writer.writerow([u, v, repr(float(mg.weights[(u, v)]))])


def load_metagraph_csv(source: str | Path | IO[str]) -> Metagraph:
    rows = _read_csv_rows(source)
    header, rows = rows[0], rows[1:]
    if header != ["site_a", "site_b", "weight"]:
        raise ValueError("metagraph CSV must start with header site_a,site_b,weight")
    mg = Metagraph()
    for u, v, w in rows:
        if u >= v:
            raise ValueError(f"metagraph rows need site_a < site_b, got {u!r},{v!r}")
        mg.nodes.update((u, v))
        mg.weights[(u, v)] = Fraction(w)
    return mg


def _read_csv_rows(source: str | Path | IO[str]) -> list[list[str]]:
    if hasattr(source, "read"):
        rows = [row for row in csv.reader(source) if row]
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError("empty CSV")
    return rows
