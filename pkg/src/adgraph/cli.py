"""File-based command-line pipeline.

Subcommands compose through files only (no hidden state): extract ->
graph -> communities, plus stats/history analyses and a one-shot report
bundle. Every run drops a config-echo JSON with the effective parameters
and seed next to its outputs; outputs are UTF-8 with LF endings and
deterministically ordered, so identical invocations produce identical
bytes. Exit codes: 0 success, 1 input error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .corpus import (
    CanonicalizationError,
    FormatError,
    assign_ranks,
    dedup_by_landing,
    load_category_map,
    load_rank_list,
    parse_crawl_jsonl,
)
from .communities import (
    community_size_distribution,
    girvan_newman,
    prune_edges,
)
from .extractor import (
    KIND_ORDER,
    dump_profiles,
    extract_profiles,
    flag_anomalies,
    load_blocklist,
    load_dictionary,
    load_profiles,
    summarize_extraction,
)
from .graphs import (
    FAMILY_ORDER,
    IdFamily,
    build_bipartite,
    build_metagraph,
    connected_components,
    dump_bipartite_csv,
    dump_metagraph_csv,
    exclude_intermediaries,
    family_normalizers,
    load_metagraph_csv,
)
from .history import (
    PublisherClass,
    TRANSITION_ORDER,
    class_population_series,
    coverage_series,
    load_snapshots,
    publisher_id_count_series,
    top_publishers_series,
    transition_series,
)
from .stats import (
    DEFAULT_SEED,
    category_distribution,
    fit_power_law,
    loglikelihood_ratio,
    per_site_id_counts,
    poisson_sampling_baseline,
    popularity_by_size,
    publisher_sizes,
    richness_vs_baseline,
    shannon_diversity,
)


class ConfigError(ValueError):
    """Invalid parameter combination (exit code 2)."""


def _default_threads() -> int:
    return int(os.environ.get("ADGRAPH_THREADS", "1"))


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _echo_config(directory: Path, command: str, args: argparse.Namespace) -> None:
    effective = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in sorted(vars(args).items())
        if k != "func"
    }
    payload = {"command": command, "version": __version__, "parameters": effective}
    _write_json(directory / f"config_{command.replace(' ', '_')}.json", payload)


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def _cmd_extract(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    dictionary = load_dictionary(args.dict)
    blocklist = load_blocklist(args.blocklist)
    with open(args.infile, encoding="utf-8") as fh:
        parsed = parse_crawl_jsonl(fh)
    records = parsed.records
    if args.ranks:
        records = assign_ranks(records, load_rank_list(args.ranks))
    records = dedup_by_landing(records)
    profiles = extract_profiles(records, dictionary, blocklist, threads=args.threads)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        dump_profiles(profiles, fh)

    summary = summarize_extraction(profiles, corpus_size=len(records))
    summary_obj = summary.to_json_obj()
    summary_obj["skipped_lines"] = len(parsed.skips)
    summary_obj["anomalies"] = [
        {"domain": d, "distinct_keys": n} for d, n in flag_anomalies(profiles, args.anomaly_threshold)
    ]
    _write_json(out.parent / "summary.json", summary_obj)

    _write_csv(
        out.parent / "site_ranks.csv",
        ["rank", "domain"],
        [[r.rank, r.landing_domain] for r in sorted(records, key=lambda r: r.landing_domain) if r.rank],
    )
    if args.snapshot_id:
        _write_json(
            out.parent / "manifest.json",
            {"snapshot_id": args.snapshot_id, "total_sites": len(records)},
        )
    _echo_config(out.parent, "extract", args)
    return 0


# ---------------------------------------------------------------------------
# graph
# ---------------------------------------------------------------------------

def _build_graphs(profiles, threshold, keep_intermediaries, normalizer_mode):
    normalizers = None
    if normalizer_mode == "pre-exclusion":
        normalizers = family_normalizers(profiles)
    if not keep_intermediaries:
        profiles = exclude_intermediaries(profiles, threshold)
    graphs = {family: build_bipartite(profiles, family) for family in FAMILY_ORDER}
    metagraph = build_metagraph(
        graphs[IdFamily.PUBLISHER],
        graphs[IdFamily.ANALYTICS],
        graphs[IdFamily.CONTAINER],
        normalizers=normalizers,
    )
    return profiles, graphs, metagraph


def _cmd_graph(args: argparse.Namespace) -> int:
    if args.intermediary_threshold < 2:
        raise ConfigError("--intermediary-threshold must be >= 2")
    profiles = load_profiles(args.profiles)
    _, graphs, metagraph = _build_graphs(
        profiles, args.intermediary_threshold, args.keep_intermediaries, args.normalizer_mode
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for family, bg in graphs.items():
        with open(out_dir / f"bipartite_{family.value}.csv", "w", encoding="utf-8", newline="") as fh:
            dump_bipartite_csv(bg, fh)
    with open(out_dir / "metagraph.csv", "w", encoding="utf-8", newline="") as fh:
        dump_metagraph_csv(metagraph, fh)
    _echo_config(out_dir, "graph", args)
    return 0


# ---------------------------------------------------------------------------
# communities
# ---------------------------------------------------------------------------

def _partition_outputs(partition, out_dir: Path) -> None:
    rows = []
    ordered = sorted(partition.communities, key=lambda c: (-len(c), min(c)))
    for community_id, community in enumerate(ordered):
        for site in sorted(community):
            rows.append([community_id, site])
    _write_csv(out_dir / "communities.csv", ["community_id", "site"], rows)
    distribution = community_size_distribution(partition)
    _write_json(
        out_dir / "communities_summary.json",
        {
            "community_count": len(partition.communities),
            "modularity": float(partition.modularity),
            "size_distribution": distribution.to_json_obj(),
        },
    )


def _cmd_communities(args: argparse.Namespace) -> int:
    if not 0 < args.top_fraction <= 1:
        raise ConfigError("--top-fraction must be in (0, 1]")
    if args.max_communities is not None and args.max_communities < 1:
        raise ConfigError("--max-communities must be >= 1")
    metagraph = load_metagraph_csv(args.metagraph)
    pruned = prune_edges(metagraph, args.top_fraction)
    partition = girvan_newman(pruned, args.max_communities, args.weighted_paths)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _partition_outputs(partition, out_dir)
    _echo_config(out_dir, "communities", args)
    return 0


# ---------------------------------------------------------------------------
# stats subtopics
# ---------------------------------------------------------------------------

def _cmd_stats_ids(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    histograms = per_site_id_counts(profiles)
    rows = []
    for kind in KIND_ORDER:
        for count, fraction in histograms[kind].items():
            rows.append([kind.value, count, _fmt(fraction)])
    _write_csv(Path(args.out), ["kind", "count", "fraction"], rows)
    _echo_config(Path(args.out).parent, "stats_ids", args)
    return 0


def _load_site_ranks(path) -> dict[str, int]:
    ranks = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["rank", "domain"]:
            raise FormatError(f"{path}: expected header rank,domain")
        for rank, domain in reader:
            ranks[domain] = int(rank)
    return ranks


def _cmd_stats_sizes(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    ranks = _load_site_ranks(args.site_ranks) if args.site_ranks else None
    bipartite = build_bipartite(profiles, IdFamily(args.family))
    records = publisher_sizes(bipartite, ranks)
    rows = [
        [
            r.key,
            r.size,
            _fmt(r.mean_rank) if r.mean_rank is not None else "",
            _fmt(r.median_rank) if r.median_rank is not None else "",
        ]
        for r in records
    ]
    _write_csv(Path(args.out), ["key", "size", "mean_rank", "median_rank"], rows)
    _echo_config(Path(args.out).parent, "stats_sizes", args)
    return 0


def _cmd_stats_powerlaw(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    bipartite = build_bipartite(profiles, IdFamily(args.family))
    if args.population == "publishers":
        sizes = [r.size for r in publisher_sizes(bipartite)]
    else:
        sizes = [c.size for c in connected_components(bipartite)]
    fit = fit_power_law(sizes)
    fit.lr_statistic, fit.lr_p_value = loglikelihood_ratio(sizes, fit)
    obj = fit.to_json_obj()
    obj["population"] = args.population
    obj["family"] = args.family
    _write_json(Path(args.out), obj)
    _echo_config(Path(args.out).parent, "stats_powerlaw", args)
    return 0


def _cmd_stats_popularity(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    ranks = _load_site_ranks(args.site_ranks)
    bipartite = build_bipartite(profiles, IdFamily.PUBLISHER)
    records = publisher_sizes(bipartite, ranks)
    series, fit = popularity_by_size(records, args.max_size)
    _write_csv(
        Path(args.out),
        ["size", "mean_rank", "median_rank"],
        [[size, _fmt(mean), _fmt(median)] for size, mean, median in series],
    )
    _write_json(Path(args.out).parent / "popularity_fit.json", fit.to_json_obj())
    _echo_config(Path(args.out).parent, "stats_popularity", args)
    return 0


def _cmd_stats_categories(args: argparse.Namespace) -> int:
    profiles = load_profiles(args.profiles)
    categories = load_category_map(args.categories)
    histogram = category_distribution(profiles, categories)
    _write_csv(
        Path(args.out),
        ["category", "fraction"],
        [[label, _fmt(fraction)] for label, fraction in histogram.items()],
    )
    _echo_config(Path(args.out).parent, "stats_categories", args)
    return 0


def _read_communities_csv(path) -> list[tuple[int, list[str]]]:
    groups: dict[int, list[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["community_id", "site"]:
            raise FormatError(f"{path}: expected header community_id,site")
        for community_id, site in reader:
            groups.setdefault(int(community_id), []).append(site)
    return sorted(groups.items())


def _cmd_stats_diversity(args: argparse.Namespace) -> int:
    categories = load_category_map(args.categories)
    groups = _read_communities_csv(args.communities)
    rows = []
    for community_id, sites in groups:
        labels = [categories[s] for s in sites if s in categories]
        if not labels:
            continue
        report = shannon_diversity(labels)
        rows.append(
            [community_id, len(sites), len(labels), report.richness,
             _fmt(report.shannon_h), _fmt(report.h_max)]
        )
    _write_csv(
        Path(args.out),
        ["community_id", "size", "labeled", "richness", "shannon_h", "h_max"],
        rows,
    )
    _echo_config(Path(args.out).parent, "stats_diversity", args)
    return 0


def _cmd_stats_poisson(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if args.size < 1:
        raise ConfigError("--size must be >= 1")
    categories = load_category_map(args.categories)
    mean_richness = poisson_sampling_baseline(categories, args.size, args.trials, args.seed)
    _write_json(
        Path(args.out),
        {
            "size": args.size,
            "trials": args.trials,
            "seed": args.seed,
            "labeled_sites": len(categories),
            "mean_richness": mean_richness,
        },
    )
    _echo_config(Path(args.out).parent, "stats_poisson", args)
    return 0


# ---------------------------------------------------------------------------
# history subtopics (tidy CSV: scope, metric, value)
# ---------------------------------------------------------------------------

def _cmd_history_coverage(args: argparse.Namespace) -> int:
    snapshots = load_snapshots(args.snapshots)
    series = coverage_series(snapshots)
    rows = []
    for snapshot_id, pub, track in series.rows:
        rows.append([snapshot_id, "publisher_fraction", _fmt(pub)])
        rows.append([snapshot_id, "tracking_fraction", _fmt(track)])
    rows.append(["all", "publisher_fraction_mean", _fmt(series.publisher_mean)])
    rows.append(["all", "publisher_fraction_sd", _fmt(series.publisher_sd)])
    rows.append(["all", "tracking_fraction_mean", _fmt(series.tracking_mean)])
    rows.append(["all", "tracking_fraction_sd", _fmt(series.tracking_sd)])
    _write_csv(Path(args.out), ["scope", "metric", "value"], rows)
    _echo_config(Path(args.out).parent, "history_coverage", args)
    return 0


def _cmd_history_idcounts(args: argparse.Namespace) -> int:
    snapshots = load_snapshots(args.snapshots)
    rows = []
    for row in publisher_id_count_series(snapshots):
        rows.append([row.snapshot_id, "frac_one", _fmt(row.frac_one)])
        rows.append([row.snapshot_id, "frac_two", _fmt(row.frac_two)])
        rows.append([row.snapshot_id, "frac_three_plus", _fmt(row.frac_three_plus)])
        rows.append([row.snapshot_id, "mean_keys", _fmt(row.mean_keys)])
    _write_csv(Path(args.out), ["scope", "metric", "value"], rows)
    _echo_config(Path(args.out).parent, "history_idcounts", args)
    return 0


def _cmd_history_transitions(args: argparse.Namespace) -> int:
    snapshots = load_snapshots(args.snapshots)
    series = transition_series(snapshots, per_pair_universe=args.per_pair_universe)
    rows = []
    for from_id, to_id, counts in series.intervals:
        scope = f"{from_id}..{to_id}"
        for cls in TRANSITION_ORDER:
            rows.append([scope, cls.value, counts[cls]])
    for cls in TRANSITION_ORDER:
        fit = series.trends[cls]
        if fit is not None:
            rows.append(["trend", f"{cls.value}_slope", _fmt(fit.slope)])
    _write_csv(Path(args.out), ["scope", "metric", "value"], rows)
    _echo_config(Path(args.out).parent, "history_transitions", args)
    return 0


def _cmd_history_classes(args: argparse.Namespace) -> int:
    snapshots = load_snapshots(args.snapshots)
    series = class_population_series(snapshots)
    rows = []
    for snapshot_id, counts in series.rows:
        for cls in PublisherClass:
            rows.append([snapshot_id, cls.name.lower(), counts[cls]])
    for cls in PublisherClass:
        slope = series.slopes[cls]
        if slope is not None:
            rows.append(["trend", f"{cls.name.lower()}_slope", _fmt(slope)])
    _write_csv(Path(args.out), ["scope", "metric", "value"], rows)
    _echo_config(Path(args.out).parent, "history_classes", args)
    return 0


def _cmd_history_top(args: argparse.Namespace) -> int:
    if args.k < 1:
        raise ConfigError("--k must be >= 1")
    snapshots = load_snapshots(args.snapshots)
    series = top_publishers_series(snapshots, args.k)
    rows = []
    for snapshot_id, own, fixed in series.rows:
        rows.append([snapshot_id, "top_k_sum", own])
        rows.append([snapshot_id, "fixed_top_k_sum", fixed])
    _write_csv(Path(args.out), ["scope", "metric", "value"], rows)
    _echo_config(Path(args.out).parent, "history_top", args)
    return 0


# ---------------------------------------------------------------------------
# report: the full pipeline in one output directory
# ---------------------------------------------------------------------------

def _cmd_report(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if not 0 < args.top_fraction <= 1:
        raise ConfigError("--top-fraction must be in (0, 1]")
    if args.intermediary_threshold < 2:
        raise ConfigError("--intermediary-threshold must be >= 2")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []
    skipped: list[dict[str, str]] = []

    def emit(name: str) -> Path:
        artifacts.append(name)
        return out_dir / name

    dictionary = load_dictionary(args.dict)
    blocklist = load_blocklist(args.blocklist)
    with open(args.infile, encoding="utf-8") as fh:
        parsed = parse_crawl_jsonl(fh)
    records = parsed.records
    if args.ranks:
        records = assign_ranks(records, load_rank_list(args.ranks))
    records = dedup_by_landing(records)
    profiles = extract_profiles(records, dictionary, blocklist, threads=args.threads)

    with open(emit("profiles.jsonl"), "w", encoding="utf-8", newline="\n") as fh:
        dump_profiles(profiles, fh)
    summary = summarize_extraction(profiles, corpus_size=len(records)).to_json_obj()
    summary["skipped_lines"] = len(parsed.skips)
    summary["anomalies"] = [
        {"domain": d, "distinct_keys": n} for d, n in flag_anomalies(profiles)
    ]
    _write_json(emit("summary.json"), summary)
    site_ranks = {
        r.landing_domain: r.rank
        for r in records
        if r.rank is not None
    }
    _write_csv(
        emit("site_ranks.csv"),
        ["rank", "domain"],
        [[rank, domain] for domain, rank in sorted(site_ranks.items())],
    )

    _, graphs, metagraph = _build_graphs(
        profiles, args.intermediary_threshold, False, args.normalizer_mode
    )
    for family, bg in graphs.items():
        with open(emit(f"bipartite_{family.value}.csv"), "w", encoding="utf-8", newline="") as fh:
            dump_bipartite_csv(bg, fh)
    with open(emit("metagraph.csv"), "w", encoding="utf-8", newline="") as fh:
        dump_metagraph_csv(metagraph, fh)

    pruned = prune_edges(metagraph, args.top_fraction)
    partition = girvan_newman(pruned)
    _partition_outputs(partition, out_dir)
    artifacts.extend(["communities.csv", "communities_summary.json"])

    # Community report skeleton: the legal entity column is filled by hand.
    ordered = sorted(partition.communities, key=lambda c: (-len(c), min(c)))
    _write_csv(
        emit("communities_report.csv"),
        ["community_id", "size", "entity", "websites"],
        [[i, len(c), "", ";".join(sorted(c))] for i, c in enumerate(ordered)],
    )

    histograms = per_site_id_counts(profiles)
    _write_csv(
        emit("id_counts.csv"),
        ["kind", "count", "fraction"],
        [
            [kind.value, count, _fmt(fraction)]
            for kind in KIND_ORDER
            for count, fraction in histograms[kind].items()
        ],
    )
    records_by_size = publisher_sizes(graphs[IdFamily.PUBLISHER], site_ranks or None)
    _write_csv(
        emit("publisher_sizes.csv"),
        ["key", "size", "mean_rank", "median_rank"],
        [
            [
                r.key,
                r.size,
                _fmt(r.mean_rank) if r.mean_rank is not None else "",
                _fmt(r.median_rank) if r.median_rank is not None else "",
            ]
            for r in records_by_size
        ],
    )

    try:
        sizes = [r.size for r in records_by_size]
        fit = fit_power_law(sizes)
        fit.lr_statistic, fit.lr_p_value = loglikelihood_ratio(sizes, fit)
        _write_json(emit("powerlaw_publisher.json"), fit.to_json_obj())
    except ValueError as exc:
        skipped.append({"analysis": "powerlaw_publisher", "reason": str(exc)})
    try:
        series, fit = popularity_by_size(records_by_size)
        _write_csv(
            emit("popularity.csv"),
            ["size", "mean_rank", "median_rank"],
            [[size, _fmt(mean), _fmt(median)] for size, mean, median in series],
        )
        _write_json(emit("popularity_fit.json"), fit.to_json_obj())
    except ValueError as exc:
        skipped.append({"analysis": "popularity", "reason": str(exc)})

    if args.categories:
        categories = load_category_map(args.categories)
        _write_csv(
            emit("categories.csv"),
            ["category", "fraction"],
            [[label, _fmt(f)] for label, f in category_distribution(profiles, categories).items()],
        )
        diversity_rows = []
        for community_id, community in enumerate(ordered):
            labels = [categories[s] for s in sorted(community) if s in categories]
            if not labels:
                continue
            report = shannon_diversity(labels)
            diversity_rows.append(
                [community_id, len(community), len(labels), report.richness,
                 _fmt(report.shannon_h), _fmt(report.h_max)]
            )
        _write_csv(
            emit("diversity.csv"),
            ["community_id", "size", "labeled", "richness", "shannon_h", "h_max"],
            diversity_rows,
        )
        try:
            richness = richness_vs_baseline(
                [sorted(c) for c in ordered], categories, args.trials, args.seed
            )
            _write_csv(
                emit("richness_vs_baseline.csv"),
                ["size", "observed_mean", "baseline_mean"],
                [[size, _fmt(obs), _fmt(base)] for size, obs, base in richness],
            )
        except ValueError as exc:
            skipped.append({"analysis": "richness_vs_baseline", "reason": str(exc)})

    _write_json(
        emit("report_manifest.json"),
        {"artifacts": sorted(set(artifacts)), "skipped": skipped},
    )
    _echo_config(out_dir, "report", args)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adgraph",
        description="Detect website administration from publisher-specific IDs.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="crawl JSONL -> profiles JSONL + summary")
    p.add_argument("--in", dest="infile", required=True, help="crawl JSONL input")
    p.add_argument("--out", required=True, help="profiles JSONL output path")
    p.add_argument("--dict", default=None, help="dictionary file (default: packaged)")
    p.add_argument("--blocklist", default=None, help="keyword blocklist file (default: packaged)")
    p.add_argument("--ranks", default=None, help="rank,domain CSV keyed by requested domain")
    p.add_argument("--snapshot-id", default=None, help="also write manifest.json with this id")
    p.add_argument("--anomaly-threshold", type=int, default=40)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("graph", help="profiles -> bipartite + metagraph CSV dumps")
    p.add_argument("--profiles", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--intermediary-threshold", type=float, default=100)
    p.add_argument("--keep-intermediaries", action="store_true")
    p.add_argument(
        "--normalizer-mode",
        choices=["projected", "pre-exclusion"],
        default="projected",
        help="population over which the 1/n weights are computed",
    )
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("communities", help="metagraph -> prune -> Girvan-Newman")
    p.add_argument("--metagraph", required=True, help="metagraph edge CSV")
    p.add_argument("--top-fraction", type=float, default=0.05)
    p.add_argument("--max-communities", type=int, default=None)
    p.add_argument("--weighted-paths", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_communities)

    stats = sub.add_parser("stats", help="distributional analyses")
    stats_sub = stats.add_subparsers(dest="topic", required=True)

    p = stats_sub.add_parser("ids", help="per-site identifier count histogram")
    p.add_argument("--profiles", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_ids)

    p = stats_sub.add_parser("sizes", help="publisher portfolio sizes")
    p.add_argument("--profiles", required=True)
    p.add_argument("--site-ranks", default=None, help="rank,domain CSV keyed by landing domain")
    p.add_argument("--family", choices=[f.value for f in FAMILY_ORDER], default="publisher")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_sizes)

    p = stats_sub.add_parser("powerlaw", help="power-law fit + LR test")
    p.add_argument("--profiles", required=True)
    p.add_argument("--family", choices=[f.value for f in FAMILY_ORDER], default="publisher")
    p.add_argument("--population", choices=["publishers", "components"], default="publishers")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_powerlaw)

    p = stats_sub.add_parser("popularity", help="rank vs publisher size")
    p.add_argument("--profiles", required=True)
    p.add_argument("--site-ranks", required=True)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_popularity)

    p = stats_sub.add_parser("categories", help="category histogram of Publisher-bearing sites")
    p.add_argument("--profiles", required=True)
    p.add_argument("--categories", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_categories)

    p = stats_sub.add_parser("diversity", help="Shannon diversity per community")
    p.add_argument("--communities", required=True, help="community_id,site CSV")
    p.add_argument("--categories", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_diversity)

    p = stats_sub.add_parser("poisson", help="random-sampling richness baseline")
    p.add_argument("--categories", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats_poisson)

    history = sub.add_parser("history", help="longitudinal snapshot analyses")
    history_sub = history.add_subparsers(dest="topic", required=True)

    for name, func, extra in (
        ("coverage", _cmd_history_coverage, ()),
        ("idcounts", _cmd_history_idcounts, ()),
        ("transitions", _cmd_history_transitions, ("per_pair",)),
        ("classes", _cmd_history_classes, ()),
        ("top", _cmd_history_top, ("k",)),
    ):
        p = history_sub.add_parser(name)
        p.add_argument("--snapshots", nargs="+", required=True, help="snapshot directories")
        p.add_argument("--out", required=True)
        if "per_pair" in extra:
            p.add_argument("--per-pair-universe", action="store_true")
        if "k" in extra:
            p.add_argument("--k", type=int, default=10)
        p.set_defaults(func=func)

    p = sub.add_parser("report", help="full pipeline into one directory")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dict", default=None)
    p.add_argument("--blocklist", default=None)
    p.add_argument("--ranks", default=None)
    p.add_argument("--categories", default=None)
    p.add_argument("--intermediary-threshold", type=float, default=100)
    p.add_argument(
        "--normalizer-mode", choices=["projected", "pre-exclusion"], default="projected"
    )
    p.add_argument("--top-fraction", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.set_defaults(func=_cmd_report)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    func: Callable[[argparse.Namespace], int] = args.func
    try:
        return func(args)
    except ConfigError as exc:
        print(f"adgraph: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, FormatError, CanonicalizationError, ValueError, KeyError) as exc:
        print(f"adgraph: input error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
