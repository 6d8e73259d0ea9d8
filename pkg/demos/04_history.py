"""
Longitudinal analysis over snapshots
====================================

Snapshots are timestamped extraction passes. The history layer tracks
identifier coverage, classifies per-site publisher changes between
consecutive snapshots, and watches the publisher size classes drift.
"""

from adgraph import (
    Snapshot,
    class_population_series,
    classify_publisher,
    classify_transition,
    coverage_series,
    publisher_id_count_series,
    top_publishers_series,
    transition_series,
)
from adgraph.extractor import IdKind, SiteIdProfile


def profile(domain, *publisher_keys):
    keys = {IdKind.PUBLISHER: frozenset(publisher_keys)} if publisher_keys else {}
    return SiteIdProfile(domain, keys, {})


# Three quarterly snapshots. Publisher sizes are computed across the full
# snapshot (not the common subset), so transitions compare true portfolio
# sizes. w2 moves from a 5-site publisher to a 50-site one (Bigger); w3
# does the reverse (Smaller); w4 swaps between two 7-site publishers
# (Insignificant); w1 never changes.
def snap(sid, assignment, sizes):
    return Snapshot.build(sid, [profile(d, *keys) for d, keys in assignment.items()],
                          publisher_sizes=sizes)


sizes = {"pub-small0001": 5, "pub-large0001": 50, "pub-alt0000001": 7, "pub-alt0000002": 7}
snap1 = snap("2020-01-01", {"w1.example": ["pub-small0001"], "w2.example": ["pub-small0001"],
                            "w3.example": ["pub-large0001"], "w4.example": ["pub-alt0000001"]}, sizes)
snap2 = snap("2020-04-01", {"w1.example": ["pub-small0001"], "w2.example": ["pub-large0001"],
                            "w3.example": ["pub-small0001"], "w4.example": ["pub-alt0000002"]}, sizes)
snap3 = snap("2020-07-01", {"w1.example": ["pub-small0001"], "w2.example": ["pub-large0001"],
                            "w3.example": ["pub-small0001"], "w4.example": ["pub-alt0000001"]}, sizes)

for site in ("w1.example", "w2.example", "w3.example", "w4.example"):
    record = classify_transition(site, snap1, snap2)
    print(f"  {site}: {record.old_size} -> {record.new_size} = {record.transition.value}")

series = transition_series([snap1, snap2, snap3])
for from_id, to_id, counts in series.intervals:
    printable = {cls.value: n for cls, n in counts.items()}
    print(f"  {from_id} .. {to_id}: {printable}")

# Coverage: what share of sites carries Publisher / Tracking keys.
coverage = coverage_series([snap1, snap2, snap3])
print("\npublisher coverage per snapshot:", [round(r[1], 3) for r in coverage.rows])
print("ID-count mix:", publisher_id_count_series([snap1, snap2, snap3])[0])

# Size classes: Small <=10 < Medium <=50 < Large <=100 < Mega.
for size in (10, 11, 50, 51, 100, 101):
    print(f"  size {size}: {classify_publisher(size).name}")

# Census drift across snapshots, with a fitted slope per class, and the
# market share of the top publishers over time.
census = class_population_series([snap1, snap2, snap3])
print("\nclass slopes:", {cls.name: slope for cls, slope in census.slopes.items()})
top = top_publishers_series([snap1, snap2, snap3], k=2)
print("top-2 publisher site totals per snapshot:", [(r[0], r[1]) for r in top.rows])
