"""Average weighed homogeneity and per-cluster composition reports.

The weighed homogeneity of a cluster is the share of its largest member
category, weighed by the cluster's share of all samples; the two cluster
sizes cancel, leaving max-category-count / total-samples. A clusterer's
score is the mean over its clusters. Weighing keeps a clusterer from
looking good through a few tiny pure clusters while one big mixed cluster
holds most samples. Noise points never form a cluster row for the score
but still count in the sample total, so heavy-noise runs score poorly.

Known quirk of the metric, kept deliberately: one cluster holding everything scores
the same as a perfect k-way split (both 1/k at the respective k).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .clustering import NOISE, ClusterAssignment
from .corpus import CATEGORY_LABELS, CategoryLabel


class NoClustersError(ValueError):
    """Every point is noise; there is no cluster to score."""


@dataclass(frozen=True)
class AwhScore:
    value: float
    n_clusters: int
    n_samples: int


@dataclass(frozen=True)
class CompositionRow:
    #: None identifies the noise row.
    cluster_id: Optional[int]
    size: int
    counts: dict[CategoryLabel, int]
    majority: CategoryLabel
    homogeneity: float
    weighed_homogeneity: float


def weighed_homogeneity(cluster_members: Sequence[CategoryLabel], n_total: int) -> float:
    """Largest category count in the cluster divided by the total sample count."""
    if not cluster_members:
        raise ValueError("cluster must not be empty")
    if n_total < len(cluster_members):
        raise ValueError("n_total must be at least the cluster size")
    counts = Counter(cluster_members)
    return max(counts.values()) / n_total


def _cluster_members(
    assignment: ClusterAssignment, labels: Sequence[CategoryLabel]
) -> dict[int, list[CategoryLabel]]:
    if len(assignment.labels) != len(labels):
        raise ValueError(
            f"assignment covers {len(assignment.labels)} points but {len(labels)} labels given"
        )
    members: dict[int, list[CategoryLabel]] = {}
    for cid, label in zip(assignment.labels, labels):
        members.setdefault(int(cid), []).append(label)
    return members


def awh(assignment: ClusterAssignment, labels: Sequence[CategoryLabel]) -> AwhScore:
    """Mean weighed homogeneity over all non-noise clusters.

    The denominator counts every labeled sample, noise included.
    """
    members = _cluster_members(assignment, labels)
    n_total = len(labels)
    cluster_ids = sorted(cid for cid in members if cid != NOISE)
    if not cluster_ids:
        raise NoClustersError("all points are noise; nothing to score")
    scores = [weighed_homogeneity(members[cid], n_total) for cid in cluster_ids]
    return AwhScore(value=sum(scores) / len(scores), n_clusters=len(cluster_ids), n_samples=n_total)


def _majority(counts: Counter) -> CategoryLabel:
    top = max(counts.values())
    # ties break to the lexicographically smallest category name
    return min((label for label, c in counts.items() if c == top), key=lambda l: l.value)


def composition_report(
    assignment: ClusterAssignment, labels: Sequence[CategoryLabel]
) -> list[CompositionRow]:
    """One row per cluster, plus a noise row when noise is present.

    Rows are sorted by size descending; equal sizes order by cluster id
    with the noise row last.
    """
    members = _cluster_members(assignment, labels)
    n_total = len(labels)
    rows = []
    for cid, cluster in members.items():
        counts = Counter(cluster)
        top = max(counts.values())
        rows.append(
            CompositionRow(
                cluster_id=None if cid == NOISE else cid,
                size=len(cluster),
                counts=dict(counts),
                majority=_majority(counts),
                homogeneity=top / len(cluster),
                weighed_homogeneity=top / n_total,
            )
        )
    rows.sort(key=lambda r: (-r.size, r.cluster_id is None, r.cluster_id if r.cluster_id is not None else 0))
    return rows


def composition_tsv(rows: Sequence[CompositionRow]) -> str:
    """Serialize a composition report; one column per category."""
    header = ["cluster_id", "size"]
    header += [label.value for label in CATEGORY_LABELS]
    header += ["majority", "homogeneity", "weighed_homogeneity"]
    lines = ["\t".join(header)]
    for row in rows:
        cells = ["noise" if row.cluster_id is None else str(row.cluster_id), str(row.size)]
        cells += [str(row.counts.get(label, 0)) for label in CATEGORY_LABELS]
        cells += [row.majority.value, f"{row.homogeneity:.6g}", f"{row.weighed_homogeneity:.6g}"]
        lines.append("\t".join(cells))
    return "".join(line + "\n" for line in lines)
