"""Clustering evaluation: ARI, NMI, K-sweeps, target-cluster P/R/F1."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .cluster import Dendrogram, cut_at_k


@dataclass(frozen=True)
class Partition:
    assignment: dict[str, int]

    @property
    def k(self) -> int:
        return len(set(self.assignment.values()))

    @classmethod
    def from_labels(cls, items: list[str], labels: list) -> "Partition":
        index: dict = {}
        assignment = {}
        for item, lab in zip(items, labels):
            if lab not in index:
                index[lab] = len(index)
            assignment[item] = index[lab]
        return cls(assignment=assignment)


@dataclass
class SweepResult:
    rows: list[tuple[int, float, float]]  # (K, ARI, NMI)
    best_k_ari: int
    best_k_nmi: int


def _contingency(truth: Partition, pred: Partition) -> tuple[Counter, Counter, Counter, int]:
    if set(truth.assignment) != set(pred.assignment):
        raise ValueError("partitions cover different language sets")
    joint: Counter = Counter()
    a: Counter = Counter()
    b: Counter = Counter()
    for item, t in truth.assignment.items():
        p = pred.assignment[item]
        joint[(t, p)] += 1
        a[t] += 1
        b[p] += 1
    return joint, a, b, len(truth.assignment)


def _same_partition(truth: Partition, pred: Partition) -> bool:
    joint, a, b, _ = _contingency(truth, pred)
    return len(joint) == len(a) == len(b)


def ari(truth: Partition, pred: Partition) -> float:
    """Adjusted Rand index (Hubert-Arabie)."""
    joint, a, b, n = _contingency(truth, pred)
    index = sum(math.comb(v, 2) for v in joint.values())
    sum_a = sum(math.comb(v, 2) for v in a.values())
    sum_b = sum(math.comb(v, 2) for v in b.values())
    expected = sum_a * sum_b / math.comb(n, 2)
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        # both trivial (single cluster or all singletons on each side)
        return 1.0 if _same_partition(truth, pred) else 0.0
    return (index - expected) / (max_index - expected)


def nmi(truth: Partition, pred: Partition) -> float:
    """Normalized mutual information, arithmetic-mean normalizer."""
    joint, a, b, n = _contingency(truth, pred)
    h_a = -sum((v / n) * math.log(v / n) for v in a.values())
    h_b = -sum((v / n) * math.log(v / n) for v in b.values())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    mi = 0.0
    for (t, p), v in joint.items():
        mi += (v / n) * math.log(v * n / (a[t] * b[p]))
    return 2.0 * mi / (h_a + h_b)


def sweep_k(
    dendrogram: Dendrogram, truth: Partition, k_min: int, k_max: int
) -> SweepResult:
    """Cut the dendrogram at each K in [k_min, k_max] and score ARI/NMI."""
    if not 2 <= k_min <= k_max <= dendrogram.n_leaves:
        raise ValueError(f"invalid K range [{k_min}, {k_max}]")
    rows = []
    for k in range(k_min, k_max + 1):
        pred = Partition(assignment=cut_at_k(dendrogram, k))
        rows.append((k, ari(truth, pred), nmi(truth, pred)))
    best_k_ari = max(rows, key=lambda r: r[1])[0]
    best_k_nmi = max(rows, key=lambda r: r[2])[0]
    return SweepResult(rows=rows, best_k_ari=best_k_ari, best_k_nmi=best_k_nmi)


@dataclass
class TargetEval:
    precision: float
    recall: float
    f1: float
    cluster_index: int
    members: frozenset[str]


def target_eval(partition: Partition, target: set[str]) -> TargetEval:
    """Score the cluster that best matches a target language group.

    Picks the cluster maximizing F1 against the target (ties: larger
    intersection, then smaller cluster index).
    """
    if not target:
        raise ValueError("target set is empty")
    if not target <= set(partition.assignment):
        raise ValueError("target contains unknown languages")
    clusters: dict[int, set[str]] = {}
    for item, c in partition.assignment.items():
        clusters.setdefault(c, set()).add(item)

    best = None
    for idx in sorted(clusters):
        members = clusters[idx]
        inter = len(members & target)
        p = inter / len(members)
        r = inter / len(target)
        f1 = 0.0 if inter == 0 else 2 * p * r / (p + r)
        key = (f1, inter, -idx)
        if best is None or key > best[0]:
            best = (key, TargetEval(p, r, f1, idx, frozenset(members)))
    return best[1]
