"""Ward-linkage agglomerative clustering, dendrogram cutting, Newick export."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .centroid import CentroidMatrix

Clade = frozenset  # clade = frozenset of lang_ids


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Agglomerative merge tree: leaves 0..L-1, merge k creates node L+k."""

    n_leaves: int
    merges: list[Merge]
    leaf_labels: list[str]

    def node_height(self, node: int) -> float:
        if node < self.n_leaves:
            return 0.0
        return self.merges[node - self.n_leaves].height

    def node_leaves(self, node: int) -> list[int]:
        """Leaf indices under a node, in leaf-id order."""
        if node < self.n_leaves:
            return [node]
        m = self.merges[node - self.n_leaves]
        return sorted(self.node_leaves(m.left) + self.node_leaves(m.right))


def pairwise_distances(matrix: CentroidMatrix | np.ndarray) -> np.ndarray:
    """Symmetric Euclidean distance table over matrix rows."""
    values = matrix.values if isinstance(matrix, CentroidMatrix) else np.asarray(matrix)
    if values.shape[0] < 2:
        raise ValueError("need at least 2 rows")
    if not np.isfinite(values).all():
        raise ValueError("non-finite entries in matrix")
    diff = values[:, None, :] - values[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(d, 0.0)
    return d


def ward_linkage(
    distances: np.ndarray, sizes: list[int] | None = None, labels: list[str] | None = None
) -> Dendrogram:
    """Agglomerate by Ward's criterion via the Lance-Williams recurrence.

    Works on squared dissimilarities internally; recorded heights are the
    unsquared merge dissimilarity, so merging two singletons at Euclidean
    distance d records height d. Ties break on the smallest (left, right)
    node-id pair, which makes bootstrap replicates with duplicated rows
    reproducible.
    """
    n = distances.shape[0]
    if n < 2:
        raise ValueError("need at least 2 clusters")
    if labels is None:
        labels = [str(i) for i in range(n)]
    size = {i: (sizes[i] if sizes else 1) for i in range(n)}
    d2 = {}
    for i in range(n):
        for j in range(i + 1, n):
            d2[(i, j)] = float(distances[i, j]) ** 2

    active = set(range(n))
    merges: list[Merge] = []
    for step in range(n - 1):
        best = None
        best_pair = None
        for pair, v in d2.items():
            if best is None or v < best or (v == best and pair < best_pair):
                best, best_pair = v, pair
        i, j = best_pair
        new = n + step
        ni, nj = size[i], size[j]
        merges.append(Merge(left=i, right=j, height=math.sqrt(max(best, 0.0)), size=ni + nj))
        active.discard(i)
        active.discard(j)
        dij = best
        for k in active:
            nk = size[k]
            dki = d2.pop((min(i, k), max(i, k)))
            dkj = d2.pop((min(j, k), max(j, k)))
            d2[(k, new)] = (
                (ni + nk) * dki + (nj + nk) * dkj - nk * dij
            ) / (ni + nj + nk)
        del d2[(i, j)]
        size[new] = ni + nj
        active.add(new)
    return Dendrogram(n_leaves=n, merges=merges, leaf_labels=list(labels))


def cut_at_k(dendrogram: Dendrogram, k: int) -> dict[str, int]:
    """Cluster assignment obtained by undoing the last k-1 merges.

    Cluster indices are dense, assigned by order of first leaf appearance.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range [1, {n}]")
    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step in range(n - k):
        m = dendrogram.merges[step]
        new = n + step
        parent[find(m.left)] = new
        parent[find(m.right)] = new

    index: dict[int, int] = {}
    assignment = {}
    for leaf in range(n):
        root = find(leaf)
        if root not in index:
            index[root] = len(index)
        assignment[dendrogram.leaf_labels[leaf]] = index[root]
    return assignment


def clades(dendrogram: Dendrogram) -> set[Clade]:
    """Non-trivial clades (2 <= size <= L-1), one per qualifying internal node."""
    n = dendrogram.n_leaves
    leafsets: dict[int, frozenset[str]] = {
        i: frozenset([dendrogram.leaf_labels[i]]) for i in range(n)
    }
    out: set[Clade] = set()
    for step, m in enumerate(dendrogram.merges):
        s = leafsets[m.left] | leafsets[m.right]
        leafsets[n + step] = s
        if 2 <= len(s) <= n - 1:
            out.add(s)
    return out


def _fmt(x: float) -> str:
    return format(x, ".12g")


def to_newick(dendrogram: Dendrogram, supports: dict[Clade, float] | None = None) -> str:
    """Serialize as Newick with branch lengths = parent/child height gaps.

    Internal nodes carry rounded percent support labels when a support table
    is given; children render smaller node id first.
    """
    n = dendrogram.n_leaves
    tree_clades = clades(dendrogram)
    if supports:
        for key in supports:
            if key not in tree_clades:
                raise ValueError(f"support key {sorted(key)} is not a clade of this tree")

    def render(node: int, parent_height: float) -> str:
        h = dendrogram.node_height(node)
        length = parent_height - h
        if node < n:
            return f"{dendrogram.leaf_labels[node]}:{_fmt(length)}"
        m = dendrogram.merges[node - n]
        a, b = sorted((m.left, m.right))
        inner = f"({render(a, h)},{render(b, h)})"
        label = ""
        if supports is not None:
            key = frozenset(dendrogram.leaf_labels[i] for i in dendrogram.node_leaves(node))
            if key in supports:
                label = str(round(supports[key] * 100))
        return f"{inner}{label}:{_fmt(length)}"

    root = 2 * n - 2
    h = dendrogram.node_height(root)
    m = dendrogram.merges[root - n]
    a, b = sorted((m.left, m.right))
    return f"({render(a, h)},{render(b, h)});"
