"""File-level bootstrap over clips: clade support and consensus annotation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .centroid import CentroidMatrix, apply_standardization, standardize
from .cluster import Clade, Dendrogram, clades, pairwise_distances, to_newick, ward_linkage
from .corpus import EmbeddingSet

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 output step; used to derive per-replicate seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def replicate_seed(base_seed: int, replicate: int) -> int:
    return splitmix64((base_seed & _MASK64) ^ replicate)


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    base_seed: int = 0
    restandardize: bool = True

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


@dataclass
class SupportTable:
    supports: dict[Clade, float]
    replicates: int

    def __getitem__(self, clade: Clade) -> float:
        return self.supports[clade]


def resample_language(clips: np.ndarray, n: int, seed: int) -> np.ndarray:
    """Draw n clips with replacement using a deterministic seeded generator."""
    clips = np.asarray(clips)
    if clips.shape[0] == 0:
        raise ValueError("cannot resample an empty clip list")
    if n != clips.shape[0]:
        raise ValueError("resample size must equal the original clip count")
    rng = np.random.Generator(np.random.PCG64(seed))
    idx = rng.integers(0, clips.shape[0], size=n)
    return clips[idx]


def _one_replicate(
    b: int,
    base_seed: int,
    clip_arrays: list[np.ndarray],
    reference_stats: CentroidMatrix | None,
    restandardize: bool,
    ref_clades: list[Clade],
    labels: list[str],
) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(replicate_seed(base_seed, b)))
    rows = []
    for clips in clip_arrays:
        idx = rng.integers(0, clips.shape[0], size=clips.shape[0])
        rows.append(clips[idx].mean(axis=0))
    values = np.vstack(rows)
    matrix = CentroidMatrix(lang_ids=labels, values=values)
    if restandardize:
        values = standardize(matrix).values
    elif reference_stats is not None:
        values = apply_standardization(values, reference_stats)
    tree = ward_linkage(pairwise_distances(values), labels=labels)
    present = clades(tree)
    return np.array([1 if c in present else 0 for c in ref_clades], dtype=np.int64)


def bootstrap_support(
    embedding_set: EmbeddingSet,
    reference: Dendrogram,
    config: BootstrapConfig,
    reference_stats: CentroidMatrix | None = None,
    threads: int = 1,
) -> SupportTable:
    """Estimate clade support by resampling clips, rebuilding the tree B times.

    Each replicate gets its own generator seeded from (base_seed, b), so the
    result is identical for any thread count. When restandardize is off the
    reference matrix's column stats are reused per replicate.
    """
    labels = reference.leaf_labels
    for lang_id in labels:
        if lang_id not in embedding_set:
            raise ValueError(f"language '{lang_id}' missing from embedding set")
    clip_arrays = [np.asarray(embedding_set[l], dtype=np.float64) for l in labels]
    ref_clades = sorted(clades(reference), key=lambda c: (len(c), sorted(c)))

    def work(b: int) -> np.ndarray:
        return _one_replicate(
            b, config.base_seed, clip_arrays, reference_stats,
            config.restandardize, ref_clades, labels,
        )

    reps = range(1, config.replicates + 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = sum(pool.map(work, reps))
    else:
        counts = sum(work(b) for b in reps)
    supports = {c: counts[i] / config.replicates for i, c in enumerate(ref_clades)}
    return SupportTable(supports=supports, replicates=config.replicates)


@dataclass
class ConsensusReport:
    newick: str
    n_clades: int
    n_above_threshold: int
    threshold: float
    ranked: list[tuple[Clade, float]] = field(default_factory=list)


def consensus_report(
    reference: Dendrogram, supports: SupportTable, threshold: float
) -> ConsensusReport:
    """Annotate the reference tree with supports and summarize by threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    ranked = sorted(
        supports.supports.items(), key=lambda kv: (-kv[1], len(kv[0]), sorted(kv[0]))
    )
    above = sum(1 for _, p in ranked if p > threshold)
    return ConsensusReport(
        newick=to_newick(reference, supports.supports),
        n_clades=len(ranked),
        n_above_threshold=above,
        threshold=threshold,
        ranked=ranked,
    )
