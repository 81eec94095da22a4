"""Per-language centroid embeddings and column standardization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import EmbeddingSet

ZERO_VAR_EPS = 1e-12


@dataclass
class CentroidMatrix:
    lang_ids: list[str]
    values: np.ndarray  # (L, D)
    standardized: bool = False
    col_mean: np.ndarray | None = None
    col_std: np.ndarray | None = None
    zero_variance_cols: list[int] = field(default_factory=list)

    @property
    def n_languages(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def row(self, lang_id: str) -> np.ndarray:
        return self.values[self.lang_ids.index(lang_id)]


def language_centroid(clips: list[np.ndarray]) -> np.ndarray:
    """Centroid of one language: mean over clips of the per-clip mean.

    Each clip is either a 1-D pre-pooled vector or a (frames, D) matrix of
    frame states; frame matrices are averaged over time first, so every clip
    contributes equally regardless of its frame count.
    """
    if len(clips) == 0:
        raise ValueError("language has no clips")
    per_clip = []
    dim = None
    for c in clips:
        arr = np.asarray(c, dtype=np.float64)
        if arr.ndim == 2:
            if arr.shape[0] == 0:
                raise ValueError("clip has no frames")
            arr = arr.mean(axis=0)
        elif arr.ndim != 1:
            raise ValueError(f"clip must be 1-D or 2-D, got ndim={arr.ndim}")
        if dim is None:
            dim = arr.shape[0]
        elif arr.shape[0] != dim:
            raise ValueError(f"dim mismatch: {arr.shape[0]} vs {dim}")
        per_clip.append(arr)
    return np.mean(per_clip, axis=0)


def build_matrix(embedding_set: EmbeddingSet, lang_order: list[str]) -> CentroidMatrix:
    """Stack per-language centroids into an unstandardized L x D matrix."""
    rows = []
    for lang_id in lang_order:
        if lang_id not in embedding_set:
            raise ValueError(f"language '{lang_id}' missing from embedding set")
        rows.append(language_centroid(list(embedding_set[lang_id])))
    return CentroidMatrix(lang_ids=list(lang_order), values=np.vstack(rows))


def standardize(matrix: CentroidMatrix) -> CentroidMatrix:
    """Z-score each column (population std); near-constant columns become 0."""
    if matrix.standardized:
        raise ValueError("matrix is already standardized")
    if matrix.n_languages < 2:
        raise ValueError("need at least 2 languages to standardize")
    mean = matrix.values.mean(axis=0)
    std = matrix.values.std(axis=0)  # population (divisor L)
    frozen = std < ZERO_VAR_EPS
    safe_std = np.where(frozen, 1.0, std)
    z = (matrix.values - mean) / safe_std
    z[:, frozen] = 0.0
    return CentroidMatrix(
        lang_ids=list(matrix.lang_ids),
        values=z,
        standardized=True,
        col_mean=mean,
        col_std=std,
        zero_variance_cols=list(np.flatnonzero(frozen)),
    )


def apply_standardization(values: np.ndarray, reference: CentroidMatrix) -> np.ndarray:
    """Standardize a matrix using a previously fitted matrix's column stats."""
    if reference.col_mean is None or reference.col_std is None:
        raise ValueError("reference matrix carries no standardization stats")
    frozen = reference.col_std < ZERO_VAR_EPS
    safe_std = np.where(frozen, 1.0, reference.col_std)
    z = (values - reference.col_mean) / safe_std
    z[:, frozen] = 0.0
    return z
