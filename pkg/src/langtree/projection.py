"""PCA of centroid matrices for 2-D scatter export."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centroid import CentroidMatrix


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (q, D), orthonormal rows
    explained_variance_ratio: np.ndarray  # (q,), descending


def pca_fit_project(
    matrix: CentroidMatrix | np.ndarray, q: int = 2
) -> tuple[PcaModel, np.ndarray]:
    """Fit PCA by SVD of the column-centered matrix and project the rows.

    Sign convention: each component's largest-magnitude entry is positive,
    so repeated runs produce identical scatter coordinates.
    """
    values = matrix.values if isinstance(matrix, CentroidMatrix) else np.asarray(matrix)
    n, d = values.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if not 1 <= q <= min(n - 1, d):
        raise ValueError(f"q={q} out of range [1, {min(n - 1, d)}]")
    mean = values.mean(axis=0)
    centered = values - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:q]
    for i in range(q):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    total_var = float((s**2).sum())
    ratios = (s[:q] ** 2) / total_var if total_var > 0 else np.zeros(q)
    scores = centered @ components.T
    return PcaModel(mean=mean, components=components, explained_variance_ratio=ratios), scores
