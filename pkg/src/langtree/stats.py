"""Hypothesis tests, multiple-comparison corrections, and the
dimension-level and acoustic-contrast analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import ndtr, stdtr

from .acoustics import FEATURE_NAMES
from .centroid import CentroidMatrix

EXACT_MW_MAX_N = 14


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: float | None = None
    direction: int = 0  # sign of group-1 minus group-2


def welch_t_test(group_a, group_b, pooled: bool = False) -> TestResult:
    """Two-sided two-sample t-test; Welch by default, Student with pooled=True."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    na, nb = a.shape[0], b.shape[0]
    if na < 2 or nb < 2:
        raise ValueError("each group needs at least 2 observations")
    ma, mb = a.mean(), b.mean()
    va, vb = a.var(ddof=1), b.var(ddof=1)
    diff = ma - mb
    direction = int(np.sign(diff))
    if va == 0.0 and vb == 0.0:
        if diff == 0.0:
            return TestResult(0.0, 1.0, df=float(na + nb - 2), direction=0)
        # degenerate separation: zero within-group spread, distinct means
        return TestResult(math.inf * direction, 0.0, df=float(na + nb - 2),
                          direction=direction)
    if pooled:
        sp2 = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
        se = math.sqrt(sp2 * (1 / na + 1 / nb))
        df = float(na + nb - 2)
    else:
        se = math.sqrt(va / na + vb / nb)
        df = (va / na + vb / nb) ** 2 / (
            (va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1)
        )
    t = diff / se
    p = 2.0 * stdtr(df, -abs(t))
    return TestResult(float(t), float(min(p, 1.0)), df=float(df), direction=direction)


def pearson_test(x, y) -> TestResult:
    """Pearson correlation with a two-sided t-transform p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    if n < 3:
        raise ValueError("need at least 3 observations")
    xc, yc = x - x.mean(), y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance in correlation input")
    r = float(xc @ yc) / (sx * sy)
    r = max(-1.0, min(1.0, r))
    if 1.0 - abs(r) < 1e-12:  # exactly collinear up to rounding
        r = math.copysign(1.0, r)
    if abs(r) == 1.0:
        return TestResult(r, 0.0, df=float(n - 2), direction=int(np.sign(r)))
    t = r * math.sqrt((n - 2) / (1 - r * r))
    p = 2.0 * stdtr(n - 2, -abs(t))
    return TestResult(r, float(min(p, 1.0)), df=float(n - 2), direction=int(np.sign(r)))


def _check_pvalues(p_values) -> np.ndarray:
    p = np.asarray(p_values, dtype=np.float64)
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def bh_fdr(p_values, alpha: float = 0.05) -> set[int]:
    """Benjamini-Hochberg step-up rule; returns rejected indices."""
    p = _check_pvalues(p_values)
    m = p.size
    order = np.argsort(p, kind="stable")
    threshold = None
    for rank, idx in enumerate(order, start=1):
        if p[idx] <= rank * alpha / m:
            threshold = p[idx]
    if threshold is None:
        return set()
    return set(int(i) for i in np.flatnonzero(p <= threshold))


def bonferroni(p_values, alpha: float = 0.05) -> set[int]:
    p = _check_pvalues(p_values)
    return set(int(i) for i in np.flatnonzero(p <= alpha / p.size))


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0])
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def mann_whitney(group_a, group_b) -> TestResult:
    """Mann-Whitney U, exact for small untied samples, else normal approx.

    Exact path: full enumeration of rank assignments when n_a+n_b <= 14 and
    no ties; two-sided p = 2 * P(U <= min(U_a, U_b)), capped at 1. Otherwise
    a tie-corrected normal approximation with continuity correction.
    """
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    na, nb = a.shape[0], b.shape[0]
    if na == 0 or nb == 0:
        raise ValueError("both groups must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    ra = ranks[:na].sum()
    ua = ra - na * (na + 1) / 2
    ub = na * nb - ua
    mu = na * nb / 2
    direction = int(np.sign(ua - mu))

    has_ties = np.unique(pooled).size < pooled.size
    n = na + nb
    if n <= EXACT_MW_MAX_N and not has_ties:
        u_min = min(ua, ub)
        tail = 0
        total = 0
        for subset in combinations(range(1, n + 1), na):
            u = sum(subset) - na * (na + 1) / 2
            total += 1
            if u <= u_min:
                tail += 1
        # doubling the lower tail of U_a gives the two-sided p
        p = min(1.0, 2.0 * tail / total)
        return TestResult(float(ua), p, direction=direction)

    # normal approximation with tie correction
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts**3) - tie_counts).sum())
    var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0.0:
        return TestResult(float(ua), 1.0, direction=direction)
    z = (abs(ua - mu) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = min(1.0, 2.0 * float(ndtr(-z)))
    return TestResult(float(ua), p, direction=direction)


def cohens_d(group_a, group_b) -> float:
    """Standardized mean difference with pooled standard deviation."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    na, nb = a.shape[0], b.shape[0]
    if na < 2 or nb < 2:
        raise ValueError("each group needs at least 2 observations")
    sp2 = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2)
    if sp2 <= 0.0:
        raise ValueError("zero pooled variance")
    return float((a.mean() - b.mean()) / math.sqrt(sp2))


@dataclass
class DimensionAnalysis:
    sig_dims_fdr: set[int]
    sig_dims_bonf: set[int]
    feature_frequency: dict[str, dict[str, float]]  # level -> feature -> %
    n_dims: int


def _stage2_frequencies(
    sig_dims: list[int],
    matrix_values: np.ndarray,
    feature_table: np.ndarray,
    feature_names: list[str],
    alpha: float,
    correct,
) -> dict[str, float]:
    if not sig_dims:
        return {name: 0.0 for name in feature_names}
    pairs = []
    pvals = []
    for d in sig_dims:
        col = matrix_values[:, d]
        for fi, name in enumerate(feature_names):
            feat = feature_table[:, fi]
            if col.std() == 0.0 or feat.std() == 0.0:
                p = 1.0
            else:
                p = pearson_test(col, feat).p_value
            pairs.append((d, name))
            pvals.append(p)
    rejected = correct(pvals, alpha)
    freq: dict[str, set[int]] = {name: set() for name in feature_names}
    for idx in rejected:
        d, name = pairs[idx]
        freq[name].add(d)
    return {name: 100.0 * len(dims) / len(sig_dims) for name, dims in freq.items()}


def dimension_analysis(
    centroids: CentroidMatrix,
    poa: set[str],
    features: dict[str, dict[str, float]],
    alpha: float = 0.05,
    pooled: bool = False,
    feature_names: list[str] | None = None,
) -> DimensionAnalysis:
    """Two-stage analysis of group-discriminative embedding dimensions.

    Stage 1 t-tests every dimension between the tagged group and the rest,
    keeping FDR- and Bonferroni-significant sets. Stage 2 correlates each
    surviving dimension with every language-level acoustic feature, corrected
    jointly across all (dimension, feature) pairs at the same stringency,
    and reports per-feature frequencies among the significant dimensions.
    """
    lang_ids = centroids.lang_ids
    if not poa or not poa < set(lang_ids):
        raise ValueError("group must be a non-empty proper subset of the languages")
    missing = [l for l in lang_ids if l not in features]
    if missing:
        raise ValueError(f"feature table missing languages: {missing}")
    names = feature_names if feature_names is not None else list(FEATURE_NAMES)

    in_group = np.array([l in poa for l in lang_ids])
    values = centroids.values
    if in_group.sum() < 2 or (~in_group).sum() < 2:
        raise ValueError("each side of the contrast needs at least 2 languages")

    stage1_p = []
    for d in range(values.shape[1]):
        col = values[:, d]
        ga, gb = col[in_group], col[~in_group]
        if ga.var(ddof=1) == 0.0 and gb.var(ddof=1) == 0.0 and ga.mean() == gb.mean():
            stage1_p.append(1.0)
        else:
            stage1_p.append(welch_t_test(ga, gb, pooled=pooled).p_value)

    sig_fdr = bh_fdr(stage1_p, alpha)
    sig_bonf = bonferroni(stage1_p, alpha)

    feature_table = np.array(
        [[features[l][name] for name in names] for l in lang_ids], dtype=np.float64
    )
    freq = {
        "fdr": _stage2_frequencies(sorted(sig_fdr), values, feature_table, names, alpha, bh_fdr),
        "bonferroni": _stage2_frequencies(
            sorted(sig_bonf), values, feature_table, names, alpha, bonferroni
        ),
    }
    return DimensionAnalysis(
        sig_dims_fdr=sig_fdr,
        sig_dims_bonf=sig_bonf,
        feature_frequency=freq,
        n_dims=values.shape[1],
    )


@dataclass(frozen=True)
class ContrastRow:
    feature: str
    direction: str  # "Higher" / "Lower" for the tagged group
    d: float
    p_value: float


def acoustic_contrast(
    features: dict[str, dict[str, float]],
    poa: set[str],
    p_threshold: float = 0.001,
    d_threshold: float = 0.5,
    feature_names: list[str] | None = None,
) -> list[ContrastRow]:
    """Mann-Whitney + Cohen's d per feature; keep strong significant contrasts."""
    names = feature_names if feature_names is not None else list(FEATURE_NAMES)
    langs = list(features)
    group = [l for l in langs if l in poa]
    rest = [l for l in langs if l not in poa]
    if not group or not rest:
        raise ValueError("group must be a non-empty proper subset of the languages")
    rows = []
    for name in names:
        a = [features[l][name] for l in group]
        b = [features[l][name] for l in rest]
        res = mann_whitney(a, b)
        try:
            d = cohens_d(a, b)
        except ValueError:
            continue
        if res.p_value < p_threshold and abs(d) > d_threshold:
            rows.append(
                ContrastRow(
                    feature=name,
                    direction="Higher" if d > 0 else "Lower",
                    d=d,
                    p_value=res.p_value,
                )
            )
    rows.sort(key=lambda r: r.p_value)
    return rows
