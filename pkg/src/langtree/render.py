"""Minimal SVG rendering: dendrograms and PCA scatter plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .cluster import Clade, Dendrogram

_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def _leaf_order(dendrogram: Dendrogram) -> list[int]:
    """Display order: recurse into the child with the smaller minimum leaf."""
    n = dendrogram.n_leaves

    def walk(node: int) -> list[int]:
        if node < n:
            return [node]
        m = dendrogram.merges[node - n]
        left, right = walk(m.left), walk(m.right)
        if min(left) > min(right):
            left, right = right, left
        return left + right

    return walk(2 * n - 2)


def dendrogram_svg(
    dendrogram: Dendrogram,
    supports: dict[Clade, float] | None = None,
    width: int = 800,
    row_height: int = 18,
    comment: str | None = None,
) -> str:
    """Horizontal dendrogram with leaf labels and optional support labels."""
    n = dendrogram.n_leaves
    order = _leaf_order(dendrogram)
    y_of = {leaf: 20 + row_height * i for i, leaf in enumerate(order)}
    max_h = max(m.height for m in dendrogram.merges) or 1.0
    label_w = 10 + 7 * max(len(l) for l in dendrogram.leaf_labels)
    plot_w = width - label_w - 30

    def x_of(h: float) -> float:
        return 10 + plot_w * (1 - h / max_h)

    parts = []
    node_y: dict[int, float] = {leaf: float(y_of[leaf]) for leaf in range(n)}
    node_h: dict[int, float] = {leaf: 0.0 for leaf in range(n)}
    for step, m in enumerate(dendrogram.merges):
        node = n + step
        y1, y2 = node_y[m.left], node_y[m.right]
        x = x_of(m.height)
        xl, xr = x_of(node_h[m.left]), x_of(node_h[m.right])
        parts.append(f'<line x1="{x:.1f}" y1="{y1:.1f}" x2="{xl:.1f}" y2="{y1:.1f}" stroke="black"/>')
        parts.append(f'<line x1="{x:.1f}" y1="{y2:.1f}" x2="{xr:.1f}" y2="{y2:.1f}" stroke="black"/>')
        parts.append(f'<line x1="{x:.1f}" y1="{y1:.1f}" x2="{x:.1f}" y2="{y2:.1f}" stroke="black"/>')
        node_y[node] = (y1 + y2) / 2
        node_h[node] = m.height
        if supports is not None:
            key = frozenset(dendrogram.leaf_labels[i] for i in dendrogram.node_leaves(node))
            if key in supports:
                parts.append(
                    f'<text x="{x + 2:.1f}" y="{(y1 + y2) / 2 - 2:.1f}" '
                    f'font-size="9">{round(supports[key] * 100)}</text>'
                )
    for leaf in range(n):
        parts.append(
            f'<text x="{10 + plot_w + 5:.1f}" y="{node_y[leaf] + 4:.1f}" '
            f'font-size="11">{escape(dendrogram.leaf_labels[leaf])}</text>'
        )
    height = 40 + row_height * n
    head = f"<!-- {escape(comment)} -->\n" if comment else ""
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        + head
        + "\n".join(parts)
        + "\n</svg>\n"
    )


def scatter_svg(
    labels: list[str],
    groups: list[str],
    scores: np.ndarray,
    width: int = 640,
    height: int = 480,
    comment: str | None = None,
) -> str:
    """2-D scatter of PCA scores, colored by group, labeled per point."""
    xs, ys = scores[:, 0], scores[:, 1]
    pad = 40
    span_x = (xs.max() - xs.min()) or 1.0
    span_y = (ys.max() - ys.min()) or 1.0
    group_names = sorted(set(groups))
    color = {g: _PALETTE[i % len(_PALETTE)] for i, g in enumerate(group_names)}

    parts = []
    for label, group, x, y in zip(labels, groups, xs, ys):
        px = pad + (width - 2 * pad) * (x - xs.min()) / span_x
        py = height - pad - (height - 2 * pad) * (y - ys.min()) / span_y
        parts.append(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" fill="{color[group]}"/>')
        parts.append(
            f'<text x="{px + 5:.1f}" y="{py - 5:.1f}" font-size="9">{escape(label)}</text>'
        )
    for i, g in enumerate(group_names):
        parts.append(
            f'<circle cx="12" cy="{12 + 14 * i}" r="4" fill="{color[g]}"/>'
            f'<text x="20" y="{16 + 14 * i}" font-size="10">{escape(g)}</text>'
        )
    head = f"<!-- {escape(comment)} -->\n" if comment else ""
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        + head
        + "\n".join(parts)
        + "\n</svg>\n"
    )
