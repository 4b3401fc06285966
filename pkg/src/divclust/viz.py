"""Static visualization export: split views, dendrogram SVG, report figures.

The dendrogram is emitted as self-contained SVG 1.1 with the linkage rows
embedded as data attributes, so the drawing round-trips exactly. Optional
matplotlib renderings (PNG per split view, bench summary figure) support the
CLI report path; matplotlib is imported lazily inside those functions.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .algorithms import AlgorithmConfig, Driver, make_driver
from .errors import LinkageValidationError, ShapeError, StructuralError
from .tree import ClusterTree

VIEWS_FORMAT = "divclust-views"
VIEWS_VERSION = 1

# Fixed 12-color palette cycled by class index; deterministic across runs.
PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
    "#aec7e8",
    "#ffbb78",
)


def _view_driver(tree: ClusterTree, X: Optional[np.ndarray]) -> Driver:
    data = X if X is not None else tree.data
    if data is None:
        raise StructuralError("split views need the training data; pass X")
    if tree.config is None:
        raise StructuralError("tree carries no config echo; refit before exporting")
    if tree.data is None:
        tree.data = np.asarray(data, dtype=np.float64)
    return make_driver(AlgorithmConfig.from_dict(tree.config), data)


def node_view_record(tree: ClusterTree, node_id: int, driver: Driver) -> dict:
    """The 2-D view of one node: coordinates, cut, and side assignment.

    Component 1 is the node's splitting axis; component 2 is the method's
    second component (zeros when the node is rank-1 or the method cannot
    provide one without changing component 1).
    """
    node = tree.node(node_id)
    driver.ensure_view_projection(tree, node)
    if node.projection is None or node.projection.scores.shape[0] != node.size:
        raise StructuralError(f"node {node_id} has no projection to view")
    scores = node.projection.scores
    if scores.shape[1] < 2:
        coords = np.column_stack([scores[:, 0], np.zeros(node.size)])
    else:
        coords = scores[:, :2]
    point = node.split_point
    lo, hi = node.score_range
    side = None
    if point is not None:
        side = (coords[:, 0] >= point).astype(int).tolist()
    return {
        "node_id": node.id,
        "size": node.size,
        "depth": node.depth,
        "rule_tag": node.candidate.rule_tag if node.candidate else None,
        "criterion": node.candidate.criterion if node.candidate else None,
        "feasible": bool(node.candidate.feasible) if node.candidate else False,
        "split_point": point,
        "manual": node.manual_split is not None,
        "score_range": [lo, hi],
        "children": list(node.children) if node.children else None,
        "sample_indices": node.sample_indices.tolist(),
        "coords": coords.tolist(),
        "side": side,
    }


def export_split_views(tree: ClusterTree, X: Optional[np.ndarray] = None) -> dict:
    """View records for every internal node, in split creation order."""
    driver = _view_driver(tree, X)
    views = [node_view_record(tree, nid, driver) for nid in tree.split_order]
    return {"format": VIEWS_FORMAT, "version": VIEWS_VERSION, "views": views}


# -- dendrogram SVG ----------------------------------------------------------


def validate_linkage(linkage: np.ndarray) -> np.ndarray:
    """Check the (n-1)x4 encoding: index bounds, sizes, monotone heights."""
    Z = np.asarray(linkage, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != 4:
        raise LinkageValidationError(f"expected an (n-1)x4 matrix, got {Z.shape}")
    n = Z.shape[0] + 1
    sizes = {i: 1 for i in range(n)}
    heights = {i: 0.0 for i in range(n)}
    used = set()
    for i, (a, b, h, size) in enumerate(Z):
        a, b = int(a), int(b)
        for child in (a, b):
            if child < 0 or child >= n + i:
                raise LinkageValidationError(
                    f"row {i} references cluster {child} before it exists"
                )
            if child in used:
                raise LinkageValidationError(f"cluster {child} merged twice")
            used.add(child)
        if h < max(heights[a], heights[b]):
            raise LinkageValidationError(
                f"row {i} height {h} is below its children's heights"
            )
        if int(size) != sizes[a] + sizes[b]:
            raise LinkageValidationError(
                f"row {i} size {int(size)} != {sizes[a]} + {sizes[b]}"
            )
        sizes[n + i] = sizes[a] + sizes[b]
        heights[n + i] = float(h)
    if Z.shape[0] and sizes[n + Z.shape[0] - 1] != n:
        raise LinkageValidationError("final merge does not cover all samples")
    return Z


def _leaf_order(Z: np.ndarray) -> list[int]:
    """Left-to-right leaf order by traversal of the merge tree."""
    n = Z.shape[0] + 1
    if n == 1:
        return [0]
    order: list[int] = []
    stack = [2 * n - 2]
    while stack:
        cid = stack.pop()
        if cid < n:
            order.append(cid)
        else:
            a, b = int(Z[cid - n, 0]), int(Z[cid - n, 1])
            stack.append(b)
            stack.append(a)
    return order


def render_dendrogram_svg(
    linkage,
    class_labels=None,
    width: int = 800,
    height: int = 400,
) -> str:
    """Self-contained SVG dendrogram with an optional class color strip.

    Leaves sit at height 0 along the horizontal axis; each merge draws a
    bracket at its height. Rows are embedded as data-* attributes on the
    bracket paths, so parsing the SVG recovers the linkage exactly.
    """
    Z = validate_linkage(linkage)
    n = Z.shape[0] + 1
    if class_labels is not None:
        class_labels = np.asarray(class_labels)
        if class_labels.shape[0] != n:
            raise ShapeError(
                f"{class_labels.shape[0]} class labels for {n} leaves"
            )
    margin = 20.0
    strip_h = 12.0 if class_labels is not None else 0.0
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin - strip_h
    max_h = float(Z[:, 2].max()) if Z.shape[0] else 1.0
    order = _leaf_order(Z)
    xpos = {leaf: margin + (rank + 0.5) * plot_w / n for rank, leaf in enumerate(order)}
    ypos = {leaf: margin + plot_h for leaf in range(n)}

    def y_of(h: float) -> float:
        return margin + plot_h * (1.0 - h / max_h)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<g class="dendrogram" data-leaves="{n}">',
    ]
    heights = {i: 0.0 for i in range(n)}
    for i, (a, b, h, size) in enumerate(Z):
        a, b = int(a), int(b)
        xa, xb = xpos[a], xpos[b]
        ya, yb = ypos[a], ypos[b]
        ym = y_of(float(h))
        path = f"M {xa:.2f} {ya:.2f} L {xa:.2f} {ym:.2f} L {xb:.2f} {ym:.2f} L {xb:.2f} {yb:.2f}"
        parts.append(
            f'<path class="merge" data-a="{a}" data-b="{b}" '
            f'data-height="{repr(float(h))}" data-size="{int(size)}" '
            f'd="{path}" fill="none" stroke="#333" stroke-width="1.2"/>'
        )
        cid = n + i
        xpos[cid] = (xa + xb) / 2.0
        ypos[cid] = ym
        heights[cid] = float(h)
    if class_labels is not None:
        cell = plot_w / n
        for rank, leaf in enumerate(order):
            color = PALETTE[int(class_labels[leaf]) % len(PALETTE)]
            x = margin + rank * cell
            y = margin + plot_h + 4
            parts.append(
                f'<rect class="class-strip" data-sample="{leaf}" '
                f'data-class="{int(class_labels[leaf])}" x="{x:.2f}" y="{y:.2f}" '
                f'width="{cell:.2f}" height="{strip_h - 4:.2f}" fill="{color}"/>'
            )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts)


def parse_dendrogram_svg(svg: str) -> np.ndarray:
    """Recover the linkage rows from a rendered dendrogram (round-trip)."""
    import xml.etree.ElementTree as ET

    root = ET.fromstring(svg)
    ns = {"svg": "http://www.w3.org/2000/svg"}
    rows = []
    for path in root.iter("{http://www.w3.org/2000/svg}path"):
        if path.get("class") != "merge":
            continue
        rows.append(
            [
                float(path.get("data-a")),
                float(path.get("data-b")),
                float(path.get("data-height")),
                float(path.get("data-size")),
            ]
        )
    if not rows:
        return np.empty((0, 4))
    return np.asarray(rows, dtype=np.float64)


# -- matplotlib report figures -------------------------------------------------


def _agg_pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_split_view_figures(views_doc: dict, outdir) -> list[str]:
    """One PNG scatter per internal node with the split line drawn."""
    plt = _agg_pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for view in views_doc["views"]:
        coords = np.asarray(view["coords"])
        side = np.asarray(view["side"]) if view["side"] is not None else np.zeros(len(coords), int)
        fig, ax = plt.subplots(figsize=(5, 4))
        for s, color in ((0, PALETTE[0]), (1, PALETTE[1])):
            mask = side == s
            ax.scatter(coords[mask, 0], coords[mask, 1], s=12, c=color, label=f"side {s}")
        if view["split_point"] is not None:
            ax.axvline(view["split_point"], color="#d62728", linestyle="--", linewidth=1)
        ax.set_title(
            f"node {view['node_id']} (n={view['size']}, rule={view['rule_tag']})"
        )
        ax.set_xlabel("component 1")
        ax.set_ylabel("component 2")
        ax.legend(loc="best", fontsize=8)
        path = outdir / f"node_{view['node_id']:04d}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(str(path))
    return written


def save_bench_figure(report, path) -> str:
    """Grouped time/NMI bars per dataset for a BenchReport."""
    plt = _agg_pyplot()
    datasets = []
    for row in report.rows:
        if row.dataset not in datasets:
            datasets.append(row.dataset)
    fig, axes = plt.subplots(
        len(datasets), 2, figsize=(9, 3 * max(1, len(datasets))), squeeze=False
    )
    for i, name in enumerate(datasets):
        rows = [r for r in report.rows if r.dataset == name]
        algos = [r.algorithm for r in rows]
        times = [r.mean_time for r in rows]
        nmis = [r.mean_nmi if r.mean_nmi is not None else 0.0 for r in rows]
        colors = [PALETTE[j % len(PALETTE)] for j in range(len(rows))]
        axes[i][0].bar(algos, times, color=colors)
        axes[i][0].set_title(f"{name}: mean fit time (s)")
        axes[i][1].bar(algos, nmis, color=colors)
        axes[i][1].set_ylim(0, 1.05)
        axes[i][1].set_title(f"{name}: mean NMI")
        for ax in axes[i]:
            ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return str(path)


def views_to_json(views_doc: dict) -> str:
    return json.dumps(views_doc, indent=2)
