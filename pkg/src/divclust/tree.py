"""The binary divisive cluster tree.

Nodes partition sample indices top-down; every internal node records the
1-D cut that produced its children (``left = scores < point``,
``right = scores >= point``) plus whether the point was a manual override.
The tree supports leaf selection, label extraction, linkage export for
dendrogram renderers, JSON round-tripping, and the discard-and-resume
semantics behind interactive split editing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateSplitError, ShapeError, StructuralError
from .projections import AxisModel, KernelDualModel, ProjectionResult
from .linalg import KernelSpec
from .splits import SplitCandidate

TREE_FORMAT = "divclust-tree"
TREE_VERSION = 1

DEFAULT_MIN_SAMPLE_SPLIT = 5


@dataclass
class ClusterNode:
    """One node of the divisive tree over a subset of sample indices."""

    id: int
    sample_indices: np.ndarray
    depth: int = 0
    parent: Optional[int] = None
    projection: Optional[ProjectionResult] = None
    candidate: Optional[SplitCandidate] = None
    manual_split: Optional[float] = None
    children: Optional[tuple[int, int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def size(self) -> int:
        return int(self.sample_indices.shape[0])

    @property
    def split_point(self) -> Optional[float]:
        """The effective cut: a manual override wins over the candidate."""
        if self.manual_split is not None:
            return self.manual_split
        if self.candidate is not None and self.candidate.feasible:
            return self.candidate.split_point
        return None

    @property
    def score_range(self) -> Optional[tuple[float, float]]:
        if self.projection is None:
            return None
        col = self.projection.scores[:, 0]
        return float(col.min()), float(col.max())


class ClusterTree:
    """Id-addressed binary tree whose leaves partition {0..n-1}.

    ``data`` is the training matrix the tree was fitted on; it is kept by
    reference for projections and prediction and is never serialized.
    """

    def __init__(self, n: int, data: Optional[np.ndarray] = None):
        if n < 1:
            raise ShapeError("tree needs at least one sample")
        self.n = n
        self.data = data
        root = ClusterNode(id=0, sample_indices=np.arange(n, dtype=np.int64))
        self.nodes: dict[int, ClusterNode] = {0: root}
        self.root_id = 0
        self.next_id = 1
        self.split_order: list[int] = []
        self.config: Optional[dict] = None

    # -- accessors ---------------------------------------------------------

    def node(self, node_id: int) -> ClusterNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise StructuralError(f"node {node_id} does not exist") from None

    def leaf_ids(self) -> list[int]:
        return sorted(nid for nid, node in self.nodes.items() if node.is_leaf)

    def leaf_count(self) -> int:
        return sum(1 for node in self.nodes.values() if node.is_leaf)

    def descendant_ids(self, node_id: int) -> list[int]:
        """All ids strictly below ``node_id``, in BFS order."""
        out: list[int] = []
        frontier = [node_id]
        while frontier:
            current = self.node(frontier.pop())
            if current.children is not None:
                out.extend(current.children)
                frontier.extend(current.children)
        return out

    def subtree_leaf_ids(self, node_id: int) -> list[int]:
        self.node(node_id)
        ids = [node_id] + self.descendant_ids(node_id)
        return sorted(nid for nid in ids if self.nodes[nid].is_leaf)

    # -- mutation ----------------------------------------------------------

    def split_node(
        self, node_id: int, point: Optional[float] = None, manual: bool = False
    ) -> tuple[int, int]:
        """Split a leaf at ``point`` on its stored splitting axis.

        ``point`` defaults to the node's feasible candidate. The left child
        (scores < point) receives the smaller of the two fresh ids. Raises
        DegenerateSplitError when the point is not strictly inside the score
        range (which would leave a side empty).
        """
        node = self.node(node_id)
        if not node.is_leaf:
            raise StructuralError(f"node {node_id} is not a leaf")
        if node.projection is None:
            raise StructuralError(f"node {node_id} has no projection to split on")
        if point is None:
            if node.candidate is None or not node.candidate.feasible:
                raise DegenerateSplitError(
                    f"node {node_id} has no feasible split candidate"
                )
            point = node.candidate.split_point
        point = float(point)
        if node.projection.scores.shape[0] != node.size:
            raise StructuralError(
                f"node {node_id} carries no per-sample scores; reload the tree "
                "with its training data to enable splitting"
            )
        lo, hi = node.score_range
        if not (lo < point < hi):
            raise DegenerateSplitError(
                f"split point {point} is outside the open score range ({lo}, {hi})"
            )
        scores = node.projection.scores[:, 0]
        left_mask = scores < point
        if not left_mask.any() or left_mask.all():
            raise DegenerateSplitError("split would leave one side empty")
        left_id, right_id = self.next_id, self.next_id + 1
        self.next_id += 2
        for cid, mask in ((left_id, left_mask), (right_id, ~left_mask)):
            self.nodes[cid] = ClusterNode(
                id=cid,
                sample_indices=node.sample_indices[mask],
                depth=node.depth + 1,
                parent=node.id,
            )
        node.children = (left_id, right_id)
        node.manual_split = point if manual else None
        self.split_order.append(node.id)
        return left_id, right_id

    def prune_descendants(self, node_id: int) -> int:
        """Drop everything below ``node_id``; returns the leaf count the
        subtree had before pruning. Ids are never reused."""
        node = self.node(node_id)
        doomed = self.descendant_ids(node_id)
        previous_leaves = max(
            1, sum(1 for nid in doomed if self.nodes[nid].is_leaf)
        )
        retired = set(doomed)
        retired.add(node_id)
        self.split_order = [nid for nid in self.split_order if nid not in retired]
        for nid in doomed:
            del self.nodes[nid]
        node.children = None
        node.manual_split = None
        return previous_leaves

    def recompute_subtree(self, node_id: int, new_split_point: float, driver) -> None:
        """Discard the subtree under ``node_id``, re-split it manually at
        ``new_split_point``, and let ``driver`` resume its select-and-split
        loop inside the subtree.

        The driver receives (tree, subtree_root_id, leaf_budget) where the
        budget is the subtree's pre-edit leaf count (floored at 2, since the
        manual split itself produces two leaves). Nodes outside the subtree
        are untouched.
        """
        node = self.node(node_id)
        if node.projection is None:
            raise StructuralError(f"node {node_id} has no projection to edit")
        lo, hi = node.score_range
        point = float(new_split_point)
        if not (lo < point < hi):
            raise DegenerateSplitError(
                f"split point {point} is outside the open score range ({lo}, {hi})"
            )
        budget = max(2, self.prune_descendants(node_id))
        self.split_node(node_id, point, manual=True)
        driver.resume(self, node_id, budget)

    # -- read-only products --------------------------------------------------

    def labels(self) -> np.ndarray:
        """Leaf labels 0..k-1, leaves enumerated in ascending id order."""
        out = np.empty(self.n, dtype=np.int64)
        for rank, leaf_id in enumerate(self.leaf_ids()):
            out[self.nodes[leaf_id].sample_indices] = rank
        return out

    def select_next_leaf(
        self,
        min_sample_split: int = DEFAULT_MIN_SAMPLE_SPLIT,
        within: Optional[set[int]] = None,
    ) -> Optional[int]:
        """The feasible leaf with maximum criterion (ties: lowest id).

        Leaves smaller than ``min_sample_split`` are never selected;
        ``within`` restricts the choice to a subtree's leaves.
        """
        best_id = None
        best_criterion = -np.inf
        for leaf_id in self.leaf_ids():
            if within is not None and leaf_id not in within:
                continue
            node = self.nodes[leaf_id]
            if node.size < min_sample_split:
                continue
            if node.candidate is None or not node.candidate.feasible:
                continue
            if node.candidate.criterion > best_criterion:
                best_criterion = node.candidate.criterion
                best_id = leaf_id
        return best_id

    def to_linkage(self) -> np.ndarray:
        """Agglomerative (n-1)x4 encoding of the divisive tree.

        Samples of each final leaf chain-merge at height 1 (singletons sit
        at height 0); each internal node merges its children's clusters at
        1 + max(child heights). Cluster ids follow the usual convention:
        row i creates cluster n + i.
        """
        rows: list[list[float]] = []
        n = self.n

        def leaf_chain(node: ClusterNode) -> tuple[int, float]:
            samples = node.sample_indices
            if samples.shape[0] == 1:
                return int(samples[0]), 0.0
            current = int(samples[0])
            for count, sample in enumerate(samples[1:], start=2):
                rows.append([float(current), float(sample), 1.0, float(count)])
                current = n + len(rows) - 1
            return current, 1.0

        # Post-order without recursion: children before parents.
        results: dict[int, tuple[int, float]] = {}
        stack: list[tuple[int, bool]] = [(self.root_id, False)]
        while stack:
            nid, expanded = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                results[nid] = leaf_chain(node)
                continue
            if not expanded:
                stack.append((nid, True))
                stack.append((node.children[1], False))
                stack.append((node.children[0], False))
                continue
            (left_cid, left_h) = results.pop(node.children[0])
            (right_cid, right_h) = results.pop(node.children[1])
            height = 1.0 + max(left_h, right_h)
            rows.append([float(left_cid), float(right_cid), height, float(node.size)])
            results[nid] = (n + len(rows) - 1, height)

        if n == 1:
            return np.empty((0, 4), dtype=np.float64)
        return np.asarray(rows, dtype=np.float64)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        """Versioned JSON document; enough to reproduce labels bit-exactly.

        Projection models are included in compact primal/dual form (kernel
        training rows are re-derived from the dataset on load). Cached
        per-node scores are not serialized; views recompute them.
        """
        nodes = []
        for nid in sorted(self.nodes):
            node = self.nodes[nid]
            record = {
                "id": node.id,
                "parent": node.parent,
                "depth": node.depth,
                "size": node.size,
                "sample_indices": node.sample_indices.tolist(),
                "children": list(node.children) if node.children else None,
                "manual_split": node.manual_split,
                "candidate": None,
                "score_range": list(node.score_range) if node.projection else None,
                "model": _model_to_json(node.projection),
            }
            if node.candidate is not None:
                cand = node.candidate
                record["candidate"] = {
                    "split_point": None if np.isnan(cand.split_point) else cand.split_point,
                    "criterion": cand.criterion,
                    "feasible": cand.feasible,
                    "rule_tag": cand.rule_tag,
                }
            nodes.append(record)
        return {
            "format": TREE_FORMAT,
            "version": TREE_VERSION,
            "n": self.n,
            "root_id": self.root_id,
            "next_id": self.next_id,
            "split_order": list(self.split_order),
            "config": self.config,
            "nodes": nodes,
        }

    @classmethod
    def from_json(cls, doc: dict, data: Optional[np.ndarray] = None) -> "ClusterTree":
        if doc.get("format") != TREE_FORMAT:
            raise StructuralError("not a cluster-tree document")
        if doc.get("version") != TREE_VERSION:
            raise StructuralError(f"unsupported tree version {doc.get('version')!r}")
        tree = cls(int(doc["n"]), data=data)
        tree.nodes.clear()
        tree.root_id = int(doc["root_id"])
        tree.next_id = int(doc["next_id"])
        tree.split_order = [int(x) for x in doc["split_order"]]
        tree.config = doc.get("config")
        for record in doc["nodes"]:
            indices = np.asarray(record["sample_indices"], dtype=np.int64)
            candidate = None
            if record.get("candidate") is not None:
                c = record["candidate"]
                sp = c["split_point"]
                candidate = SplitCandidate(
                    split_point=float("nan") if sp is None else float(sp),
                    criterion=float(c["criterion"]),
                    feasible=bool(c["feasible"]),
                    rule_tag=str(c["rule_tag"]),
                )
            node = ClusterNode(
                id=int(record["id"]),
                sample_indices=indices,
                depth=int(record["depth"]),
                parent=record["parent"],
                candidate=candidate,
                manual_split=record.get("manual_split"),
                children=tuple(record["children"]) if record.get("children") else None,
            )
            node.projection = _model_from_json(
                record.get("model"),
                record.get("score_range"),
                indices,
                data,
            )
            tree.nodes[node.id] = node
        return tree


def _model_to_json(projection: Optional[ProjectionResult]) -> Optional[dict]:
    if projection is None:
        return None
    model = projection.model
    base = {"method_tag": projection.method_tag, "scatter": projection.scatter}
    if isinstance(model, AxisModel):
        base.update(
            kind="axis",
            mean=model.mean.tolist(),
            axes=model.axes.tolist(),
            magnitudes=model.magnitudes.tolist(),
        )
        return base
    if isinstance(model, KernelDualModel):
        base.update(
            kind="kernel_dual",
            kernel={
                "name": model.kernel.name,
                "gamma": model.kernel.gamma,
                "degree": model.kernel.degree,
                "coef0": model.kernel.coef0,
            },
            alphas=model.alphas.tolist(),
            col_means=model.col_means.ravel().tolist(),
            total_mean=model.total_mean,
        )
        return base
    return None


def _model_from_json(
    record: Optional[dict],
    score_range,
    sample_indices: np.ndarray,
    data: Optional[np.ndarray],
) -> Optional[ProjectionResult]:
    """Rebuild a node projection from its serialized model.

    With the training data at hand the per-sample scores are recomputed
    through the model, restoring full view/edit capability; without it a
    two-row placeholder carries just the stored score range.
    """
    if record is None:
        return None
    if record["kind"] == "axis":
        model = AxisModel(
            mean=np.asarray(record["mean"], dtype=np.float64),
            axes=np.asarray(record["axes"], dtype=np.float64),
            magnitudes=np.asarray(record["magnitudes"], dtype=np.float64),
        )
    elif record["kind"] == "kernel_dual":
        k = record["kernel"]
        model = KernelDualModel(
            rows=data[sample_indices] if data is not None else None,
            kernel=KernelSpec(
                name=k["name"],
                gamma=k["gamma"],
                degree=int(k["degree"]),
                coef0=float(k["coef0"]),
            ),
            alphas=np.asarray(record["alphas"], dtype=np.float64),
            col_means=np.asarray(record["col_means"], dtype=np.float64)[None, :],
            total_mean=float(record["total_mean"]),
        )
    else:
        raise StructuralError(f"unknown model kind {record['kind']!r}")
    if data is not None:
        scores = model.project(np.asarray(data, dtype=np.float64)[sample_indices])
    else:
        lo, hi = score_range
        scores = np.array([[lo], [hi]], dtype=np.float64)
    return ProjectionResult(
        scores=scores,
        model=model,
        method_tag=record["method_tag"],
        scatter=float(record["scatter"]),
    )
