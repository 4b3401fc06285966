"""The five divisive algorithm drivers behind the fit/predict contract.

Each driver pairs a per-node projection with a split rule and runs the
shared select-and-split loop: project every candidate-less leaf, compute
its split candidate, pick the feasible leaf with the highest criterion,
split, repeat until the cluster budget is reached or nothing is splittable.

Rule bindings: pddp -> sign rule, depddp -> density valley, ipddp -> trimmed
maximum gap, km_pddp -> exact 1-D 2-means (all on projection column 1);
bkm -> 2-means in the original space, recorded as a threshold cut along the
axis through the two centroids so that interactive edits and prediction work
uniformly across algorithms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    RankError,
    ShapeError,
    ZeroVarianceError,
)
from .linalg import Direction, KernelSpec, apply_sign_convention, secondary_direction
from .projections import (
    DEFAULT_KPCA_NODE_LIMIT,
    FIT_POWER_MAX_ITER,
    AxisModel,
    ProjectionConfig,
    ProjectionResult,
    project,
)
from .rng import node_seed
from .splits import (
    DEPDDP_BANDWIDTH_SCALE,
    DEPDDP_VALLEY_QUANTILE,
    SplitCandidate,
    depddp_split,
    infeasible_candidate,
    ipddp_split,
    kmeans_1d_split,
    pddp_split,
    two_means,
)
from .tree import DEFAULT_MIN_SAMPLE_SPLIT, ClusterNode, ClusterTree

ALGORITHMS = ("pddp", "depddp", "ipddp", "km_pddp", "bkm")

KDE_GRID_SIZE_DEFAULT = 512


@dataclass(frozen=True)
class AlgorithmConfig:
    """Hyper-parameters of one clustering run.

    ``max_clusters`` may be omitted only for depddp, whose valley rule stops
    by itself. ``projection`` is ignored by bkm (it bisects in the original
    space). ``restarts`` feeds bkm's 2-means; km_pddp's 1-D sweep is exact
    and ignores it. ``subtree_fixed_budget`` makes interactive edits under
    depddp restore the edited subtree's previous leaf count instead of
    re-running the natural stopping rule.
    """

    algorithm: str = "pddp"
    max_clusters: Optional[int] = None
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    trim_fraction: float = 0.1
    bandwidth_scale: float = DEPDDP_BANDWIDTH_SCALE
    valley_quantile: float = DEPDDP_VALLEY_QUANTILE
    min_sample_split: int = DEFAULT_MIN_SAMPLE_SPLIT
    seed: int = 0
    restarts: int = 5
    kde_grid_size: int = KDE_GRID_SIZE_DEFAULT
    kpca_node_limit: int = DEFAULT_KPCA_NODE_LIMIT
    subtree_fixed_budget: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )
        if self.max_clusters is not None and self.max_clusters < 1:
            raise ConfigurationError("max_clusters must be >= 1")
        if not 0.0 <= self.trim_fraction <= 0.49:
            raise ConfigurationError("trim_fraction must lie in [0, 0.49]")
        if self.bandwidth_scale <= 0:
            raise ConfigurationError("bandwidth_scale must be > 0")
        if not 0.0 <= self.valley_quantile <= 0.49:
            raise ConfigurationError("valley_quantile must lie in [0, 0.49]")
        if self.min_sample_split < 2:
            raise ConfigurationError("min_sample_split must be >= 2")
        if self.restarts < 1:
            raise ConfigurationError("restarts must be >= 1")
        if self.kde_grid_size < 16:
            raise ConfigurationError("kde_grid_size must be >= 16")

    def to_dict(self) -> dict:
        kernel = self.projection.kernel
        return {
            "algorithm": self.algorithm,
            "max_clusters": self.max_clusters,
            "projection": {
                "method": self.projection.method,
                "components": self.projection.components,
                "seed": self.projection.seed,
                "kernel": None
                if kernel is None
                else {
                    "name": kernel.name,
                    "gamma": kernel.gamma,
                    "degree": kernel.degree,
                    "coef0": kernel.coef0,
                },
            },
            "trim_fraction": self.trim_fraction,
            "bandwidth_scale": self.bandwidth_scale,
            "valley_quantile": self.valley_quantile,
            "min_sample_split": self.min_sample_split,
            "seed": self.seed,
            "restarts": self.restarts,
            "kde_grid_size": self.kde_grid_size,
            "kpca_node_limit": self.kpca_node_limit,
            "subtree_fixed_budget": self.subtree_fixed_budget,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AlgorithmConfig":
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
        known = {
            "algorithm",
            "max_clusters",
            "projection",
            "trim_fraction",
            "bandwidth_scale",
            "valley_quantile",
            "min_sample_split",
            "seed",
            "restarts",
            "kde_grid_size",
            "kpca_node_limit",
            "subtree_fixed_budget",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        kwargs = {k: v for k, v in doc.items() if k != "projection"}
        proj = doc.get("projection")
        if proj is not None:
            if not isinstance(proj, dict):
                raise ConfigurationError("projection must be a JSON object")
            kdoc = proj.get("kernel")
            kernel = None
            if kdoc is not None:
                kernel = KernelSpec(
                    name=kdoc.get("name", "rbf"),
                    gamma=kdoc.get("gamma"),
                    degree=int(kdoc.get("degree", 3)),
                    coef0=float(kdoc.get("coef0", 1.0)),
                )
            kwargs["projection"] = ProjectionConfig(
                method=proj.get("method", "pca"),
                kernel=kernel,
                seed=proj.get("seed"),
                components=proj.get("components"),
            )
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


class Driver:
    """Internal select-and-split engine bound to one config and dataset."""

    def __init__(self, config: AlgorithmConfig, X: np.ndarray):
        self.config = config
        self.X = np.asarray(X, dtype=np.float64)

    # -- candidate computation ----------------------------------------------

    def ensure_candidate(self, tree: ClusterTree, node: ClusterNode) -> None:
        """Project the leaf and compute its split candidate, once."""
        if node.candidate is not None:
            return
        cfg = self.config
        tag = "bkm" if cfg.algorithm == "bkm" else cfg.algorithm
        if node.size < max(2, cfg.min_sample_split):
            node.candidate = infeasible_candidate(tag)
            return
        rows = self.X[node.sample_indices]
        seed = node_seed(cfg.seed, node.sample_indices)
        try:
            if cfg.algorithm == "bkm":
                node.projection, node.candidate = self._bkm_candidate(rows, seed)
            else:
                node.projection = self._project_node(rows, seed)
                node.candidate = self._rule_candidate(node.projection)
        except (ZeroVarianceError, RankError):
            node.projection = None
            node.candidate = infeasible_candidate(tag)

    def _project_node(self, rows: np.ndarray, seed: int) -> ProjectionResult:
        cfg = self.config
        try:
            return project(
                rows,
                cfg.projection,
                seed=seed,
                kpca_node_limit=cfg.kpca_node_limit,
                max_iter=FIT_POWER_MAX_ITER,
            )
        except RankError:
            if cfg.projection.effective_components() == 2:
                # Rank-1 node: fall back to a single component so the node
                # stays splittable along its only axis.
                return project(
                    rows,
                    cfg.projection,
                    seed=seed,
                    components=1,
                    kpca_node_limit=cfg.kpca_node_limit,
                    max_iter=FIT_POWER_MAX_ITER,
                )
            raise

    def _rule_candidate(self, projection: ProjectionResult) -> SplitCandidate:
        cfg = self.config
        scores = projection.scores[:, 0]
        if cfg.algorithm == "pddp":
            return pddp_split(scores, scatter=projection.scatter)
        if cfg.algorithm == "depddp":
            return depddp_split(
                scores,
                bandwidth_scale=cfg.bandwidth_scale,
                grid_size=cfg.kde_grid_size,
                valley_quantile=cfg.valley_quantile,
            )
        if cfg.algorithm == "ipddp":
            return ipddp_split(scores, trim_fraction=cfg.trim_fraction)
        return kmeans_1d_split(scores)

    def _bkm_candidate(
        self, rows: np.ndarray, seed: int
    ) -> tuple[ProjectionResult, SplitCandidate]:
        """2-means bisection, recorded as a threshold on the centroid axis.

        The nearest-centroid partition is exactly ``projection >= midpoint``
        along the direction through the two centers, so storing that axis
        makes bkm nodes editable and predictable like every other rule.
        """
        assignment, inertia = two_means(rows, seed=seed, restarts=self.config.restarts)
        if not assignment.any() or assignment.all():
            raise ZeroVarianceError("2-means found no non-trivial bisection")
        c0 = rows[~assignment].mean(axis=0)
        c1 = rows[assignment].mean(axis=0)
        axis = c1 - c0
        norm = float(np.linalg.norm(axis))
        if norm <= 0.0:
            raise ZeroVarianceError("2-means centroids coincide")
        axis = apply_sign_convention(axis / norm)
        mean = rows.mean(axis=0)
        centered = rows - mean
        scores = centered @ axis
        split_point = float(((c0 + c1) / 2.0 - mean) @ axis)
        lo, hi = float(scores.min()), float(scores.max())
        if not (lo < split_point < hi):
            raise ZeroVarianceError("degenerate centroid axis")
        scatter = float(np.einsum("ij,ij->", centered, centered))
        model = AxisModel(
            mean=mean,
            axes=axis[None, :],
            magnitudes=np.array([float(np.linalg.norm(scores))]),
        )
        projection = ProjectionResult(
            scores=scores[:, None], model=model, method_tag="bkm", scatter=scatter
        )
        candidate = SplitCandidate(
            split_point=split_point,
            criterion=scatter,
            feasible=True,
            rule_tag="bkm",
        )
        return projection, candidate

    # -- view support ---------------------------------------------------------

    def ensure_view_projection(self, tree: ClusterTree, node: ClusterNode) -> None:
        """Guarantee the node has 2-D scores for visualization.

        PCA/kPCA recompute deterministically with two components (column 1
        is unchanged); bkm adds the dominant direction orthogonal to its
        centroid axis; ICA keeps whatever the fit produced, since whitening
        width changes its first component, and pads with zeros.
        """
        self.ensure_candidate(tree, node)
        proj = node.projection
        if proj is None or proj.scores.shape[1] >= 2:
            return
        rows = self.X[node.sample_indices]
        if proj.scores.shape[0] != node.size:
            proj = None  # deserialized stub without data-backed scores
        method = self.config.projection.method
        if self.config.algorithm != "bkm" and method in ("pca", "kpca"):
            seed = node_seed(self.config.seed, node.sample_indices)
            node.projection = project(
                rows,
                self.config.projection,
                seed=seed,
                components=2,
                kpca_node_limit=self.config.kpca_node_limit,
                max_iter=FIT_POWER_MAX_ITER,
            )
            return
        if proj is None:
            return
        second = np.zeros(node.size)
        model = proj.model
        if isinstance(model, AxisModel):
            centered = rows - model.mean
            first = Direction(vector=model.axes[0], magnitude=model.magnitudes[0])
            try:
                extra = secondary_direction(centered, first)
                second = centered @ extra.vector
                model.axes = np.vstack([model.axes, extra.vector[None, :]])
                model.magnitudes = np.append(model.magnitudes, extra.magnitude)
            except (ZeroVarianceError, ConvergenceError):
                model.axes = np.vstack([model.axes, np.zeros_like(model.axes[0])])
                model.magnitudes = np.append(model.magnitudes, 0.0)
        proj.scores = np.column_stack([proj.scores[:, 0], second])

    # -- the select-and-split loops -------------------------------------------

    def fit_tree(self) -> ClusterTree:
        tree = ClusterTree(self.X.shape[0], data=self.X)
        tree.config = self.config.to_dict()
        cfg = self.config
        first_round = True
        while True:
            if cfg.max_clusters is not None and tree.leaf_count() >= cfg.max_clusters:
                break
            for leaf_id in tree.leaf_ids():
                self.ensure_candidate(tree, tree.nodes[leaf_id])
            nid = tree.select_next_leaf(cfg.min_sample_split)
            if nid is None:
                if first_round and (cfg.max_clusters or 1) > 1:
                    warnings.warn(
                        "no feasible first split; returning the single-cluster "
                        "result",
                        stacklevel=3,
                    )
                break
            tree.split_node(nid)
            first_round = False
        return tree

    def resume(self, tree: ClusterTree, subtree_root: int, leaf_budget: int) -> None:
        """Re-run the loop restricted to a subtree after a manual edit.

        Fixed-k algorithms restore the subtree's previous leaf count; depddp
        runs its natural stopping rule (bounded by the global max_clusters
        when one was given), unless ``subtree_fixed_budget`` is set.
        """
        cfg = self.config
        use_budget = cfg.algorithm != "depddp" or cfg.subtree_fixed_budget
        while True:
            within = set(tree.subtree_leaf_ids(subtree_root))
            if use_budget and len(within) >= leaf_budget:
                break
            if cfg.max_clusters is not None and tree.leaf_count() >= cfg.max_clusters:
                break
            for leaf_id in sorted(within):
                self.ensure_candidate(tree, tree.nodes[leaf_id])
            nid = tree.select_next_leaf(cfg.min_sample_split, within=within)
            if nid is None:
                break
            tree.split_node(nid)


def _as_values(data) -> np.ndarray:
    values = getattr(data, "values", data)
    return np.asarray(values, dtype=np.float64)


def fit(config: AlgorithmConfig, data) -> tuple[ClusterTree, np.ndarray]:
    """Run the configured algorithm; returns (tree, labels).

    ``data`` is a DataMatrix or a plain n x d array. Deterministic: the same
    config and data always produce bit-identical labels.
    """
    if config.max_clusters is None and config.algorithm != "depddp":
        raise ConfigurationError(
            f"max_clusters is required for {config.algorithm} "
            "(only depddp discovers the cluster count)"
        )
    X = _as_values(data)
    if X.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {X.shape}")
    driver = Driver(config, X)
    tree = driver.fit_tree()
    return tree, tree.labels()


def make_driver(config: AlgorithmConfig, data) -> Driver:
    """Driver handle for interactive recomputation (see recompute_subtree)."""
    return Driver(config, _as_values(data))


def predict(tree: ClusterTree, config: AlgorithmConfig, data) -> np.ndarray:
    """Route new samples down the fitted tree to leaf labels.

    At each internal node the sample is projected onto the node's stored
    axis (dual form for kernel PCA) and branches by the node's split point;
    ties route right, matching the training convention.
    """
    X = _as_values(data)
    if X.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {X.shape}")
    n_features = None
    for node in tree.nodes.values():
        if node.projection is not None and isinstance(node.projection.model, AxisModel):
            n_features = node.projection.model.mean.shape[0]
            break
        if node.projection is not None and node.projection.model.rows is not None:
            n_features = node.projection.model.rows.shape[1]
            break
    if n_features is None and tree.data is not None:
        n_features = tree.data.shape[1]
    if n_features is not None and X.shape[1] != n_features:
        raise ShapeError(
            f"expected {n_features} features, got {X.shape[1]}"
        )
    labels_by_leaf = {leaf_id: rank for rank, leaf_id in enumerate(tree.leaf_ids())}
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(tree.root_id, np.arange(X.shape[0]))]
    while stack:
        nid, idx = stack.pop()
        if idx.size == 0:
            continue
        node = tree.nodes[nid]
        if node.is_leaf:
            out[idx] = labels_by_leaf[nid]
            continue
        point = node.split_point
        if node.projection is None or point is None:
            raise ShapeError(f"internal node {nid} lacks a routing model")
        scores = node.projection.model.project(X[idx])[:, 0]
        right = scores >= point
        stack.append((node.children[0], idx[~right]))
        stack.append((node.children[1], idx[right]))
    return out
