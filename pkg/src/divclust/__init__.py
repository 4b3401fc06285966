"""Divisive hierarchical clustering with editable split points.

A library and CLI implementing the PDDP family (pddp, depddp, ipddp,
km_pddp, bkm) with pluggable per-node projections (PCA, kernel PCA,
FastICA), clustering evaluation, dendrogram/split-view export, and an HTTP
session service for interactively moving split points and recomputing the
affected subtree.
"""

__version__ = "0.1.0"

from .algorithms import ALGORITHMS, AlgorithmConfig, fit, make_driver, predict
from .data import DataMatrix, load_matrix, make_blobs, save_matrix
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DataValidationError,
    DegenerateSplitError,
    DivclustError,
    LinkageValidationError,
    ParseError,
    RankError,
    ShapeError,
    StructuralError,
    ZeroVarianceError,
)
from .evaluation import BenchReport, BenchRow, bench, nmi
from .linalg import Direction, KernelSpec
from .projections import ProjectionConfig, ProjectionResult
from .rng import SeededPrng
from .splits import SplitCandidate
from .tree import ClusterNode, ClusterTree

__all__ = [
    "ALGORITHMS",
    "AlgorithmConfig",
    "BenchReport",
    "BenchRow",
    "ClusterNode",
    "ClusterTree",
    "ConfigurationError",
    "ConvergenceError",
    "DataMatrix",
    "DataValidationError",
    "DegenerateSplitError",
    "Direction",
    "DivclustError",
    "KernelSpec",
    "LinkageValidationError",
    "ParseError",
    "ProjectionConfig",
    "ProjectionResult",
    "RankError",
    "SeededPrng",
    "ShapeError",
    "SplitCandidate",
    "StructuralError",
    "ZeroVarianceError",
    "bench",
    "fit",
    "load_matrix",
    "make_blobs",
    "make_driver",
    "nmi",
    "predict",
    "save_matrix",
]
