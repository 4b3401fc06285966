"""Per-node dimensionality reduction: PCA, kernel PCA, and FastICA.

Each projector returns a :class:`ProjectionResult` whose first score column
is the splitting axis. The ``model`` carries whatever is needed to project
new samples onto that axis later (a primal direction for PCA/ICA, dual
coefficients plus training rows for kernel PCA).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    RankError,
    StructuralError,
    ZeroVarianceError,
)
from .linalg import (
    Direction,
    KernelSpec,
    apply_sign_convention,
    center_columns,
    center_gram,
    gram_matrix,
    leading_gram_eigenpair,
    leading_singular_direction,
    secondary_direction,
)
from .rng import SeededPrng

PROJECTION_METHODS = ("pca", "kpca", "ica")

ICA_TOL = 1e-4
ICA_MAX_ITER = 200

# Iteration cap for fit-time splitting projections. Noise-dominated nodes
# have near-flat spectra that cannot reach DEFAULT_TOL in any budget; for
# choosing a splitting axis, any vector this deep in the dominant subspace
# is equivalent, so drivers cap the work instead of burning 1000 iterations
# per leaf (the public linalg surface keeps the strict defaults).
FIT_POWER_MAX_ITER = 200

# O(n^2) Gram construction fails loudly above this node size unless raised.
DEFAULT_KPCA_NODE_LIMIT = 20000


@dataclass(frozen=True)
class ProjectionConfig:
    """Which reduction runs at every node, and its parameters.

    ``kernel`` applies only to kpca, ``seed`` only to ica. ``components``
    is 1 or 2; when None it defaults to 2 for ica (the contrast rotation
    needs a plane to be more than whitened PCA) and 1 otherwise.
    """

    method: str = "pca"
    kernel: Optional[KernelSpec] = None
    seed: Optional[int] = None
    components: Optional[int] = None

    def __post_init__(self):
        if self.method not in PROJECTION_METHODS:
            raise ConfigurationError(
                f"unknown projection {self.method!r}; expected one of {PROJECTION_METHODS}"
            )
        if self.components is not None and self.components not in (1, 2):
            raise ConfigurationError("components must be 1 or 2")
        if self.kernel is not None and self.method != "kpca":
            raise ConfigurationError("kernel is only valid for method='kpca'")
        if self.seed is not None and self.method != "ica":
            raise ConfigurationError("seed is only valid for method='ica'")

    def effective_components(self) -> int:
        if self.components is not None:
            return self.components
        return 2 if self.method == "ica" else 1

    def effective_kernel(self) -> KernelSpec:
        return self.kernel if self.kernel is not None else KernelSpec()


@dataclass
class ProjectionResult:
    """Low-dimensional scores plus the model that produced them.

    ``scores`` is n x components with column 0 the splitting axis. ``model``
    is one of the *Model classes below. ``scatter`` caches the node's total
    squared deviation from its mean (the PDDP/BKM selection criterion).
    """

    scores: np.ndarray
    model: object
    method_tag: str
    scatter: float


@dataclass
class AxisModel:
    """Primal projection: score = (x - mean) . axis, one column per axis."""

    mean: np.ndarray
    axes: np.ndarray  # components x d
    magnitudes: np.ndarray

    def project(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) @ self.axes.T


@dataclass
class KernelDualModel:
    """Dual kernel projection over the node's training rows.

    score_k(x) = sum_i alphas[k, i] * kc(x, x_i), with kc the double-centered
    kernel. Centering statistics of the training Gram are stored so new
    samples can be centered consistently.
    """

    rows: np.ndarray  # node training rows, m x d
    kernel: KernelSpec
    alphas: np.ndarray  # components x m (eigenvector / sqrt(eigenvalue))
    col_means: np.ndarray
    total_mean: float

    def project(self, X: np.ndarray) -> np.ndarray:
        if self.rows is None:
            raise StructuralError(
                "kernel projection model has no training rows; reload the "
                "tree with its training data"
            )
        K = _cross_kernel(X, self.rows, self.kernel)
        Kc = K - K.mean(axis=1, keepdims=True) - self.col_means + self.total_mean
        return Kc @ self.alphas.T


def _cross_kernel(A: np.ndarray, B: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    gamma = kernel.effective_gamma(B.shape[1])
    inner = A @ B.T
    if kernel.name == "linear":
        return inner
    if kernel.name == "rbf":
        a2 = np.einsum("ij,ij->i", A, A)
        b2 = np.einsum("ij,ij->i", B, B)
        d2 = a2[:, None] + b2[None, :] - 2.0 * inner
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-gamma * d2)
    if kernel.name == "polynomial":
        return (gamma * inner + kernel.coef0) ** int(kernel.degree)
    return np.tanh(gamma * inner + kernel.coef0)


def _node_scatter(Xc: np.ndarray) -> float:
    return float(np.einsum("ij,ij->", Xc, Xc))


def _leading_direction(Xc: np.ndarray, max_iter: int = None) -> Direction:
    """Leading direction, accepting the last iterate on near-tied spectra.

    A spectrum gap below ~1e-3 cannot reach the 1e-9 direction tolerance in
    the iteration budget, but any vector that close to the dominant subspace
    is an equally good splitting axis, so the final iterate is used rather
    than aborting the clustering run.
    """
    kwargs = {} if max_iter is None else {"max_iter": max_iter}
    try:
        return leading_singular_direction(Xc, **kwargs)
    except ConvergenceError as exc:
        return Direction(vector=exc.last_direction, magnitude=exc.last_magnitude)


def _secondary_lenient(Xc: np.ndarray, first: Direction, max_iter: int = None) -> Direction:
    kwargs = {} if max_iter is None else {"max_iter": max_iter}
    try:
        return secondary_direction(Xc, first, **kwargs)
    except ConvergenceError as exc:
        return Direction(vector=exc.last_direction, magnitude=exc.last_magnitude)


def project_pca(
    X: np.ndarray, components: int = 1, max_iter: int = None
) -> ProjectionResult:
    """Principal-direction scores of the (internally centered) node data."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        raise ZeroVarianceError("need at least 2 samples to project")
    Xc, mean = center_columns(X)
    first = _leading_direction(Xc, max_iter)
    axes = [first.vector]
    mags = [first.magnitude]
    if components == 2:
        try:
            second = _secondary_lenient(Xc, first, max_iter)
            axes.append(second.vector)
            mags.append(second.magnitude)
        except ZeroVarianceError:
            axes.append(np.zeros(X.shape[1]))
            mags.append(0.0)
    model = AxisModel(mean=mean, axes=np.array(axes), magnitudes=np.array(mags))
    return ProjectionResult(
        scores=Xc @ model.axes.T,
        model=model,
        method_tag="pca",
        scatter=_node_scatter(Xc),
    )


def project_kpca(
    X: np.ndarray,
    kernel: KernelSpec,
    components: int = 1,
    node_limit: int = DEFAULT_KPCA_NODE_LIMIT,
    max_iter: int = None,
) -> ProjectionResult:
    """Kernel-PCA scores: top eigenvectors of the centered Gram, scaled by
    sqrt(eigenvalue)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ZeroVarianceError("need at least 2 samples to project")
    if n > node_limit:
        raise ConfigurationError(
            f"kernel PCA on a node of {n} samples exceeds the limit of "
            f"{node_limit}; raise kpca_node_limit to allow O(n^2) memory"
        )
    Xc, mean = center_columns(X)
    K = gram_matrix(X, kernel)
    Kc = center_gram(K)
    psd = kernel.name != "sigmoid"
    kwargs = {} if max_iter is None else {"max_iter": max_iter}
    try:
        v1, lam1 = leading_gram_eigenpair(Kc, psd=psd, **kwargs)
    except ConvergenceError as exc:
        v1, lam1 = exc.last_direction, exc.last_magnitude
    if lam1 <= 1e-12 * max(1.0, float(np.abs(Kc).max())):
        raise ZeroVarianceError("centered Gram matrix has no positive spectrum")
    vs = [v1]
    lams = [lam1]
    if components == 2:
        try:
            v2, lam2 = leading_gram_eigenpair(Kc, deflate=[v1], psd=psd, **kwargs)
        except ZeroVarianceError:
            v2, lam2 = np.zeros(n), 0.0
        except ConvergenceError as exc:
            v2, lam2 = exc.last_direction, exc.last_magnitude
        if lam2 <= 1e-12 * lam1:
            v2, lam2 = np.zeros(n), 0.0
        vs.append(v2)
        lams.append(lam2)
    scores = np.column_stack([v * np.sqrt(max(lam, 0.0)) for v, lam in zip(vs, lams)])
    alphas = np.vstack(
        [v / np.sqrt(lam) if lam > 0 else np.zeros(n) for v, lam in zip(vs, lams)]
    )
    model = KernelDualModel(
        rows=X.copy(),
        kernel=kernel,
        alphas=alphas,
        col_means=K.mean(axis=0, keepdims=True),
        total_mean=float(K.mean()),
    )
    return ProjectionResult(
        scores=scores, model=model, method_tag="kpca", scatter=_node_scatter(Xc)
    )


def _whiten(
    Xc: np.ndarray, components: int, max_iter: int = None
) -> tuple[np.ndarray, np.ndarray]:
    """PCA-whiten to ``components`` dims.

    Returns (Z, basis) with Z of unit sample variance per column and
    ``basis`` the d-space matrix such that Z = Xc @ basis.T.
    """
    n = Xc.shape[0]
    first = _leading_direction(Xc, max_iter)
    directions = [first]
    if components == 2:
        try:
            directions.append(_secondary_lenient(Xc, first, max_iter))
        except ZeroVarianceError:
            raise RankError("whitening rank 1 is below the 2 requested components")
    basis_rows = []
    for d in directions:
        if d.magnitude <= 1e-10 * first.magnitude:
            raise RankError("whitening rank is below the requested component count")
        basis_rows.append(d.vector * (np.sqrt(n) / d.magnitude))
    basis = np.array(basis_rows)
    return Xc @ basis.T, basis


def project_ica(
    X: np.ndarray, components: int = 2, seed: int = 0, max_iter: int = None
) -> ProjectionResult:
    """FastICA with the deflation scheme and log-cosh contrast.

    The node is PCA-whitened to ``components`` dims, then unit vectors are
    extracted one by one with the fixed-point update
    w <- E[z g(w.z)] - E[g'(w.z)] w, g = tanh, orthogonalizing against the
    components already found. Identical seeds give bit-identical scores; the
    first extracted component is the splitting axis.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ZeroVarianceError("need at least 2 samples to project")
    if d < components:
        raise RankError(f"{components} components requested from {d} features")
    Xc, mean = center_columns(X)
    Z, basis = _whiten(Xc, components, max_iter)
    prng = SeededPrng(seed)
    W = np.zeros((components, components))
    for p in range(components):
        w = np.array([prng.normal() for _ in range(components)])
        w -= W[:p].T @ (W[:p] @ w)
        w /= np.linalg.norm(w)
        for _ in range(ICA_MAX_ITER):
            wz = Z @ w
            g = np.tanh(wz)
            g_prime = 1.0 - g * g
            w_new = (Z.T @ g) / n - g_prime.mean() * w
            w_new -= W[:p].T @ (W[:p] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm <= 1e-300:
                # Contrast annihilated the iterate; nudge deterministically.
                w_new = w.copy()
                w_new[p % components] += 1e-3
                w_new -= W[:p].T @ (W[:p] @ w_new)
                norm = np.linalg.norm(w_new)
            w_new /= norm
            delta = 1.0 - abs(float(w_new @ w))
            w = w_new
            if delta < ICA_TOL:
                break
        W[p] = apply_sign_convention(w)
    scores = Z @ W.T
    # Effective primal axes: scores = Xc @ (W @ basis).T
    model = AxisModel(
        mean=mean,
        axes=W @ basis,
        magnitudes=np.ones(components),
    )
    return ProjectionResult(
        scores=scores, model=model, method_tag="ica", scatter=_node_scatter(Xc)
    )


def project(
    X: np.ndarray,
    config: ProjectionConfig,
    seed: int = 0,
    components: Optional[int] = None,
    kpca_node_limit: int = DEFAULT_KPCA_NODE_LIMIT,
    max_iter: int = None,
) -> ProjectionResult:
    """Dispatch to the configured projection method.

    ``seed`` is the per-node seed (ica only; the config's own seed wins when
    set). ``components`` overrides the config, e.g. for 2-D view exports.
    """
    k = components if components is not None else config.effective_components()
    if config.method == "pca":
        return project_pca(X, components=k, max_iter=max_iter)
    if config.method == "kpca":
        return project_kpca(
            X,
            config.effective_kernel(),
            components=k,
            node_limit=kpca_node_limit,
            max_iter=max_iter,
        )
    ica_seed = config.seed if config.seed is not None else seed
    return project_ica(X, components=k, seed=ica_seed, max_iter=max_iter)
