"""Dense numerical kernels shared by every projection method.

Column centering, dominant singular directions via power iteration, kernel
Gram matrices, and double centering. All functions are pure and operate on
plain float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DataValidationError,
    ShapeError,
    ZeroVarianceError,
)

# Successive-iterate tolerance. Power iteration's distance to the dominant
# eigenvector is ~ sqrt(2*tol)/(1-ratio) when it stops, so hitting |cosine|
# >= 1-1e-8 down to 1% spectral gaps (ratio ~0.98 on the squared spectrum)
# needs tol ~1e-13; looser defaults stall three orders of magnitude short.
DEFAULT_TOL = 1e-13
DEFAULT_MAX_ITER = 1000

KERNEL_NAMES = ("linear", "rbf", "polynomial", "sigmoid")


@dataclass(frozen=True)
class Direction:
    """A unit-norm axis together with its singular value or eigenvalue.

    Sign convention: the component of largest absolute value is nonnegative,
    which pins down the otherwise arbitrary +/- ambiguity.
    """

    vector: np.ndarray
    magnitude: float


def apply_sign_convention(vector: np.ndarray) -> np.ndarray:
    """Flip ``vector`` so its largest-magnitude component is nonnegative."""
    pivot = int(np.argmax(np.abs(vector)))
    if vector[pivot] < 0:
        return -vector
    return vector


def _validate_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ShapeError(f"expected a 2-D matrix with n,d >= 1, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise DataValidationError("matrix contains NaN or Inf values")
    return X


def center_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the column means; returns (centered matrix, mean vector)."""
    X = _validate_matrix(X)
    mean = X.mean(axis=0)
    return X - mean, mean


def _power_iterate(apply_op, start: np.ndarray, tol: float, max_iter: int):
    """Generic power iteration with stalled-start recovery.

    ``apply_op`` maps a unit vector to the next un-normalized iterate.
    Convergence is declared when 1 - |<v_k, v_{k+1}>| < tol. A stalled
    iterate (the operator annihilates it) is perturbed on one coordinate and
    the loop restarted; the perturbed coordinate cycles so adversarial
    orthogonal starts cannot stall twice in the same place.
    """
    v = start / np.linalg.norm(start)
    stall_coord = 0
    for _ in range(max_iter):
        w = apply_op(v)
        norm = np.linalg.norm(w)
        if norm <= 1e-300:
            v = v.copy()
            v[stall_coord % v.shape[0]] += 1e-3
            stall_coord += 1
            v /= np.linalg.norm(v)
            continue
        w /= norm
        if 1.0 - abs(float(v @ w)) < tol:
            return w, True
        v = w
    return v, False


def leading_singular_direction(
    Xc: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> Direction:
    """Dominant right singular direction of a column-centered matrix.

    Power iteration on X^T X with a deterministic all-ones start vector, so
    repeated runs are bit-identical without any seed. The magnitude is the
    corresponding singular value ||X v||.

    Raises ZeroVarianceError for an (effectively) all-zero matrix and
    ConvergenceError, carrying the last iterate, when the direction change
    stays above ``tol`` for ``max_iter`` steps.
    """
    Xc = _validate_matrix(Xc)
    if tol <= 0 or max_iter < 1:
        raise ConfigurationError("tol must be > 0 and max_iter >= 1")
    scale = np.abs(Xc).max()
    if scale == 0.0:
        raise ZeroVarianceError("matrix is identically zero")

    def op(v):
        return Xc.T @ (Xc @ v)

    start = np.ones(Xc.shape[1])
    v, converged = _power_iterate(op, start, tol, max_iter)
    v = apply_sign_convention(v)
    magnitude = float(np.linalg.norm(Xc @ v))
    if not converged:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations",
            last_direction=v,
            last_magnitude=magnitude,
        )
    return Direction(vector=v, magnitude=magnitude)


def secondary_direction(
    Xc: np.ndarray,
    first: Direction,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> Direction:
    """Dominant direction of ``Xc`` deflated by ``first``.

    Power iteration with re-orthogonalization against ``first`` on every
    step; the result is orthogonal to ``first`` to within 1e-8. Rank-1 data
    raises ZeroVarianceError (callers substitute a zero second axis).
    """
    Xc = _validate_matrix(Xc)
    u = np.asarray(first.vector, dtype=np.float64)
    if u.shape != (Xc.shape[1],):
        raise ShapeError("first direction length does not match column count")

    def op(v):
        w = Xc.T @ (Xc @ v)
        return w - (w @ u) * u

    start = np.ones(Xc.shape[1])
    start = start - (start @ u) * u
    if np.linalg.norm(start) <= 1e-12:
        start = np.zeros(Xc.shape[1])
        start[int(np.argmin(np.abs(u)))] = 1.0
        start = start - (start @ u) * u

    # Residual variance after removing the first axis; zero means rank 1.
    residual = Xc - np.outer(Xc @ u, u)
    res_scale = np.abs(residual).max()
    if res_scale <= 1e-12 * max(1.0, np.abs(Xc).max()):
        raise ZeroVarianceError("matrix has rank 1; no secondary direction")

    v, converged = _power_iterate(op, start, tol, max_iter)
    v = v - (v @ u) * u
    v /= np.linalg.norm(v)
    v = apply_sign_convention(v)
    magnitude = float(np.linalg.norm(Xc @ v))
    if not converged:
        raise ConvergenceError(
            f"deflated power iteration did not converge in {max_iter} iterations",
            last_direction=v,
            last_magnitude=magnitude,
        )
    return Direction(vector=v, magnitude=magnitude)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameters for Gram-matrix construction.

    ``gamma`` defaults to 1/d at evaluation time when left as None.
    """

    name: str = "rbf"
    gamma: float | None = None
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        if self.name not in KERNEL_NAMES:
            raise ConfigurationError(
                f"unknown kernel {self.name!r}; expected one of {KERNEL_NAMES}"
            )
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigurationError("kernel gamma must be > 0")
        if self.name == "polynomial" and (
            self.degree < 1 or int(self.degree) != self.degree
        ):
            raise ConfigurationError("polynomial degree must be an integer >= 1")

    def effective_gamma(self, n_features: int) -> float:
        return self.gamma if self.gamma is not None else 1.0 / n_features


def gram_matrix(X: np.ndarray, kernel: KernelSpec) -> np.ndarray:
    """Pairwise kernel matrix K[i, j] = k(x_i, x_j).

    The linear kernel is returned as the literal product X X^T. The other
    kernels are built from a symmetrized inner-product matrix so K is exactly
    symmetric; the rbf diagonal is exactly 1 because self-distances are
    pinned to zero before exponentiation.
    """
    X = _validate_matrix(X)
    if not isinstance(kernel, KernelSpec):
        raise ConfigurationError("kernel must be a KernelSpec")
    inner = X @ X.T
    if kernel.name == "linear":
        return inner
    inner = (inner + inner.T) / 2.0
    gamma = kernel.effective_gamma(X.shape[1])
    if kernel.name == "rbf":
        sq_norms = np.diag(inner).copy()
        d2 = sq_norms[:, None] + sq_norms[None, :] - 2.0 * inner
        np.maximum(d2, 0.0, out=d2)
        np.fill_diagonal(d2, 0.0)
        return np.exp(-gamma * d2)
    if kernel.name == "polynomial":
        return (gamma * inner + kernel.coef0) ** int(kernel.degree)
    return np.tanh(gamma * inner + kernel.coef0)


def center_gram(K: np.ndarray) -> np.ndarray:
    """Double-center a Gram matrix: Kc = K - 1K/n - K1/n + 1K1/n^2.

    Idempotent and linear; every row and column of the result sums to zero.
    """
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"Gram matrix must be square, got shape {K.shape}")
    row_means = K.mean(axis=1, keepdims=True)
    col_means = K.mean(axis=0, keepdims=True)
    total_mean = K.mean()
    return K - row_means - col_means + total_mean


def leading_gram_eigenpair(
    Kc: np.ndarray,
    deflate: list[np.ndarray] | None = None,
    psd: bool = True,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, float]:
    """Top algebraic eigenpair of a centered Gram matrix by power iteration.

    ``deflate`` lists already extracted eigenvectors to project out each
    step. For indefinite kernels (``psd=False``, i.e. sigmoid) the largest
    |eigenvalue| mode can be negative, so the iteration runs on
    Kc + sigma*I with sigma an infinity-norm bound on the spectrum; the
    shift preserves eigenvectors and makes the largest algebraic eigenvalue
    dominant.
    """
    Kc = np.asarray(Kc, dtype=np.float64)
    n = Kc.shape[0]
    basis = list(deflate or [])
    scale = float(np.abs(Kc).max())
    if scale <= 1e-300:
        raise ZeroVarianceError("centered Gram matrix is numerically zero")
    sigma = 0.0 if psd else float(np.abs(Kc).sum(axis=1).max())

    def op(v):
        w = Kc @ v + sigma * v
        for u in basis:
            w -= (u @ w) * u
        return w

    start = np.ones(n)
    for u in basis:
        start = start - (u @ start) * u
    if np.linalg.norm(start) <= 1e-12:
        start = np.zeros(n)
        start[0] = 1.0
        for u in basis:
            start = start - (u @ start) * u
    v, converged = _power_iterate(op, start, tol, max_iter)
    for u in basis:
        v = v - (u @ v) * u
    norm = np.linalg.norm(v)
    if norm <= 1e-300:
        raise ZeroVarianceError("deflated Gram matrix is numerically zero")
    v /= norm
    v = apply_sign_convention(v)
    lam = float(v @ (Kc @ v))
    if not converged:
        raise ConvergenceError(
            f"Gram power iteration did not converge in {max_iter} iterations",
            last_direction=v,
            last_magnitude=lam,
        )
    return v, lam
