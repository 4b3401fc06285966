"""Split-point selection rules operating on a node's 1-D splitting scores.

Each rule returns a :class:`SplitCandidate`: where to cut the axis and how
attractive the cut is. Criteria are normalized so that "larger = split this
leaf sooner" under a single maximize-criterion selector; infeasible
candidates carry criterion 0 and are never selected.

The partition convention everywhere is ``left = scores < split_point``,
``right = scores >= split_point``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError
from .rng import SeededPrng

KDE_GRID_SIZE = 512
TWO_MEANS_MAX_ITER = 300


@dataclass(frozen=True)
class SplitCandidate:
    """A proposed 1-D split of a node.

    ``split_point`` is a coordinate on the splitting axis; when ``feasible``
    it lies strictly inside the open score range and both sides of the cut
    are non-empty. ``rule_tag`` names the rule that produced it.
    """

    split_point: float
    criterion: float
    feasible: bool
    rule_tag: str


def infeasible_candidate(rule_tag: str) -> SplitCandidate:
    return SplitCandidate(
        split_point=float("nan"), criterion=0.0, feasible=False, rule_tag=rule_tag
    )


@dataclass(frozen=True)
class Kde1d:
    """A Gaussian kernel density estimate evaluated on an even grid."""

    points: np.ndarray
    bandwidth: float
    grid: np.ndarray
    densities: np.ndarray


def local_minima_indices(values: np.ndarray) -> np.ndarray:
    """Interior local minima of a sampled curve, plateau-aware.

    Runs of equal values count as a single point; a run is a minimum when
    the nearest differing value on each side is strictly greater (so an
    exactly-tied flat valley bottom, e.g. from symmetric data, still
    registers). The returned index is the leftmost point of each run,
    matching the smaller-coordinate tie-break. Runs touching the ends are
    not interior.
    """
    values = np.asarray(values, dtype=np.float64)
    change = np.flatnonzero(np.diff(values) != 0.0)
    starts = np.concatenate([[0], change + 1])
    run_values = values[starts]
    ends = np.concatenate([change, [values.shape[0] - 1]])
    if run_values.shape[0] < 3:
        return np.empty(0, dtype=np.int64)
    is_min = (run_values[1:-1] < run_values[:-2]) & (run_values[1:-1] < run_values[2:])
    keep = np.flatnonzero(is_min) + 1
    keep = keep[(starts[keep] > 0) & (ends[keep] < values.shape[0] - 1)]
    return starts[keep].astype(np.int64)


def silverman_bandwidth(points: np.ndarray, scale: float = 1.0) -> float:
    """Silverman's rule h = 0.9 * min(sigma, IQR/1.34) * m^(-1/5).

    ``scale`` multiplies the rule-of-thumb value; the result is floored at
    1e-9 times the data range so heavy ties cannot collapse the bandwidth
    to zero while any spread remains.
    """
    points = np.asarray(points, dtype=np.float64)
    m = points.shape[0]
    spread_range = float(points.max() - points.min()) if m else 0.0
    if m < 2:
        return max(0.0, 1e-9 * spread_range)
    sigma = float(points.std(ddof=1))
    q75, q25 = np.percentile(points, [75, 25])
    iqr = float(q75 - q25)
    h = 0.9 * min(sigma, iqr / 1.34) * m ** (-0.2) * scale
    return max(h, 1e-9 * spread_range)


def kde_1d(points, bandwidth: float, grid_size: int = KDE_GRID_SIZE) -> Kde1d:
    """Evaluate the Gaussian KDE on a grid spanning [min-3h, max+3h]."""
    points = np.asarray(points, dtype=np.float64).ravel()
    if points.shape[0] < 1:
        raise ShapeError("kde_1d needs at least one point")
    if bandwidth <= 0:
        raise ConfigurationError("bandwidth must be > 0")
    if grid_size < 16:
        raise ConfigurationError("grid_size must be >= 16")
    lo = points.min() - 3.0 * bandwidth
    hi = points.max() + 3.0 * bandwidth
    grid = np.linspace(lo, hi, grid_size)
    z = (grid[:, None] - points[None, :]) / bandwidth
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (
        points.shape[0] * bandwidth * np.sqrt(2.0 * np.pi)
    )
    return Kde1d(points=points, bandwidth=bandwidth, grid=grid, densities=dens)


DEPDDP_BANDWIDTH_SCALE = 1.25
DEPDDP_VALLEY_QUANTILE = 0.1


def depddp_split(
    scores,
    bandwidth_scale: float = DEPDDP_BANDWIDTH_SCALE,
    grid_size: int = KDE_GRID_SIZE,
    valley_quantile: float = DEPDDP_VALLEY_QUANTILE,
) -> SplitCandidate:
    """Density valley rule: cut at the lowest interior local minimum of the
    KDE of the scores; no admissible minimum means the leaf looks unimodal
    and the candidate is infeasible (this is the automatic stopping rule).

    Minima are admissible when they lie strictly inside the score range and
    within the central [q, 1-q] score quantile band; near-zero-density
    wiggles in the sample tails would otherwise masquerade as the deepest
    valley and shave off single-point slivers. Criterion is the negated
    valley density, so the deepest valley across leaves wins under the
    maximize-criterion selector. Ties go to the smaller coordinate.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.shape[0] < 2:
        raise ShapeError("need at least 2 scores")
    if not 0.0 <= valley_quantile <= 0.49:
        raise ConfigurationError("valley_quantile must lie in [0, 0.49]")
    lo, hi = float(scores.min()), float(scores.max())
    if hi <= lo:
        return infeasible_candidate("depddp")
    h = silverman_bandwidth(scores, scale=bandwidth_scale)
    if h <= 0:
        return infeasible_candidate("depddp")
    kde = kde_1d(scores, h, grid_size)
    idx = local_minima_indices(kde.densities)
    band_lo, band_hi = np.quantile(scores, [valley_quantile, 1.0 - valley_quantile])
    idx = idx[
        (kde.grid[idx] > max(lo, float(band_lo)))
        & (kde.grid[idx] < min(hi, float(band_hi)))
    ]
    if idx.size == 0:
        return infeasible_candidate("depddp")
    d = kde.densities
    best = idx[int(np.argmin(d[idx]))]
    return SplitCandidate(
        split_point=float(kde.grid[best]),
        criterion=float(-d[best]),
        feasible=True,
        rule_tag="depddp",
    )


def ipddp_split(scores, trim_fraction: float = 0.1) -> SplitCandidate:
    """Maximum-gap rule with tail trimming for outlier control.

    floor(trim_fraction * n) points at each tail are ignored while searching
    for the widest gap between consecutive sorted scores; the cut is the gap
    midpoint, and the final partition still assigns every point (trimmed
    tails included) by comparison against the cut.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n = scores.shape[0]
    if n < 2:
        raise ShapeError("need at least 2 scores")
    if not 0.0 <= trim_fraction <= 0.49:
        raise ConfigurationError("trim_fraction must lie in [0, 0.49]")
    ordered = np.sort(scores)
    t = int(np.floor(trim_fraction * n))
    retained = ordered[t : n - t]
    if retained.shape[0] < 2:
        return infeasible_candidate("ipddp")
    gaps = np.diff(retained)
    best = int(np.argmax(gaps))  # leftmost on ties
    gap = float(gaps[best])
    if gap <= 0.0:
        return infeasible_candidate("ipddp")
    return SplitCandidate(
        split_point=float((retained[best] + retained[best + 1]) / 2.0),
        criterion=gap,
        feasible=True,
        rule_tag="ipddp",
    )


def kmeans_1d_split(scores) -> SplitCandidate:
    """Exact optimal 2-means on the scores via a prefix-sum boundary sweep.

    Every cut between distinct consecutive sorted values is scored by
    within-cluster sum of squares in O(n) total; the criterion is the
    variance explained by the best cut (total SS minus optimal WCSS). Ties
    go to the smaller boundary index.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    n = scores.shape[0]
    if n < 2:
        raise ShapeError("need at least 2 scores")
    ordered = np.sort(scores)
    if ordered[0] == ordered[-1]:
        return infeasible_candidate("km")
    # Work mean-shifted for numerical stability; WCSS is shift-invariant.
    shifted = ordered - ordered.mean()
    s1 = np.cumsum(shifted)
    s2 = np.cumsum(shifted * shifted)
    total1, total2 = s1[-1], s2[-1]
    sizes_left = np.arange(1, n, dtype=np.float64)
    left1, left2 = s1[:-1], s2[:-1]
    wcss = (
        left2
        - left1 * left1 / sizes_left
        + (total2 - left2)
        - (total1 - left1) ** 2 / (n - sizes_left)
    )
    widths = np.diff(ordered)
    wcss[widths <= 0.0] = np.inf  # zero-width cuts cannot define a partition
    best = int(np.argmin(wcss))
    tss = float(total2 - total1 * total1 / n)
    criterion = max(tss - float(wcss[best]), 0.0)
    return SplitCandidate(
        split_point=float((ordered[best] + ordered[best + 1]) / 2.0),
        criterion=criterion,
        feasible=True,
        rule_tag="km",
    )


def pddp_split(scores, scatter: float) -> SplitCandidate:
    """Sign rule: cut the centered scores at zero.

    Feasible only when both signs are present, which for centered scores is
    equivalent to 0 lying strictly inside the score range. ``scatter`` (the
    node's total squared deviation from its mean in the full space) is the
    leaf-selection criterion.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.shape[0] < 2:
        raise ShapeError("need at least 2 scores")
    if not (scores.min() < 0.0 < scores.max()):
        return infeasible_candidate("pddp")
    return SplitCandidate(
        split_point=0.0,
        criterion=float(scatter),
        feasible=True,
        rule_tag="pddp",
    )


def _nearest_assignment(X: np.ndarray, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    d0 = np.einsum("ij,ij->i", X - c0, X - c0)
    d1 = np.einsum("ij,ij->i", X - c1, X - c1)
    return d1 < d0  # ties stay with center 0


def two_means(
    X: np.ndarray, seed: int = 0, restarts: int = 5, trace: list | None = None
) -> tuple[np.ndarray, float]:
    """Lloyd's 2-means with k-means++ initialization.

    Runs ``restarts`` independent initializations from the shared seeded
    PRNG and returns (assignment, inertia) of the best run; ``assignment``
    is a boolean array (True = second cluster). Identical points yield an
    all-False assignment with inertia 0, which callers treat as infeasible.
    ``trace``, when given, collects the per-iteration inertia of every
    restart for convergence monitoring.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ShapeError("need at least 2 samples")
    if restarts < 1:
        raise ConfigurationError("restarts must be >= 1")
    prng = SeededPrng(seed)
    best_assign = np.zeros(n, dtype=bool)
    best_inertia = np.inf
    found = False
    for _ in range(restarts):
        run_trace = [] if trace is not None else None
        c0 = X[prng.randint(n)].copy()
        diff = X - c0
        d2 = np.einsum("ij,ij->i", diff, diff)
        total = float(d2.sum())
        if total <= 0.0:
            return np.zeros(n, dtype=bool), 0.0
        c1 = X[prng.choice_weighted(np.cumsum(d2))].copy()
        assign = _nearest_assignment(X, c0, c1)
        for _ in range(TWO_MEANS_MAX_ITER):
            for side in (False, True):
                mask = assign == side
                if not mask.any():
                    other = c1 if side is False else c0
                    far = int(
                        np.argmax(np.einsum("ij,ij->i", X - other, X - other))
                    )
                    assign = assign.copy()
                    assign[far] = side
                    mask = assign == side
                if side is False:
                    c0 = X[mask].mean(axis=0)
                else:
                    c1 = X[mask].mean(axis=0)
            if run_trace is not None:
                d0 = np.einsum("ij,ij->i", X - c0, X - c0)
                d1 = np.einsum("ij,ij->i", X - c1, X - c1)
                run_trace.append(float(np.where(assign, d1, d0).sum()))
            new_assign = _nearest_assignment(X, c0, c1)
            if np.array_equal(new_assign, assign):
                break
            assign = new_assign
        d0 = np.einsum("ij,ij->i", X - c0, X - c0)
        d1 = np.einsum("ij,ij->i", X - c1, X - c1)
        inertia = float(np.where(assign, d1, d0).sum())
        if run_trace is not None:
            trace.append(run_trace)
        if inertia < best_inertia:
            best_inertia = inertia
            best_assign = assign
            found = True
    if not found or best_assign.all() or not best_assign.any():
        return np.zeros(n, dtype=bool), 0.0
    return best_assign, best_inertia
