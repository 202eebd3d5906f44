"""K-means with a selectable distance measure.

Two measures are supported: ``"cosine"`` (one minus the cosine of the angle
between vectors; spherical K-means update) and ``"sqeuclidean"`` (classic
Lloyd iteration). Everything is deterministic for a fixed seed: the
initialization uses k-means++ driven by a seeded PCG64 stream, ties resolve
toward the lowest centroid index, and reductions run in a fixed order so the
thread count never changes the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

DISTANCES = ("cosine", "sqeuclidean")

# Below this norm a vector has no usable direction.
ZERO_NORM = 1e-12

# Points per work item when distances are computed on several threads.
_CHUNK = 4096


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 3
    distance: str = "cosine"
    max_iter: int = 100
    tol: float = 1e-4
    seed: int = 42
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol >= 0:
            raise ValueError("tol must be >= 0")
        if self.distance not in DISTANCES:
            raise ValueError(f"unknown distance {self.distance!r}, expected one of {DISTANCES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class Assignment:
    """Per-point cluster labels and the summed distance to the own centroid."""

    labels: np.ndarray
    objective: float


@dataclass
class KMeansResult:
    assignment: Assignment
    centroids: np.ndarray
    iterations: int
    # objective of the assignment made at the start of every iteration
    history: list[float] = field(default_factory=list)


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    if x.size < 1:
        raise ValueError("vectors must have dimension >= 1")
    return x, y


def cosine_distance(x, y) -> float:
    """``1 - x.y / (|x| |y|)``; exactly 1 when either vector has zero norm."""
    x, y = _check_pair(x, y)
    sx = float(np.dot(x, x))
    sy = float(np.dot(y, y))
    if sx < ZERO_NORM ** 2 or sy < ZERO_NORM ** 2:
        return 1.0
    # sqrt(s * s) == s exactly in IEEE arithmetic, so d(x, x) is exactly 0
    d = 1.0 - float(np.dot(x, y)) / np.sqrt(sx * sy)
    return min(max(d, 0.0), 2.0)


def sq_euclidean_distance(x, y) -> float:
    x, y = _check_pair(x, y)
    diff = x - y
    return float(np.dot(diff, diff))


def _row_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Explicit per-column accumulation keeps the summation order fixed (no BLAS).
    out = a[..., 0] * b[..., 0]
    for j in range(1, a.shape[-1]):
        out = out + a[..., j] * b[..., j]
    return out


def pairwise_distances(points: np.ndarray, centroids: np.ndarray, distance: str) -> np.ndarray:
    """Distance from every point to every centroid, shape ``(n, k)``."""
    p = points[:, None, :]
    c = centroids[None, :, :]
    if distance == "sqeuclidean":
        diff = p - c
        return _row_dot(diff, diff)
    if distance == "cosine":
        ps = _row_dot(points, points)[:, None]
        cs = _row_dot(centroids, centroids)[None, :]
        degenerate = (ps < ZERO_NORM ** 2) | (cs < ZERO_NORM ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = 1.0 - _row_dot(p, c) / np.sqrt(ps * cs)
        d = np.clip(d, 0.0, 2.0)
        d[np.broadcast_to(degenerate, d.shape)] = 1.0
        return d
    raise ValueError(f"unknown distance {distance!r}")


def _check_features(features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError(f"features must be an (n, d) matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    return x


def init_centroids(features, cfg: KMeansConfig) -> np.ndarray:
    """Pick ``cfg.k`` initial centroids from the data with k-means++.

    The first centroid is uniform over the points; each next one is drawn
    with probability proportional to the configured distance to the nearest
    centroid chosen so far. If every remaining point coincides with a chosen
    centroid the draw falls back to a uniform pick among unchosen points, so
    the k centroids always come from k distinct points.
    """
    x = _check_features(features)
    n = x.shape[0]
    if n < cfg.k:
        raise ValueError("fewer points than clusters")
    rng = np.random.default_rng(cfg.seed)
    chosen = [int(rng.integers(n))]
    nearest = pairwise_distances(x, x[chosen[0]][None, :], cfg.distance)[:, 0]
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    while len(chosen) < cfg.k:
        weights = np.where(taken, 0.0, nearest)
        total = float(weights.sum())
        if total > 0.0:
            cum = np.cumsum(weights)
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            idx = min(idx, n - 1)
            while weights[idx] == 0.0:
                # landing exactly on a cumulative boundary of a zero-weight run
                idx -= 1
        else:
            free = np.flatnonzero(~taken)
            idx = int(free[rng.integers(free.size)])
        chosen.append(idx)
        taken[idx] = True
        d = pairwise_distances(x, x[idx][None, :], cfg.distance)[:, 0]
        nearest = np.minimum(nearest, d)
    return x[chosen].copy()


def _nearest(x: np.ndarray, centroids: np.ndarray, distance: str):
    d = pairwise_distances(x, centroids, distance)
    labels = np.argmin(d, axis=1)
    return labels, d[np.arange(x.shape[0]), labels]


def assign(features, centroids, distance: str = "cosine", threads: int = 1) -> Assignment:
    """Label every point with its closest centroid (lowest index on ties)."""
    x = _check_features(features)
    c = np.asarray(centroids, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] != x.shape[1]:
        raise ValueError(f"centroid dimension {c.shape} does not match features {x.shape}")
    n = x.shape[0]
    if threads > 1 and n > _CHUNK:
        bounds = list(range(0, n, _CHUNK)) + [n]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda i: _nearest(x[bounds[i]:bounds[i + 1]], c, distance),
                                  range(len(bounds) - 1)))
        labels = np.concatenate([p[0] for p in parts])
        dmin = np.concatenate([p[1] for p in parts])
    else:
        labels, dmin = _nearest(x, c, distance)
    return Assignment(labels=labels.astype(np.int64), objective=float(np.sum(dmin)))


def update(features, assignment: Assignment, k: int, distance: str = "cosine") -> np.ndarray:
    """Recompute centroids from an assignment.

    Squared Euclidean uses the member mean. Cosine uses the mean of the
    members scaled to unit length, skipping zero-norm members. A cluster left
    without members is reseeded at the point lying farthest from its own
    (new) centroid.
    """
    x = _check_features(features)
    labels = np.asarray(assignment.labels)
    if labels.shape != (x.shape[0],) or (labels.size and (labels.min() < 0 or labels.max() >= k)):
        raise ValueError("assignment labels must be in [0, k) with one label per point")
    d = x.shape[1]
    if distance == "cosine":
        norms = np.sqrt(_row_dot(x, x))
        usable = norms >= ZERO_NORM
        vecs = np.zeros_like(x)
        vecs[usable] = x[usable] / norms[usable, None]
        weights = usable.astype(np.float64)
    elif distance == "sqeuclidean":
        vecs = x
        weights = np.ones(x.shape[0])
    else:
        raise ValueError(f"unknown distance {distance!r}")

    # bincount accumulates sequentially in point order
    counts = np.bincount(labels, minlength=k)
    denom = np.bincount(labels, weights=weights, minlength=k)
    centroids = np.zeros((k, d))
    for j in range(d):
        sums = np.bincount(labels, weights=vecs[:, j], minlength=k)
        np.divide(sums, denom, out=centroids[:, j], where=denom > 0)

    empty = np.flatnonzero(counts == 0)
    if empty.size:
        own = pairwise_distances(x, centroids, distance)[np.arange(x.shape[0]), labels]
        for j in empty:
            far = int(np.argmax(own))
            centroids[j] = x[far]
            own[far] = -np.inf
    return centroids


def _labelled_objective(x, centroids, labels, distance):
    own = pairwise_distances(x, centroids, distance)[np.arange(x.shape[0]), labels]
    return float(np.sum(own))


def kmeans_run(features, cfg: KMeansConfig) -> KMeansResult:
    """Run K-means until the largest centroid move is ``<= cfg.tol``.

    An update that would raise the objective of the current labels is
    discarded and the run stops, so ``history`` followed by the final
    objective never increases, even under floating point rounding.

    Returns the assignment for the final centroids, the centroids, the number
    of assign/update cycles performed and the objective history.
    """
    x = _check_features(features)
    centroids = init_centroids(x, cfg)
    history = []
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        current = assign(x, centroids, cfg.distance, cfg.threads)
        history.append(current.objective)
        new = update(x, current, cfg.k, cfg.distance)
        if _labelled_objective(x, new, current.labels, cfg.distance) > current.objective:
            # Only rounding can make a centroid update worse for its own
            # members (e.g. renormalising a unit vector); treat it as converged.
            break
        shift = float(np.max(np.sqrt(_row_dot(new - centroids, new - centroids))))
        centroids = new
        if shift <= cfg.tol:
            break
    final = assign(x, centroids, cfg.distance, cfg.threads)
    return KMeansResult(assignment=final, centroids=centroids, iterations=iterations, history=history)
