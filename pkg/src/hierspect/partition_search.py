"""Projection error of partitions against candidate eigenvectors, and its
minimization through the k-means duality.

The squared projection error of a partition ``H`` against a vector block
``V`` is ``||(I - H H^+) V||_F^2``: the squared residual of ``V`` after
removing group-wise means.  It is zero exactly when every column of ``V``
is constant within each group.  Minimizing it over partitions with ``k``
groups is the same problem as k-means on the rows of ``V``, which is how
``best_eep_partition`` searches for approximately equitable partitions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Partition
from .rng import substream

__all__ = ["projection_error", "kmeans", "best_eep_partition", "KMeansResult"]

DEFAULT_RESTARTS = 10
MAX_ITER = 300


def projection_error(partition: Partition, vectors: np.ndarray) -> float:
    """Squared Frobenius norm of ``vectors`` after removing group means."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[0] != partition.n:
        raise ValueError(
            f"vector block has {vectors.shape[0]} rows, partition covers {partition.n}"
        )
    means = partition.group_means(vectors)
    residual = vectors - means[partition.assignment]
    return float(np.sum(residual * residual))


@dataclass(frozen=True)
class KMeansResult:
    partition: Partition
    objective: float


def _relabel_first_occurrence(labels: np.ndarray) -> np.ndarray:
    """Canonicalize labels so the first point is group 0, next new group 1, ..."""
    uniq, first = np.unique(labels, return_index=True)
    mapping = np.empty(uniq.size, dtype=np.int64)
    mapping[np.argsort(first)] = np.arange(uniq.size)
    dense = np.searchsorted(uniq, labels)
    return mapping[dense]


def _pairwise_sq_dist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(points * points, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers * centers, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _init_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy distance-weighted (k-means++ style) center seeding.

    Each step samples a few distance-weighted candidates and keeps the one
    that reduces the seeding potential most; this matters when k is large
    relative to the number of distinct point locations.
    """
    m = points.shape[0]
    trials = 2 + int(np.log(k)) if k > 1 else 1
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(m)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            candidates = rng.integers(m, size=1)
        else:
            candidates = rng.choice(m, size=trials, p=d2 / total)
        cand_d2 = np.minimum(
            d2[:, None], _pairwise_sq_dist(points, points[candidates])
        )
        best = int(np.argmin(cand_d2.sum(axis=0)))
        centers[j] = points[candidates[best]]
        d2 = cand_d2[:, best]
    return centers


def _wcss(points: np.ndarray, labels: np.ndarray, k: int) -> float:
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    means = sums / counts[:, None]
    residual = points - means[labels]
    return float(np.sum(residual * residual))


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    centers = _init_plus_plus(points, k, rng)
    labels = np.full(m, -1, dtype=np.int64)
    for _ in range(MAX_ITER):
        d2 = _pairwise_sq_dist(points, centers)
        new_labels = np.argmin(d2, axis=1)
        counts = np.bincount(new_labels, minlength=k)
        # Empty-cluster repair: hand each empty cluster the point farthest
        # from its current center, taken from a cluster with spare members.
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            assigned_d2 = d2[np.arange(m), new_labels].copy()
            for j in empties:
                candidates = np.flatnonzero(counts[new_labels] > 1)
                idx = candidates[np.argmax(assigned_d2[candidates])]
                counts[new_labels[idx]] -= 1
                new_labels[idx] = j
                counts[j] = 1
                assigned_d2[idx] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sums = np.zeros((k, points.shape[1]))
        np.add.at(sums, labels, points)
        centers = sums / np.bincount(labels, minlength=k)[:, None]
    return labels


def kmeans(
    points: np.ndarray,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> KMeansResult:
    """Best-of-``restarts`` Lloyd's algorithm with k-means++ seeding.

    Deterministic for a fixed seed: each restart draws from its own
    substream, and equal-objective ties break toward the lexicographically
    smallest (first-occurrence-relabeled) assignment.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    m = points.shape[0]
    if not 1 <= k <= m:
        raise ValueError(f"k={k} must be between 1 and the number of points {m}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best_labels = None
    best_obj = np.inf
    best_key = None
    for ridx in range(restarts):
        labels = _lloyd(points, k, substream(seed, "kmeans", ridx))
        labels = _relabel_first_occurrence(labels)
        obj = _wcss(points, labels, k)
        key = tuple(labels.tolist())
        if obj < best_obj or (obj == best_obj and key < best_key):
            best_labels, best_obj, best_key = labels, obj, key
    return KMeansResult(partition=Partition.from_labels(best_labels), objective=best_obj)


def best_eep_partition(
    vectors: np.ndarray,
    k: int,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> Partition:
    """Partition minimizing the projection error against ``vectors``.

    By the k-means duality, clustering the rows of the vector block into
    ``k`` groups minimizes exactly the squared projection error, so the
    returned partition is the best of the sampled k-means solutions.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    n = vectors.shape[0]
    if not 2 <= k <= n - 1:
        raise ValueError(f"k={k} must be between 2 and n-1={n - 1}")
    return kmeans(vectors, k, restarts=restarts, seed=seed).partition
