"""Deterministic, seedable k-means and DBSCAN over Euclidean distance.

Both engines are pure functions of (points, params). A fixed seed makes
k-means bit-identical across calls; DBSCAN is fully determined by input
order. Euclidean distance is used throughout this module; cosine geometry
belongs to the classifier.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque
from typing import Callable, Optional

import numpy as np

#: Label assigned to points no cluster reaches.
NOISE = -1

IterationHook = Callable[[int, int, float], None]


@dataclass(frozen=True)
class KMeansParams:
    k: int
    seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")


@dataclass(frozen=True)
class DbscanParams:
    eps: float
    min_members: int

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.min_members < 1:
            raise ValueError("min_members must be >= 1")


@dataclass
class ClusterAssignment:
    """Per-point cluster ids; NOISE marks unclustered points (DBSCAN only)."""

    labels: np.ndarray
    n_clusters: int
    centroids: Optional[np.ndarray] = None
    inertia: Optional[float] = None

    @classmethod
    def from_labels(cls, labels) -> "ClusterAssignment":
        arr = np.asarray(labels, dtype=np.int64)
        ids = np.unique(arr[arr != NOISE])
        return cls(labels=arr, n_clusters=int(ids.size))


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("points must be non-empty")
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array of shape (n, d)")
    return pts


def _pairwise_sq_dist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def inertia(points, labels, centroids) -> float:
    """Sum of squared Euclidean distances from each point to its assigned centroid."""
    pts = _check_points(points)
    lab = np.asarray(labels, dtype=np.int64)
    cents = np.asarray(centroids, dtype=np.float64)
    if lab.shape[0] != pts.shape[0]:
        raise ValueError("labels and points disagree in length")
    if lab.min(initial=0) < 0 or lab.max(initial=-1) >= cents.shape[0]:
        raise ValueError("cluster id out of centroid range")
    diff = pts - cents[lab]
    return float(np.einsum("ij,ij->", diff, diff))


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Spread-out seeding: next centroid drawn with probability proportional
    to squared distance from the nearest centroid chosen so far."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    closest_sq = np.einsum("ij,ij->i", points - centers[0], points - centers[0])
    for j in range(1, k):
        total = closest_sq.sum()
        if total > 0:
            idx = rng.choice(n, p=closest_sq / total)
        else:
            # all remaining mass is on duplicate points
            idx = rng.integers(n)
        centers[j] = points[idx]
        diff = points - centers[j]
        closest_sq = np.minimum(closest_sq, np.einsum("ij,ij->i", diff, diff))
    return centers


def _update_centroids(points: np.ndarray, labels: np.ndarray, old: np.ndarray, k: int) -> np.ndarray:
    new = np.empty_like(old)
    empty = []
    for j in range(k):
        mask = labels == j
        if mask.any():
            new[j] = points[mask].mean(axis=0)
        else:
            empty.append(j)
    if empty:
        # reseed each empty centroid at the point currently farthest from
        # its own centroid, so the engine always reports k clusters
        dist_own = np.linalg.norm(points - old[labels], axis=1)
        for j in empty:
            idx = int(np.argmax(dist_own))
            new[j] = points[idx]
            dist_own[idx] = -np.inf
    return new


def kmeans(points, params: KMeansParams, on_iter: Optional[IterationHook] = None) -> ClusterAssignment:
    """Lloyd iteration with spread-out seeding, best of ``params.restarts`` runs.

    Each restart iterates assign/update until the largest centroid shift is
    within ``tol`` or ``max_iter`` is reached; the restart with minimal
    inertia wins. Assignment ties go to the lowest centroid index.
    ``on_iter(restart, iteration, inertia)``, when given, is called after
    every assignment step.
    """
    pts = _check_points(points)
    n = pts.shape[0]
    if params.k > n:
        raise ValueError(f"k={params.k} exceeds the number of points ({n})")

    rng = np.random.default_rng(params.seed)
    best: Optional[ClusterAssignment] = None

    for restart in range(params.restarts):
        centers = _kmeans_pp_init(pts, params.k, rng)
        for iteration in range(params.max_iter):
            labels = np.argmin(_pairwise_sq_dist(pts, centers), axis=1)
            if on_iter is not None:
                on_iter(restart, iteration, inertia(pts, labels, centers))
            new_centers = _update_centroids(pts, labels, centers, params.k)
            shift = float(np.linalg.norm(new_centers - centers, axis=1).max())
            centers = new_centers
            if shift <= params.tol:
                break
        labels = np.argmin(_pairwise_sq_dist(pts, centers), axis=1)
        run_inertia = inertia(pts, labels, centers)
        if best is None or run_inertia < best.inertia:
            ids = np.unique(labels)
            best = ClusterAssignment(
                labels=labels.astype(np.int64),
                n_clusters=int(ids.size),
                centroids=centers,
                inertia=run_inertia,
            )
    assert best is not None
    return best


def dbscan(points, params: DbscanParams) -> ClusterAssignment:
    """Density expansion over the closed epsilon-ball (a point counts itself).

    Clusters grow from core points in input order; border points join the
    first cluster that reaches them; unreached points stay NOISE.
    """
    pts = _check_points(points)
    n = pts.shape[0]
    sq = _pairwise_sq_dist(pts, pts)
    eps_sq = params.eps * params.eps
    neighbors = [np.flatnonzero(sq[i] <= eps_sq) for i in range(n)]
    core = np.array([len(nb) >= params.min_members for nb in neighbors])

    labels = np.full(n, NOISE, dtype=np.int64)
    cluster_id = 0
    for i in range(n):
        if not core[i] or labels[i] != NOISE:
            continue
        labels[i] = cluster_id
        queue = deque([i])
        while queue:
            j = queue.popleft()
            if not core[j]:
                continue
            for nb in neighbors[j]:
                if labels[nb] == NOISE:
                    labels[nb] = cluster_id
                    queue.append(nb)
        cluster_id += 1

    return ClusterAssignment(labels=labels, n_clusters=cluster_id)
