"""Decision-label synthesis: seeded k-means with elbow-based k selection.

Lloyd's algorithm is restarted ``nstart`` times from k distinct data rows
chosen uniformly at random; per-restart generators derive deterministically
from (seed, restart index), so restarts are order-independent and the whole
run is reproducible. The elbow rule picks the k with the largest second
difference of the SSE curve.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidK, MissingLabel
from .model import DecisionSystem, InformationSystem, NormalizedMatrix

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ClusterConfig:
    k: int | None = None  # None selects k with the elbow rule
    k_max: int | None = None  # defaults to min(10, n - 1)
    nstart: int = 25
    seed: int = 0
    max_iterations: int = 100
    tolerance: float = 1e-9


@dataclass(frozen=True)
class ClusterAssignment:
    labels: Mapping[str, int]  # provider id -> label in 1..k
    centroids: np.ndarray
    sse: float


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator,
           max_iterations: int, tolerance: float):
    n = x.shape[0]
    centroids = x[rng.choice(n, size=k, replace=False)].copy()
    assign = np.full(n, -1)
    for _ in range(max_iterations):
        d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        for c in range(k):
            if (new_assign == c).any():
                continue
            # repair: hand the empty cluster the point farthest from its centroid
            counts = np.bincount(new_assign, minlength=k)
            movable = np.where(counts[new_assign] > 1)[0]
            own = d2[movable, new_assign[movable]]
            new_assign[movable[own.argmax()]] = c
        if (new_assign == assign).all():
            break
        assign = new_assign
        moved = 0.0
        for c in range(k):
            updated = x[assign == c].mean(axis=0)
            moved = max(moved, float(((updated - centroids[c]) ** 2).sum()))
            centroids[c] = updated
        if moved <= tolerance:
            break
    centroids = np.vstack([x[assign == c].mean(axis=0) for c in range(k)])
    sse = float(((x - centroids[assign]) ** 2).sum())
    return assign, centroids, sse


def kmeans(matrix: NormalizedMatrix, config: ClusterConfig) -> ClusterAssignment:
    """Best-of-nstart Lloyd clustering; deterministic for a fixed seed."""
    x = np.asarray(matrix.values, dtype=float)
    n = x.shape[0]
    k = config.k if config.k is not None else elbow_optimal_k(matrix, config)
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside [1, {n}]")
    root = np.random.SeedSequence(config.seed & _SEED_MASK)
    best = None
    for child in root.spawn(max(1, config.nstart)):
        rng = np.random.default_rng(child)
        assign, centroids, sse = _lloyd(
            x, k, rng, config.max_iterations, config.tolerance
        )
        if best is None or sse < best[2]:
            best = (assign, centroids, sse)
    assign, centroids, sse = best
    labels = {pid: int(assign[i]) + 1 for i, pid in enumerate(matrix.provider_ids)}
    return ClusterAssignment(labels=labels, centroids=centroids, sse=sse)


def sse_curve(matrix: NormalizedMatrix, config: ClusterConfig,
              k_max: int) -> dict[int, float]:
    """Best-of-nstart SSE for k = 1..k_max on the same seed schedule."""
    return {
        k: kmeans(matrix, dataclasses.replace(config, k=k)).sse
        for k in range(1, k_max + 1)
    }


def elbow_optimal_k(matrix: NormalizedMatrix, config: ClusterConfig) -> int:
    """Sharpest knee of the SSE curve: argmax of the second difference.

    Candidates are k in 2..k_max-1; ties break toward smaller k.
    """
    n = matrix.values.shape[0]
    k_max = config.k_max if config.k_max is not None else min(10, n - 1)
    if k_max < 3 or k_max > n:
        raise InvalidK(f"k_max={k_max} outside [3, {n}]")
    sse = sse_curve(matrix, config, k_max)
    best_k, best_knee = None, -np.inf
    for k in range(2, k_max):
        knee = sse[k - 1] - 2.0 * sse[k] + sse[k + 1]
        if knee > best_knee:
            best_k, best_knee = k, knee
    return best_k


def attach_decision(is_: InformationSystem, assignment: ClusterAssignment) -> DecisionSystem:
    """Attach cluster labels as the crisp decision attribute."""
    missing = [pid for pid in is_.provider_ids if pid not in assignment.labels]
    if missing:
        raise MissingLabel(f"no label for provider(s): {', '.join(missing)}")
    labels = {pid: int(assignment.labels[pid]) for pid in is_.provider_ids}
    return DecisionSystem(base=is_, labels=labels)
