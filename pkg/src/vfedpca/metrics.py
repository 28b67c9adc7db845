"""Convergence and quality metrics: sign-aligned distance to the centralized
eigenvector, per-round trace records, and a seeded Lloyd k-means evaluator
for the downstream clustering studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import EigenPair, as_matrix, unit


def distance_error(U_ref, u) -> float:
    """Euclidean distance between a unit reference vector and the normalized
    input, minimized over the input's sign. Range [0, sqrt(2)].

    Eigenvector sign is arbitrary, so without the sign minimum the metric
    would jump discontinuously under sign flips.
    """
    U_ref = np.asarray(U_ref, dtype=float)
    if abs(float(np.linalg.norm(U_ref)) - 1.0) > 1e-6:
        raise ValueError("not normalized")
    un = unit(u)
    d = abs(float(np.clip(U_ref @ un, -1.0, 1.0)))
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * d)))


@dataclass
class RoundRecord:
    round: int
    federated_vector: np.ndarray
    weights: np.ndarray
    distance_error: float
    scalars_sent: int
    elapsed: float
    # Per-client normalized vectors; populated by the decentralized protocol only.
    client_vectors: np.ndarray | None = None


@dataclass
class RunTrace:
    """Fixed-capacity per-round log of a federated run."""

    rounds: int
    records: list[RoundRecord] = field(default_factory=list)
    final: EigenPair | None = None

    def distance_series(self) -> list[float]:
        return [r.distance_error for r in self.records]


def record_round(
    trace: RunTrace,
    u,
    weights,
    U_ref,
    scalars_sent: int,
    elapsed: float,
    client_vectors=None,
) -> RunTrace:
    """Append one round record. The distance error is computed here: against
    ``u`` directly, or as the mean over ``client_vectors`` when the caller is
    a decentralized run."""
    if len(trace.records) >= trace.rounds:
        raise ValueError("trace full")
    if client_vectors is not None:
        dist = float(np.mean([distance_error(U_ref, v) for v in client_vectors]))
        client_vectors = np.asarray(client_vectors, dtype=float)
    else:
        dist = distance_error(U_ref, u)
    trace.records.append(
        RoundRecord(
            round=len(trace.records),
            federated_vector=np.asarray(u, dtype=float),
            weights=np.asarray(weights, dtype=float),
            distance_error=dist,
            scalars_sent=int(scalars_sent),
            elapsed=float(elapsed),
            client_vectors=client_vectors,
        )
    )
    return trace


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    inertia_history: list[float]


def kmeans(Z, k: int, seed: int, max_iters: int = 100) -> KMeansResult:
    """Lloyd's algorithm with seeded initialization.

    Centroids start at k distinct rows sampled uniformly with the given seed.
    Assignment ties go to the lowest centroid id. An empty cluster is
    re-seeded to the point currently farthest from its assigned centroid.
    Stops when labels stop changing or after ``max_iters`` passes.
    """
    Z = as_matrix(Z, name="Z")
    n = Z.shape[0]
    if k < 1 or k > n:
        raise ValueError("k must be in [1, n]")
    rng = np.random.default_rng(seed)
    centroids = Z[rng.choice(n, size=k, replace=False)].copy()
    labels = np.full(n, -1, dtype=int)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        d2 = np.sum((Z[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), new_labels]
        for j in range(k):
            members = new_labels == j
            if np.any(members):
                centroids[j] = Z[members].mean(axis=0)
            else:
                far = int(np.argmax(point_d2))
                centroids[j] = Z[far]
                point_d2[far] = -1.0  # keep later empty clusters from reusing it
        d2_after = np.sum((Z - centroids[new_labels]) ** 2, axis=1)
        history.append(float(np.sum(d2_after)))
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    return KMeansResult(
        labels=labels,
        centroids=centroids,
        inertia=history[-1],
        iterations=iterations,
        inertia_history=history,
    )
