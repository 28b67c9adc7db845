"""Federated eigenvector protocols over vertically partitioned data.

Each client holds a feature block of the same n samples and runs local power
iteration on its own n x n matrix (scaled Gram in PCA mode, kernel matrix in
AKPCA mode). Clients' (eigenvector, eigenvalue) estimates are combined into a
federated vector by eigenvalue-proportional weighting, optionally with the
weight-scaling boost, under either a central server or a neighbor graph.

The merge output is the raw weighted sum, exactly as printed in the source
protocol; a normalized, sign-canonical copy is derived separately wherever a
unit vector is needed (warm starts, the local data update, metrics). Sign
alignment before every merge is mandatory: eigenvectors are sign-ambiguous
and unaligned sums can cancel.

Rounds are barrier-synchronized and all randomness flows from one seeded
generator in client order, so a run is a pure function of (clients, config).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, center_kernel, kernel_matrix, resolve_gamma
from .linalg import (
    EIG_ITERS,
    EIG_TOL,
    EigenPair,
    ZeroImageError,
    as_matrix,
    canonical_unit,
    gram_matrix,
    power_iteration,
    rayleigh_quotient,
    top_k_eigen_oracle,
)
from .metrics import RunTrace, record_round
from .topology import TopologyGraph, neighbors, round_message_count

log = logging.getLogger("vfedpca.federation")

PCA = "pca"
AKPCA = "akpca"
MODES = (PCA, AKPCA)

PLAIN = "plain"
SCALED = "scaled"
MERGE_MODES = (PLAIN, SCALED)


@dataclass
class ClientState:
    """One simulated participant: its feature block, the local n x n matrix
    derived from it, and the current local eigenpair (None before round 0)."""

    id: int
    block: np.ndarray
    local_matrix: np.ndarray
    eigen: EigenPair | None = None


@dataclass(frozen=True)
class FederationConfig:
    rounds: int = 10
    local_iters: int = 10
    tol: float = 1e-9
    merge_mode: str = PLAIN
    warm_start: bool = False
    mode: str = PCA
    kernel: KernelSpec | None = None
    center_kernel: bool = False
    update_local_data: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.local_iters < 1:
            raise ValueError("local_iters must be >= 1")
        if self.tol < 0.0:
            raise ValueError("tol must be >= 0")
        if self.merge_mode not in MERGE_MODES:
            raise ValueError(f"unknown merge_mode: {self.merge_mode!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.mode == AKPCA and self.kernel is None:
            object.__setattr__(self, "kernel", KernelSpec(kind="rbf"))


def _local_matrix(block: np.ndarray, mode: str, kernel: KernelSpec | None, center: bool) -> np.ndarray:
    if mode == PCA:
        return gram_matrix(block, 1.0 / block.shape[1])
    K = kernel_matrix(kernel if kernel is not None else KernelSpec(kind="rbf"), block)
    return center_kernel(K) if center else K


def make_clients(
    blocks,
    mode: str = PCA,
    kernel: KernelSpec | None = None,
    center: bool = False,
) -> list[ClientState]:
    """Build client states from a list of feature blocks sharing a sample count.

    PCA mode stores the scaled Gram (1/f_i) X_i X_i^T; AKPCA mode stores the
    kernel matrix over the block's rows (a None gamma is resolved per block).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    if not blocks:
        raise ValueError("no clients")
    mats = [as_matrix(b, name="block") for b in blocks]
    n = mats[0].shape[0]
    if any(b.shape[0] != n for b in mats):
        raise ValueError("sample count mismatch")
    return [
        ClientState(id=i, block=b, local_matrix=_local_matrix(b, mode, kernel, center))
        for i, b in enumerate(mats)
    ]


def local_round(client: ClientState, init, L: int, tol: float) -> EigenPair:
    """Run the client's local power iteration from ``init`` and store the
    resulting eigenpair on the client."""
    pair, _ = power_iteration(client.local_matrix, init, L, tol)
    client.eigen = pair
    return pair


def compute_weights(alphas) -> np.ndarray:
    """Eigenvalue-proportional weights w_i = alpha_i / sum(alpha); they sum
    to 1 within 1e-12 and require a strictly positive, nonnegative total."""
    a = np.asarray(alphas, dtype=float)
    if a.size == 0:
        raise ValueError("no clients")
    total = float(a.sum())
    if total <= 0.0 or np.any(a < 0.0):
        raise ValueError("degenerate weights")
    return a / total


def sign_align(vectors, reference) -> list[np.ndarray]:
    """Flip each vector whose dot product with ``reference`` is negative;
    exact zeros are left untouched."""
    ref = np.asarray(reference, dtype=float)
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=float)
        out.append(-v if float(v @ ref) < 0.0 else v)
    return out


def merge(vectors, weights) -> np.ndarray:
    """Raw weighted sum of the clients' (sign-aligned) vectors. Deliberately
    not renormalized; callers derive a unit copy where one is needed."""
    if len(vectors) == 0:
        raise ValueError("no clients")
    if len(vectors) != len(weights):
        raise ValueError("length mismatch")
    u = np.zeros(np.asarray(vectors[0], dtype=float).shape[0])
    for w, v in zip(weights, vectors):
        u = u + float(w) * np.asarray(v, dtype=float)
    return u


def weight_scaled_coefficients(alphas) -> np.ndarray:
    """Per-client merge coefficients of the weight-scaling rule.

    Clients are ranked by eigenvalue (descending, ties by lower id); the top
    ceil(p/2) get (1 + eta) * w_i and the rest (1 - eta) * w_i, where
    eta = mean(w) = 1/p because the weights are normalized. With p = 1 the
    single coefficient degenerates to 2.
    """
    a = np.asarray(alphas, dtype=float)
    w = compute_weights(a)
    p = a.size
    eta = 1.0 / p
    order = sorted(range(p), key=lambda i: (-a[i], i))
    boosted = set(order[: math.ceil(p / 2)])
    factors = np.array([(1.0 + eta) if i in boosted else (1.0 - eta) for i in range(p)])
    return factors * w


def weight_scaled_merge(vectors, alphas) -> np.ndarray:
    """Weight-scaled variant of ``merge``: boosts the larger-eigenvalue half
    of the clients and damps the rest."""
    if len(vectors) == 0:
        raise ValueError("no clients")
    if len(vectors) != len(alphas):
        raise ValueError("length mismatch")
    return merge(vectors, weight_scaled_coefficients(alphas))


def local_update(X_i, u, eps: float = 1e-12) -> np.ndarray:
    """Project a client's raw features along the broadcast direction:
    M = X^T u, then X <- X (M M^T) / ||M M^T||_F, which equals X M M^T / ||M||^2.

    Skipped (block returned unchanged) when ||M||^2 <= eps, covering the
    degenerate case where u is orthogonal to every column.
    """
    X = as_matrix(X_i, name="X_i")
    u = np.asarray(u, dtype=float)
    if u.shape[0] != X.shape[0]:
        raise ValueError("dimension mismatch")
    M = X.T @ u
    m2 = float(M @ M)
    if m2 <= eps:
        return X
    return X @ (np.outer(M, M) / m2)


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    norm = float(np.linalg.norm(v))
    while norm == 0.0:  # essentially impossible; keeps the contract total
        v = rng.standard_normal(n)
        norm = float(np.linalg.norm(v))
    return v / norm


def random_unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    """Seeded unit vector used for round-0 (and non-warm) initializations.
    Exposed so callers can reproduce a run's initialization stream."""
    return _random_unit(rng, n)


def _reference_matrix(blocks: list[np.ndarray], config: FederationConfig) -> np.ndarray:
    # Centralized counterpart of the clients' local matrices, on the unsplit data.
    X = np.hstack(blocks)
    if config.mode == PCA:
        return gram_matrix(X, 1.0 / X.shape[1])
    spec = resolve_gamma(config.kernel, X)
    K = kernel_matrix(spec, X)
    return center_kernel(K) if config.center_kernel else K


def _client_round(client: ClientState, init, config: FederationConfig, rng, t: int) -> EigenPair:
    try:
        try:
            return local_round(client, init, config.local_iters, config.tol)
        except ZeroImageError:
            retry = _random_unit(rng, client.block.shape[0])
            return local_round(client, retry, config.local_iters, config.tol)
    except Exception as exc:
        raise RuntimeError(f"round {t} client {client.id}: {exc}") from exc


def _merge_round(vectors, alphas, reference, merge_mode: str) -> tuple[np.ndarray, np.ndarray]:
    aligned = sign_align(vectors, reference)
    weights = compute_weights(alphas)
    if merge_mode == SCALED:
        u = weight_scaled_merge(aligned, alphas)
    else:
        u = merge(aligned, weights)
    return u, weights


def run_server_client(clients: list[ClientState], config: FederationConfig) -> RunTrace:
    """Multi-round protocol with a central coordinator.

    Per round: every client runs its local power iteration (round 0 from a
    seeded random unit vector; later rounds warm-start from the previous
    federated vector when enabled, else draw fresh); the server sign-aligns
    the results to the previous normalized federated vector (round 0: to
    client 0's vector), merges, and broadcasts; clients then optionally apply
    the local data update and rebuild their local matrices. The trace records
    the distance to the centralized eigenvector of the original unsplit data
    and the exact scalar traffic p*(n+1) up plus p*n down per round.

    Clients are mutated in place (eigen state, and blocks when the data
    update is enabled).
    """
    if not clients:
        raise ValueError("no clients")
    p = len(clients)
    n = clients[0].block.shape[0]
    ref_matrix = _reference_matrix([c.block for c in clients], config)
    U_G = top_k_eigen_oracle(ref_matrix, 1, EIG_ITERS, EIG_TOL)[0].vector
    rng = np.random.default_rng(config.seed)
    trace = RunTrace(rounds=config.rounds)
    scalars = p * (n + 1) + p * n
    prev_u: np.ndarray | None = None
    u = None
    for t in range(config.rounds):
        tick = time.perf_counter()
        for c in clients:
            if prev_u is not None and config.warm_start:
                init = prev_u
            else:
                init = _random_unit(rng, n)
            _client_round(c, init, config, rng, t)
        vectors = [c.eigen.vector for c in clients]
        alphas = [c.eigen.value for c in clients]
        try:
            reference = prev_u if prev_u is not None else vectors[0]
            u, weights = _merge_round(vectors, alphas, reference, config.merge_mode)
            prev_u = canonical_unit(u)
        except ValueError as exc:
            raise RuntimeError(f"round {t}: {exc}") from exc
        if config.update_local_data:
            for c in clients:
                c.block = local_update(c.block, prev_u)
                c.local_matrix = _local_matrix(c.block, config.mode, config.kernel, config.center_kernel)
        elapsed = time.perf_counter() - tick
        record_round(trace, u, weights, U_G, scalars, elapsed)
        log.debug("server round %d: dist=%.3e", t, trace.records[-1].distance_error)
    trace.final = EigenPair(vector=prev_u, value=rayleigh_quotient(ref_matrix, prev_u))
    return trace


def run_decentralized(clients: list[ClientState], graph: TopologyGraph, config: FederationConfig) -> RunTrace:
    """Serverless protocol: each client merges only over itself and its
    direct neighbors, sign-aligning to its own current vector.

    An isolated client simply keeps federating with itself. The recorded
    distance error is the mean over clients of the distance between each
    client's normalized federated vector and the centralized eigenvector;
    per-round per-client vectors are kept on the trace records. The round
    traffic is sum_i deg(i) * (n + 1) scalars.
    """
    if not clients:
        raise ValueError("no clients")
    p = len(clients)
    if graph.p != p:
        raise ValueError("graph size mismatch")
    n = clients[0].block.shape[0]
    ref_matrix = _reference_matrix([c.block for c in clients], config)
    U_G = top_k_eigen_oracle(ref_matrix, 1, EIG_ITERS, EIG_TOL)[0].vector
    rng = np.random.default_rng(config.seed)
    trace = RunTrace(rounds=config.rounds)
    scalars = round_message_count(graph, n)
    merge_sets = [sorted([i] + neighbors(graph, i)) for i in range(p)]
    prev_u: list[np.ndarray | None] = [None] * p
    for t in range(config.rounds):
        tick = time.perf_counter()
        for c in clients:
            if prev_u[c.id] is not None and config.warm_start:
                init = prev_u[c.id]
            else:
                init = _random_unit(rng, n)
            _client_round(c, init, config, rng, t)
        for i, c in enumerate(clients):
            ids = merge_sets[i]
            vectors = [clients[j].eigen.vector for j in ids]
            alphas = [clients[j].eigen.value for j in ids]
            try:
                u_i, _ = _merge_round(vectors, alphas, c.eigen.vector, config.merge_mode)
                prev_u[i] = canonical_unit(u_i)
            except ValueError as exc:
                raise RuntimeError(f"round {t} client {i}: {exc}") from exc
        if config.update_local_data:
            for c in clients:
                c.block = local_update(c.block, prev_u[c.id])
                c.local_matrix = _local_matrix(c.block, config.mode, config.kernel, config.center_kernel)
        elapsed = time.perf_counter() - tick
        weights = compute_weights([c.eigen.value for c in clients])
        consensus = np.mean(np.stack(prev_u), axis=0)
        record_round(trace, consensus, weights, U_G, scalars, elapsed, client_vectors=np.stack(prev_u))
        log.debug("decentralized round %d: dist=%.3e", t, trace.records[-1].distance_error)
    final_vec = canonical_unit(np.mean(np.stack(prev_u), axis=0))
    trace.final = EigenPair(vector=final_vec, value=rayleigh_quotient(ref_matrix, final_vec))
    return trace
