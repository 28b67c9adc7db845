"""Kernel functions, kernel-matrix construction, and the feature-space PCA
transforms built on them.

Two transforms are provided. ``akpca`` extracts the leading directions of the
kernel matrix and projects the raw input rows onto them (output k x m);
``kpca_transform`` produces classical kernel-PCA sample scores (output n x k)
and is kept as the comparison baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    EIG_ITERS,
    EIG_TOL,
    EigenPair,
    as_matrix,
    gram_matrix,
    rayleigh_quotient,
    top_k_eigen_oracle,
)

LINEAR = "linear"
RBF = "rbf"
SIGMOID = "sigmoid"
KERNEL_KINDS = (LINEAR, RBF, SIGMOID)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selection. ``gamma`` is required for rbf and sigmoid; ``None``
    means "resolve from data with the median heuristic". ``c`` is the sigmoid
    offset and is ignored by the other kinds.

    Note the sigmoid kernel is tanh(-gamma * <x, y> + c), with a leading
    minus sign on gamma; it is not positive definite.
    """

    kind: str = LINEAR
    gamma: float | None = None
    c: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind: {self.kind!r}")
        if self.kind in (RBF, SIGMOID) and self.gamma is not None and self.gamma <= 0.0:
            raise ValueError("gamma must be positive")


def median_heuristic_gamma(X, sample_rows: int = 100) -> float:
    """Default bandwidth: 1 / (2 * median^2) over pairwise distances of a
    leading sample of rows. Falls back to 1.0 when all sampled rows coincide.
    """
    X = as_matrix(X, name="X")
    S = X[: min(sample_rows, X.shape[0])]
    sq = np.sum(S * S, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (S @ S.T), 0.0)
    iu = np.triu_indices(S.shape[0], k=1)
    if iu[0].size == 0:
        return 1.0
    med = float(np.median(np.sqrt(d2[iu])))
    if med == 0.0:
        return 1.0
    return 1.0 / (2.0 * med * med)


def resolve_gamma(spec: KernelSpec, X) -> KernelSpec:
    """Fill in a data-driven gamma when the spec leaves it unset."""
    if spec.kind in (RBF, SIGMOID) and spec.gamma is None:
        return KernelSpec(kind=spec.kind, gamma=median_heuristic_gamma(X), c=spec.c)
    return spec


def kernel_value(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    if spec.kind == LINEAR:
        return float(x @ y)
    if spec.gamma is None:
        raise ValueError("gamma unset; call resolve_gamma first")
    if spec.kind == RBF:
        d = x - y
        return float(np.exp(-spec.gamma * float(d @ d)))
    return float(np.tanh(-spec.gamma * float(x @ y) + spec.c))


def kernel_matrix(spec: KernelSpec, X) -> np.ndarray:
    """n x n kernel matrix over the rows of ``X``.

    Exactly symmetric; the RBF diagonal is exactly 1. A ``None`` gamma is
    resolved from ``X`` itself via the median heuristic.
    """
    X = as_matrix(X, name="X")
    spec = resolve_gamma(spec, X)
    if spec.kind == LINEAR:
        return gram_matrix(X, 1.0)
    if spec.kind == RBF:
        sq = np.sum(X * X, axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
        K = np.exp(-spec.gamma * d2)
        K = (K + K.T) * 0.5
        np.fill_diagonal(K, 1.0)
        return K
    K = np.tanh(-spec.gamma * (X @ X.T) + spec.c)
    return (K + K.T) * 0.5


def center_kernel(K) -> np.ndarray:
    """Double-center a kernel matrix so its rows and columns sum to zero.

    Off by default everywhere in this package; exposed because classical
    KPCA assumes a centered feature map.
    """
    K = as_matrix(K, name="K")
    if K.shape[0] != K.shape[1]:
        raise ValueError("K must be square")
    row = K.mean(axis=1, keepdims=True)
    col = K.mean(axis=0, keepdims=True)
    C = K - row - col + K.mean()
    return (C + C.T) * 0.5


def kernel_eigs(K, k: int, indefinite: bool, L: int = EIG_ITERS, tol: float = EIG_TOL) -> list[EigenPair]:
    """Top-k eigenpairs of a kernel matrix, ordered by signed eigenvalue.

    For possibly-indefinite kernels the matrix is shifted by its infinity
    norm (an upper bound on the spectral radius, so the shifted matrix is
    PSD) before deflation; eigenvalues are then recomputed on the original
    matrix, which undoes the shift without round-off.
    """
    K = as_matrix(K, name="K")
    if not indefinite:
        return top_k_eigen_oracle(K, k, L, tol)
    sigma = float(np.linalg.norm(K, np.inf))
    B = K + sigma * np.eye(K.shape[0])
    shifted = top_k_eigen_oracle(B, k, L, tol)
    pairs = [EigenPair(vector=p.vector, value=rayleigh_quotient(K, p.vector)) for p in shifted]
    pairs.sort(key=lambda p: -p.value)
    return pairs


def akpca(X, spec: KernelSpec, k: int, center: bool = False) -> np.ndarray:
    """Kernelized projection of the raw data: Z = V_k.T @ X (shape k x m).

    V_k stacks the top-k unit eigenvectors of the (optionally centered)
    kernel matrix, in descending eigenvalue order. Sigmoid kernels may be
    indefinite; negative eigenvalues are allowed and the ordering is by
    signed value.
    """
    X = as_matrix(X, name="X")
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValueError("rank exceeded")
    K = kernel_matrix(spec, X)
    if center:
        K = center_kernel(K)
    pairs = kernel_eigs(K, k, indefinite=spec.kind == SIGMOID)
    V = np.stack([p.vector for p in pairs], axis=1)
    return V.T @ X


def kpca_transform(X, spec: KernelSpec, k: int) -> np.ndarray:
    """Classical kernel-PCA sample scores: K @ V_k scaled by 1/(n*lambda_j)
    per column (shape n x k). Requires the top-k eigenvalues to be strictly
    positive.
    """
    X = as_matrix(X, name="X")
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValueError("rank exceeded")
    K = kernel_matrix(spec, X)
    pairs = kernel_eigs(K, k, indefinite=spec.kind == SIGMOID)
    if any(p.value <= 0.0 for p in pairs):
        raise ValueError("indefinite kernel for KPCA")
    V = np.stack([p.vector for p in pairs], axis=1)
    scale = np.array([1.0 / (n * p.value) for p in pairs])
    return (K @ V) * scale[None, :]
