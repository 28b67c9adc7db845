"""Dense linear-algebra kernels: Gram construction, power iteration, and a
deflated eigen-oracle.

All functions operate on plain ``numpy.ndarray`` values (row-major float64)
and are pure: inputs are never mutated. Every eigenvector leaving this module
carries a canonical sign (the entry of largest magnitude is positive, ties
broken by lowest index) so that repeated runs produce identical output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Iteration budget used by callers that do not expose their own knobs.
EIG_ITERS = 1000
EIG_TOL = 1e-12

_ORACLE_SEED = 0x5EED


class ZeroImageError(ValueError):
    """Raised when a power-iteration step maps the iterate to the zero vector."""


@dataclass(frozen=True)
class EigenPair:
    """A unit eigenvector estimate and its Rayleigh-quotient eigenvalue."""

    vector: np.ndarray
    value: float

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=float)
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-9:
            raise ValueError("not normalized")
        object.__setattr__(self, "vector", v)


def as_matrix(x, *, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``x`` to a 2-D float64 array with finite entries."""
    a = np.asarray(x, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("empty block" if a.size == 0 else f"{name} must be 2-D")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite data")
    return a


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude entry is positive (ties: lowest index)."""
    v = np.asarray(v, dtype=float)
    pivot = v[int(np.argmax(np.abs(v)))]
    return -v if pivot < 0 else v


def unit(v: np.ndarray) -> np.ndarray:
    """Return ``v`` scaled to unit Euclidean norm. Raises on the zero vector."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("zero vector")
    return v / n


def canonical_unit(v: np.ndarray) -> np.ndarray:
    return canonical_sign(unit(v))


def gram_matrix(X_block, scale: float) -> np.ndarray:
    """Scaled sample-space Gram matrix ``scale * X @ X.T``.

    ``scale`` is ``1/f`` for a client block with f features and ``1/m`` for
    the full data matrix. The result is exactly symmetric (symmetrized after
    the product) and PSD up to round-off.
    """
    X = as_matrix(X_block, name="X_block")
    if scale <= 0.0 or not np.isfinite(scale):
        raise ValueError("scale must be positive")
    G = scale * (X @ X.T)
    return (G + G.T) * 0.5


def rayleigh_quotient(A, a) -> float:
    """Eigenvalue estimate ``(a.T @ A @ a) / (a.T @ a)`` for a nonzero vector."""
    A = as_matrix(A, name="A")
    a = np.asarray(a, dtype=float)
    denom = float(a @ a)
    if denom == 0.0:
        raise ValueError("zero vector")
    return float(a @ (A @ a)) / denom


def power_iteration(A, a0, L: int, tol: float = 1e-9) -> tuple[EigenPair, int]:
    """Estimate the dominant eigenpair of a symmetric matrix.

    Runs at most ``L`` multiply-and-normalize steps starting from ``a0``,
    stopping early once the sign-aligned difference between consecutive
    iterates drops to ``tol`` or below. Returns the canonical-signed unit
    vector, its Rayleigh-quotient eigenvalue, and the number of steps taken.

    Raises ZeroImageError when ``A`` maps the current iterate to zero (the
    start vector lies in the null space).
    """
    A = as_matrix(A, name="A")
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if L < 1:
        raise ValueError("L must be >= 1")
    if tol < 0.0:
        raise ValueError("tol must be >= 0")
    a = unit(a0)
    iterations = 0
    for _ in range(L):
        w = A @ a
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            raise ZeroImageError("zero image")
        a_next = w / norm_w
        iterations += 1
        sign = 1.0 if float(a_next @ a) >= 0.0 else -1.0
        diff = float(np.linalg.norm(sign * a_next - a))
        a = a_next
        if diff <= tol:
            break
    a = canonical_sign(a)
    return EigenPair(vector=a, value=rayleigh_quotient(A, a)), iterations


def sin_angle(a, b) -> float:
    """Sine of the principal angle between two unit vectors: sqrt(1 - (a.b)^2)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for v in (a, b):
        if abs(float(np.linalg.norm(v)) - 1.0) > 1e-6:
            raise ValueError("not normalized")
    d = float(np.clip(a @ b, -1.0, 1.0))
    return float(np.sqrt(max(0.0, 1.0 - d * d)))


def _complete_basis(found: list[np.ndarray], n: int) -> np.ndarray:
    # Deterministic unit vector orthogonal to everything already found;
    # used when deflation drives the residual matrix to (numerical) zero.
    for j in range(n):
        v = np.zeros(n)
        v[j] = 1.0
        for f in found:
            v -= (f @ v) * f
        norm = float(np.linalg.norm(v))
        if norm > 1e-6:
            return v / norm
    raise ValueError("rank exceeded")


def top_k_eigen_oracle(A, k: int, L: int = EIG_ITERS, tol: float = EIG_TOL) -> list[EigenPair]:
    """Top-k eigenpairs of a symmetric PSD matrix by deflated power iteration.

    Hotelling deflation: after each converged pair the component
    ``value * v v.T`` is subtracted before the next run. Each new vector is
    re-orthogonalized against the ones already found and its eigenvalue is
    recomputed on the original matrix. Results are sorted by descending
    eigenvalue; vectors are pairwise orthogonal within round-off.
    """
    A = as_matrix(A, name="A")
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if k < 1 or k > n:
        raise ValueError("rank exceeded")
    rng = np.random.default_rng(_ORACLE_SEED)
    B = A.copy()
    found_vecs: list[np.ndarray] = []
    pairs: list[EigenPair] = []
    for _ in range(k):
        vec: np.ndarray | None = None
        for _attempt in range(3):
            try:
                pair, _ = power_iteration(B, rng.standard_normal(n), L, tol)
            except ZeroImageError:
                continue
            vec = pair.vector
            break
        if vec is not None:
            # Guard against drift: project out previously found directions.
            for f in found_vecs:
                vec = vec - (f @ vec) * f
            norm = float(np.linalg.norm(vec))
            vec = vec / norm if norm > 1e-8 else None
        if vec is None:
            vec = _complete_basis(found_vecs, n)
        vec = canonical_sign(vec)
        value = rayleigh_quotient(A, vec)
        found_vecs.append(vec)
        pairs.append(EigenPair(vector=vec, value=value))
        B = B - value * np.outer(vec, vec)
    pairs.sort(key=lambda p: -p.value)
    return pairs
