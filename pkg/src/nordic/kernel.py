"""Kernels, Gram matrices, and quantile-based RBF width candidates."""

from dataclasses import dataclass

import numpy as np

__all__ = ["KernelSpec", "gram", "bandwidth_candidates", "jittered_inverse", "ridge_epsilon"]

RBF = "rbf"
LINEAR = "linear"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind plus the RBF width (in feature-space distance units)."""

    kind: str = RBF
    width: float | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in (RBF, LINEAR):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if kind == RBF:
            if self.width is None or not self.width > 0:
                raise ValueError("RBF kernel requires width > 0")
        elif self.width is not None:
            raise ValueError("linear kernel takes no width")


def gram(X: np.ndarray, X2: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel matrix with entries K(x_i, x'_j), shape (n, m).

    RBF entries are exp(-||x - x'||^2 / (2 w^2)); linear entries are
    plain inner products.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    if X.shape[1] != X2.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {X2.shape[1]}")
    if spec.kind == LINEAR:
        return X @ X2.T
    sq = np.sum(X**2, axis=1)[:, None] + np.sum(X2**2, axis=1)[None, :] - 2.0 * (X @ X2.T)
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * spec.width**2))


def bandwidth_candidates(X: np.ndarray, levels=(0.10, 0.50, 0.90)) -> np.ndarray:
    """Quantiles of the pairwise Euclidean distances, used as RBF widths."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points for pairwise distances")
    sq = np.sum(X**2, axis=1)[:, None] + np.sum(X**2, axis=1)[None, :] - 2.0 * (X @ X.T)
    np.maximum(sq, 0.0, out=sq)
    iu = np.triu_indices(n, k=1)
    dists = np.sqrt(sq[iu])
    if dists.max(initial=0.0) <= 0.0:
        raise ValueError("all points identical: pairwise distances are zero")
    return np.quantile(dists, levels)


def ridge_epsilon(K: np.ndarray) -> float:
    """Jitter size used whenever a Gram matrix must be inverted."""
    n = K.shape[0]
    return 1e-8 * float(np.trace(K)) / n


def _clipped_eig(K: np.ndarray):
    K = np.asarray(K, dtype=float)
    w, V = np.linalg.eigh(0.5 * (K + K.T))
    return np.maximum(w, 0.0), V


def jittered_inverse(K: np.ndarray) -> np.ndarray:
    """Inverse of K + eps*I computed in the eigenbasis with eigenvalues
    clipped at zero, so the result is symmetric PSD even when the Gram is
    numerically rank deficient."""
    w, V = _clipped_eig(K)
    eps = ridge_epsilon(K)
    return (V * (1.0 / (w + eps))) @ V.T


def inverse_weighted_blocks(K: np.ndarray):
    """(B, KB, BKB) with B = (K + eps I)^-1, all from one clipped
    eigendecomposition so every block is PSD-consistent: eigenvalues
    1/(l+eps), l/(l+eps), and l/(l+eps)^2 in the shared basis."""
    w, V = _clipped_eig(K)
    eps = ridge_epsilon(K)
    B = (V * (1.0 / (w + eps))) @ V.T
    KB = (V * (w / (w + eps))) @ V.T
    BKB = (V * (w / (w + eps) ** 2)) @ V.T
    return B, KB, BKB
