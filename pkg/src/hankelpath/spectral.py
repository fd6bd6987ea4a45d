"""Dense spectral helpers built on LAPACK SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from hankelpath.errors import NumericalError

__all__ = [
    "CompactSvd",
    "compact_svd",
    "singular_values",
    "nuclear_norm",
    "svt",
    "sv_distance_sq",
    "orth_complement",
]

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class CompactSvd:
    """Rank-``r`` factors with ``U @ diag(S) @ V.T`` approximating the input.

    ``S`` is strictly positive and nonincreasing; ``U`` and ``V`` have
    orthonormal columns. ``r == 0`` gives ``(p, 0)`` shaped factors.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.U.shape[0], self.V.shape[0])

    def uvt(self) -> np.ndarray:
        """The sign part ``U @ V.T`` (zero matrix when ``r == 0``)."""
        return self.U @ self.V.T

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


def _svd(X: np.ndarray, compute_uv: bool = True):
    try:
        return scipy.linalg.svd(
            X, full_matrices=False, compute_uv=compute_uv, lapack_driver="gesdd",
            check_finite=False,
        )
    except (np.linalg.LinAlgError, ValueError):
        pass
    try:
        # gesvd is slower but more robust when divide-and-conquer fails
        return scipy.linalg.svd(
            X, full_matrices=False, compute_uv=compute_uv, lapack_driver="gesvd"
        )
    except (np.linalg.LinAlgError, ValueError) as exc:
        finite = bool(np.all(np.isfinite(X)))
        raise NumericalError(
            f"SVD failed for matrix of shape {X.shape} (all finite: {finite}): {exc}"
        ) from exc


def compact_svd(X, rank_tol: float = DEFAULT_RANK_TOL) -> CompactSvd:
    """Compact SVD keeping singular values above ``rank_tol * sigma_max``."""
    X = np.asarray(X, dtype=float)
    U, s, Vt = _svd(X)
    if s.size == 0 or s[0] == 0.0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rank_tol * s[0]))
    return CompactSvd(U=U[:, :r].copy(), S=s[:r].copy(), V=Vt[:r].T.copy())


def singular_values(X) -> np.ndarray:
    """All ``min(X.shape)`` singular values, nonincreasing (zeros kept)."""
    return _svd(np.asarray(X, dtype=float), compute_uv=False)


def nuclear_norm(X) -> float:
    return float(np.sum(singular_values(X)))


def svt(X, tau: float) -> np.ndarray:
    """Singular value soft-thresholding, the prox of ``tau * ||.||_*``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    X = np.asarray(X, dtype=float)
    if tau == 0:
        return X.copy()
    U, s, Vt = _svd(X)
    s = np.maximum(s - tau, 0.0)
    keep = s > 0
    return (U[:, keep] * s[keep]) @ Vt[keep]


def sv_distance_sq(X, Y) -> float:
    """Squared distance between the sorted, full-length singular-value vectors.

    By Mirsky's theorem this never exceeds ``||X - Y||_F ** 2``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    d = singular_values(X) - singular_values(Y)
    return float(d @ d)


def orth_complement(U) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``range(U)``.

    The basis is not unique; callers only use quantities invariant to it.
    """
    U = np.asarray(U, dtype=float)
    p, r = U.shape
    if r >= p:
        return np.zeros((p, 0))
    if r == 0:
        return np.eye(p)
    Q, _ = scipy.linalg.qr(U, mode="full")
    Q_perp = Q[:, r:]
    # one re-orthogonalization pass keeps U.T @ Q_perp at roundoff level
    Q_perp = Q_perp - U @ (U.T @ Q_perp)
    Q_perp, _ = np.linalg.qr(Q_perp)
    return Q_perp
