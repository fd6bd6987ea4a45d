"""Symmetric Hankel map, its adjoint and the structural constants of the bounds.

Indexing is 0-based throughout: ``H(g)[i, j] = g[i + j]``.  In 1-based
notation the adjoint reads ``x_k = sum_{i+j=k+1} X_ij``; here it is
``x[k] = sum_{i+j=k} X[i, j]``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from hankelpath.errors import StructureError, ValidationError

__all__ = [
    "as_impulse_response",
    "order",
    "hankel_map",
    "hankel_adjoint",
    "multiplicities",
    "cn_constant",
    "frobenius_constant",
]


def as_impulse_response(g) -> np.ndarray:
    """Validate and copy ``g`` into a 1-D float array of odd length."""
    arr = np.atleast_1d(np.array(g, dtype=float))
    if arr.ndim != 1:
        raise StructureError(f"impulse response must be 1-D, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 1 or n % 2 == 0:
        raise StructureError(
            f"impulse response length must be odd (n = 2p - 1), got n = {n}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError("impulse response contains non-finite entries")
    return arr


def order(n: int) -> int:
    """Side length ``p = (n + 1) / 2`` of the square Hankel matrix."""
    if n < 1 or n % 2 == 0:
        raise StructureError(f"n must be a positive odd integer, got {n}")
    return (n + 1) // 2


@lru_cache(maxsize=64)
def _index_sum(p: int) -> np.ndarray:
    idx = np.arange(p)
    out = idx[:, None] + idx[None, :]
    out.setflags(write=False)
    return out


def hankel_map(g) -> np.ndarray:
    """Return the ``p x p`` Hankel matrix with ``H[i, j] = g[i + j]``."""
    g = as_impulse_response(g)
    p = order(g.shape[0])
    return g[_index_sum(p)]


def hankel_adjoint(X) -> np.ndarray:
    """Sum the anti-diagonals of a square matrix.

    Returns a vector of length ``2p - 1`` whose ``k``-th entry is the sum of
    ``X[i, j]`` over ``i + j == k``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise StructureError(f"adjoint needs a square matrix, got shape {X.shape}")
    p = X.shape[0]
    return np.bincount(_index_sum(p).ravel(), weights=X.ravel(), minlength=2 * p - 1)


def multiplicities(n: int) -> np.ndarray:
    """Anti-diagonal lengths ``(1, 2, ..., p, ..., 2, 1)``, i.e. ``H*(ones)``."""
    p = order(n)
    k = np.arange(n)
    return (p - np.abs(k - (p - 1))).astype(float)


def cn_constant(p: int) -> float:
    """Closed form of ``||H*(ones(p, p))||_2``.

    ``(2 * sum_{k=1}^{p-1} k^2 + p^2) ** 0.5``, with the sum of squares
    evaluated exactly in integers.
    """
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    sum_sq = (p - 1) * p * (2 * p - 1) // 6
    return math.sqrt(2 * sum_sq + p * p)


def frobenius_constant(n: int, mode: str = "loose") -> float:
    """Constant ``C`` with ``||H(x)||_F^2 <= C ||x||_2^2``.

    ``mode="loose"`` (the default) gives ``n``; ``mode="tight"`` gives the largest
    anti-diagonal multiplicity ``p``, which is the smallest valid constant.
    """
    p = order(n)
    if mode == "loose":
        return float(n)
    if mode == "tight":
        return float(p)
    raise ValidationError(f"unknown C_A mode {mode!r}; expected 'loose' or 'tight'")
