"""Subgradient certificates and the per-interval error bounds.

A certificate at ``lam_star`` bundles the solution ``x_star``, the compact SVD
``U S V'`` of ``H(x_star)`` and a free matrix ``W`` with ``U'W = 0``,
``WV = 0``, ``||W|| <= 1``, so that ``UV' + W`` is a subgradient of the
nuclear norm at ``H(x_star)``.  Its image ``a = H*(UV' + W)`` gives

* the cost bound      ``d(lam, W) = lam ||a|| - a'(g_o - x_star)``
* the spectral bound  ``s(lam) = min(||sigma - J e_min||^2, C (lam^2 - lam_star^2))``

valid for every ``lam >= lam_star``.  When the support is truncated (an
explicit ``rank`` below the numerical rank) the gap carries an extra
``2 * tail_mass`` so it stays an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from hankelpath.errors import ValidationError
from hankelpath.hankel import as_impulse_response, hankel_adjoint, hankel_map
from hankelpath.spectral import (
    DEFAULT_RANK_TOL,
    CompactSvd,
    compact_svd,
    singular_values,
)

__all__ = [
    "SubgradientCertificate",
    "build_certificate",
    "duality_gap",
    "sv_first_bound",
    "sv_bound",
    "next_lambda_cost",
    "next_lambda_sv",
    "recover_w_perp",
    "alignment",
    "svd_of_rank",
]

MEMBERSHIP_TOL = 1e-8


@dataclass(frozen=True)
class SubgradientCertificate:
    lambda_star: float
    x_star: np.ndarray
    svd: CompactSvd
    W: np.ndarray
    a_vec: np.ndarray
    objective_star: float
    sigma_star: np.ndarray
    tail_mass: float = 0.0
    fw_trace: tuple = field(default=(), repr=False)

    @property
    def a_norm(self) -> float:
        return float(np.linalg.norm(self.a_vec))

    @property
    def slack(self) -> float:
        """Correction for singular values dropped from the support.

        ``<UV' + W, H(x_star)>`` falls short of ``||H(x_star)||_*`` by at most
        twice the dropped mass; it is zero when nothing was truncated.
        """
        return 2.0 * self.tail_mass

    def with_w(self, W, fw_trace: tuple = ()) -> "SubgradientCertificate":
        """Same certificate with a different ``W`` (membership not re-checked)."""
        W = np.asarray(W, dtype=float)
        a = hankel_adjoint(self.svd.uvt() + W)
        return replace(self, W=W, a_vec=a, fw_trace=fw_trace)


def svd_of_rank(X, rank: int) -> CompactSvd:
    """Compact SVD truncated to exactly ``rank`` leading triplets."""
    full = compact_svd(X, rank_tol=0.0)
    r = min(rank, full.rank)
    return CompactSvd(U=full.U[:, :r].copy(), S=full.S[:r].copy(), V=full.V[:, :r].copy())


def check_membership(svd: CompactSvd, W, tol: float = MEMBERSHIP_TOL) -> None:
    """Raise :class:`ValidationError` unless ``UV' + W`` is a nuclear-norm subgradient."""
    W = np.asarray(W, dtype=float)
    p = svd.U.shape[0]
    if W.shape != (p, p):
        raise ValidationError(f"W must be {p}x{p}, got {W.shape}")
    if svd.rank:
        left = float(np.abs(svd.U.T @ W).max())
        if left > tol:
            raise ValidationError(f"U'W = 0 violated (max |U'W| = {left:.3g})")
        right = float(np.abs(W @ svd.V).max())
        if right > tol:
            raise ValidationError(f"WV = 0 violated (max |WV| = {right:.3g})")
    spec = float(singular_values(W)[0]) if p else 0.0
    if spec > 1.0 + tol:
        raise ValidationError(f"||W|| <= 1 violated (||W|| = {spec:.12g})")


def build_certificate(
    lambda_star: float,
    x_star,
    W=None,
    rank: int | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SubgradientCertificate:
    """Assemble a certificate at ``lambda_star``.

    ``rank`` fixes the number of singular triplets treated as the support of
    ``H(x_star)``; otherwise values below ``rank_tol * sigma_max`` are dropped.
    ``W`` defaults to zero and is validated against the subdifferential.
    """
    x_star = as_impulse_response(x_star)
    Hx = hankel_map(x_star)
    svd = compact_svd(Hx, rank_tol) if rank is None else svd_of_rank(Hx, rank)
    p = Hx.shape[0]
    W = np.zeros((p, p)) if W is None else np.asarray(W, dtype=float)
    check_membership(svd, W)
    sigma = singular_values(Hx)
    return SubgradientCertificate(
        lambda_star=float(lambda_star),
        x_star=x_star,
        svd=svd,
        W=W,
        a_vec=hankel_adjoint(svd.uvt() + W),
        objective_star=float(sigma.sum()),
        sigma_star=sigma,
        tail_mass=float(sigma[svd.rank:].sum()),
    )


def _check_lambda(cert, lam):
    if lam < cert.lambda_star * (1.0 - 1e-12):
        raise ValidationError(
            f"bounds hold for lambda >= lambda_star={cert.lambda_star}, got {lam}"
        )


def gap_raw(cert: SubgradientCertificate, g_o, lam: float) -> float:
    """Unclamped ``lam ||a|| - a'(g_o - x_star)`` (plus the truncation slack)."""
    a = cert.a_vec
    err = np.asarray(g_o, dtype=float) - cert.x_star
    return float(lam * np.linalg.norm(a) - a @ err) + cert.slack


def duality_gap(cert: SubgradientCertificate, g_o, lam: float) -> float:
    """Upper bound on ``J(lam_star) - J(lam)``, clamped at zero."""
    _check_lambda(cert, lam)
    return max(0.0, gap_raw(cert, g_o, lam))


def sv_first_bound(cert: SubgradientCertificate) -> float:
    """``||sigma - J e_min||^2``: worst case when the nuclear norm stays fixed."""
    sigma = cert.sigma_star
    v = sigma.copy()
    # argmin picks the lowest index among ties
    v[int(np.argmin(sigma))] -= cert.objective_star
    return float(v @ v)


def sv_bound(
    cert: SubgradientCertificate, lam: float, C_A: float, use_first: bool = True
) -> float:
    """Bound on the squared singular-value error at ``lam``."""
    _check_lambda(cert, lam)
    ball = C_A * max(0.0, lam * lam - cert.lambda_star ** 2)
    if not use_first:
        return ball
    return min(sv_first_bound(cert), ball)


def next_lambda_cost(
    cert: SubgradientCertificate, g_o, eps: float, lambda_max: float
) -> float:
    """Largest ``lam`` with ``d(lam, W) <= eps``, capped at ``lambda_max``.

    May return a value ``<= lambda_star`` when the gap at ``lambda_star``
    already exceeds ``eps``; the caller must handle that stall.
    """
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    a = cert.a_vec
    na = float(np.linalg.norm(a))
    if na == 0.0:
        return float(lambda_max)
    err = np.asarray(g_o, dtype=float) - cert.x_star
    return min(float(lambda_max), (eps + float(a @ err) - cert.slack) / na)


def next_lambda_sv(
    cert: SubgradientCertificate,
    eps: float,
    C_A: float,
    lambda_max: float,
    use_first: bool = True,
) -> float:
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    if use_first and sv_first_bound(cert) <= eps:
        return float(lambda_max)
    return min(float(lambda_max), math.sqrt(cert.lambda_star ** 2 + eps / C_A))


def recover_w_perp(cert: SubgradientCertificate, g_o, Z_dual) -> np.ndarray:
    """Estimate the ``W`` whose ``a(W)`` is parallel to ``g_o - x_star``.

    ``Z_dual`` is the converged ADMM multiplier, an approximate subgradient of
    the nuclear norm at ``H(x_star)``.  Its off-support part is projected onto
    ``{U'W = 0, WV = 0}`` and scaled into the unit spectral ball.
    """
    p = cert.svd.U.shape[0]
    err = np.asarray(g_o, dtype=float) - cert.x_star
    if cert.lambda_star == 0.0 or not np.any(err):
        return np.zeros((p, p))
    U, V = cert.svd.U, cert.svd.V
    W = np.asarray(Z_dual, dtype=float) - U @ V.T
    W = W - U @ (U.T @ W)
    W = W - (W @ V) @ V.T
    spec = float(singular_values(W)[0])
    if spec > 1.0:
        W /= spec
    return W


def alignment(cert: SubgradientCertificate, g_o) -> float:
    """Cosine between ``a(W)`` and ``g_o - x_star`` (1 for the ideal ``W``)."""
    err = np.asarray(g_o, dtype=float) - cert.x_star
    na, ne = np.linalg.norm(cert.a_vec), np.linalg.norm(err)
    if na == 0 or ne == 0:
        return 1.0
    return float(cert.a_vec @ err / (na * ne))
