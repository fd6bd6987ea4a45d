"""Frank-Wolfe minimization of the duality gap over the free subgradient part ``W``.

The feasible set is ``M = {W : U'W = 0, WV = 0, ||W|| <= 1}``.  Writing
``W = U_perp D V_perp'`` turns the linear subproblem into a spectral-norm ball
problem in ``D``, solved in closed form by the SVD of ``U_perp' C V_perp``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hankelpath.certify import SubgradientCertificate, gap_raw
from hankelpath.hankel import hankel_map
from hankelpath.spectral import compact_svd, orth_complement

__all__ = ["FwConfig", "gap_gradient", "lmo", "optimize_w"]


@dataclass(frozen=True)
class FwConfig:
    max_iters: int = 200
    objective_trace: bool = False

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("FwConfig.max_iters must be >= 0")


def gap_gradient(cert: SubgradientCertificate, g_o, lam: float):
    """Gradient of ``d(lam, W)`` with respect to ``W``.

    Returns ``(C, degenerate)``.  ``C = (lam/||a||) H(a) + H(x_star - g_o)``;
    when ``a = 0`` the first term is undefined and is dropped, and
    ``degenerate`` is True.
    """
    a = cert.a_vec
    na = float(np.linalg.norm(a))
    C = hankel_map(cert.x_star - np.asarray(g_o, dtype=float))
    if na == 0.0:
        return C, True
    return C + (lam / na) * hankel_map(a), False


def lmo(C, U, V, U_perp=None, V_perp=None) -> np.ndarray:
    """``argmin <X, C>`` over ``M``; the minimum value is ``-||U_perp' C V_perp||_*``.

    The maximizer of ``<D, C~>`` over the unit ball is ``U_C V_C'``; the
    minimizer is its negative.
    """
    C = np.asarray(C, dtype=float)
    U_perp = orth_complement(U) if U_perp is None else U_perp
    V_perp = orth_complement(V) if V_perp is None else V_perp
    p = C.shape[0]
    if U_perp.shape[1] == 0 or V_perp.shape[1] == 0:
        return np.zeros((p, p))
    svd = compact_svd(U_perp.T @ C @ V_perp, rank_tol=1e-14)
    if svd.rank == 0:
        return np.zeros((p, p))
    return -(U_perp @ svd.U) @ (V_perp @ svd.V).T


def optimize_w(
    cert0: SubgradientCertificate, g_o, lam: float, cfg: FwConfig | None = None
) -> SubgradientCertificate:
    """Run Frank-Wolfe with steps ``2/(2+k)`` starting at ``cert0.W``.

    Returns the certificate with the lowest gap seen, so the result is never
    worse than ``cert0``.
    """
    cfg = cfg or FwConfig()
    if cfg.max_iters == 0:
        return cert0
    U, V = cert0.svd.U, cert0.svd.V
    U_perp, V_perp = orth_complement(U), orth_complement(V)
    cert = cert0
    best, best_gap = cert0, gap_raw(cert0, g_o, lam)
    trace = [best_gap]
    for k in range(cfg.max_iters):
        C, _ = gap_gradient(cert, g_o, lam)
        X = lmo(C, U, V, U_perp, V_perp)
        gamma = 2.0 / (2.0 + k)
        cert = cert.with_w((1.0 - gamma) * cert.W + gamma * X)
        gap = gap_raw(cert, g_o, lam)
        if gap < best_gap:
            best, best_gap = cert, gap
        if cfg.objective_trace:
            trace.append(gap)
    if cfg.objective_trace:
        return best.with_w(best.W, fw_trace=tuple(trace))
    return best
