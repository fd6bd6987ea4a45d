"""ADMM for ``min ||H(g)||_*  s.t.  ||g - g_o||_2 <= lam``.

The problem is split as ``min ||H||_*  s.t.  ||g - g_o|| <= lam, H(g) = H``
with augmented Lagrangian

    L(H, g, Z) = ||H||_* + <Z, H(g) - H> + rho/2 ||H(g) - H||_F^2

and the sweep ``H <- svt(H(g) + Z/rho, 1/rho)``, ``g <- ball-constrained
quadratic minimizer``, ``Z <- Z + rho (H(g) - H)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from hankelpath.errors import NumericalError, ValidationError
from hankelpath.hankel import (
    as_impulse_response,
    hankel_adjoint,
    hankel_map,
    multiplicities,
    order,
)
from hankelpath.spectral import compact_svd, nuclear_norm, svt

__all__ = [
    "AdmmConfig",
    "AdmmReport",
    "HankelAdmm",
    "solve",
    "h_update",
    "g_update",
    "residuals",
    "solve_ball_qp",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    adaptive_rho: bool = False
    eps_abs: float = 1e-6
    eps_rel: float = 1e-5
    max_iters: int = 50_000
    newton_tol: float = 1e-13
    newton_max_iters: int = 60
    warm_start: bool = True
    record_trace: bool = False

    def __post_init__(self):
        for name in ("rho", "eps_abs", "eps_rel", "newton_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"AdmmConfig.{name} must be > 0")
        if self.max_iters < 1 or self.newton_max_iters < 1:
            raise ValidationError("AdmmConfig iteration caps must be >= 1")


@dataclass
class AdmmReport:
    g_opt: np.ndarray
    lam: float
    iterations: int
    primal_residual: float
    dual_residual: float
    eps_primal: float
    eps_dual: float
    converged: bool
    objective: float
    rho: float
    H: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)
    objective_trace: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "iterations": self.iterations,
            "primal_residual": self.primal_residual,
            "dual_residual": self.dual_residual,
            "eps_primal": self.eps_primal,
            "eps_dual": self.eps_dual,
            "converged": self.converged,
            "objective": self.objective,
            "rho": self.rho,
        }


def h_update(g, Z, rho: float) -> np.ndarray:
    """``svt(H(g) + Z / rho, 1 / rho)``."""
    return svt(hankel_map(g) + np.asarray(Z) / rho, 1.0 / rho)


def solve_ball_qp(
    q,
    diag,
    lam: float,
    tol: float = 1e-13,
    max_iters: int = 60,
    t0: float | None = None,
) -> tuple[np.ndarray, float]:
    """Minimize ``0.5 x' D x + q' x`` over ``||x||_2 <= lam`` for diagonal ``D > 0``.

    Returns ``(x, t)`` where ``x = -q / (diag + t)`` and ``t >= 0`` is the
    multiplier of the ball constraint.  For an active constraint ``t`` is the
    root of ``f(t) = ||q / (diag + t)||_2 = lam``, found by Newton's method
    inside the bracket ``[0, ||q|| / lam]`` with a bisection fallback.
    ``t0`` (e.g. the previous ADMM iteration's multiplier) seeds Newton when
    it lies inside the bracket.
    """
    q = np.asarray(q, dtype=float)
    diag = np.asarray(diag, dtype=float)
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    if lam == 0.0:
        return np.zeros_like(q), math.inf
    x = -q / diag
    if np.linalg.norm(x) <= lam:
        return x, 0.0

    q2 = q * q

    def f(t):
        return math.sqrt(float(np.sum(q2 / (t + diag) ** 2)))

    lo, hi = 0.0, float(np.linalg.norm(q)) / lam
    if t0 is not None and lo <= t0 <= hi:
        t = float(t0)
    else:
        t = max(0.0, hi - float(diag.min()))
    converged = False
    for _ in range(max_iters):
        w = 1.0 / (t + diag)
        r2 = q2 * w * w
        ft = math.sqrt(float(r2.sum()))
        resid = ft - lam
        if abs(resid) <= tol * lam:
            converged = True
            break
        if resid > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
        dft = -float((r2 * w).sum()) / ft
        t_new = t - resid / dft if dft < 0 else math.nan
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            converged = True
            break
        t = t_new
    if not converged:
        log.debug("Newton did not converge in %d steps; bisecting", max_iters)
        try:
            t = scipy.optimize.bisect(
                lambda s: f(s) - lam,
                0.0,
                float(np.linalg.norm(q)) / lam,
                xtol=1e-300,
                rtol=4 * np.finfo(float).eps,
                maxiter=2000,
            )
        except (ValueError, RuntimeError) as exc:
            raise NumericalError(f"ball-constrained g-update failed: {exc}") from exc
    x = -q / (diag + t)
    nrm = float(np.linalg.norm(x))
    if nrm > lam:
        x *= lam / nrm
    return x, t


def g_update(g_o, H, Z, rho: float, lam: float, cfg: AdmmConfig | None = None) -> np.ndarray:
    """Ball-constrained minimization of the augmented Lagrangian over ``g``.

    With ``x = g - g_o`` the subproblem is ``min rho/2 x'Px + q'x`` over
    ``||x|| <= lam`` where ``P = diag(H*(ones))`` and
    ``q = H*(Z + rho H(g_o) - rho H)``.
    """
    cfg = cfg or AdmmConfig()
    g_o = np.asarray(g_o, dtype=float)
    q = hankel_adjoint(np.asarray(Z) + rho * hankel_map(g_o) - rho * np.asarray(H))
    x, _ = solve_ball_qp(
        q, rho * multiplicities(g_o.shape[0]), lam, cfg.newton_tol, cfg.newton_max_iters
    )
    return g_o + x


def residuals(H_prev, H, g, Z, rho: float, eps_abs: float, eps_rel: float, Hg=None):
    """Primal/dual residual norms and their stopping thresholds.

    ``r_p = ||H(g) - H||_F``, ``r_d = ||rho H*(H_prev - H)||_2``,
    ``eps_p = p eps_abs + eps_rel max(||H(g)||_F, ||H||_F)`` and
    ``eps_d = sqrt(n) eps_abs + eps_rel ||H*(Z)||_2``.
    ``Hg`` may pass a precomputed ``H(g)``.
    """
    Hg = hankel_map(g) if Hg is None else Hg
    n = Hg.shape[0] * 2 - 1
    p = Hg.shape[0]
    r_p = float(np.linalg.norm(Hg - H))
    r_d = float(np.linalg.norm(rho * hankel_adjoint(np.asarray(H_prev) - H)))
    eps_p = p * eps_abs + eps_rel * max(float(np.linalg.norm(Hg)), float(np.linalg.norm(H)))
    eps_d = math.sqrt(n) * eps_abs + eps_rel * float(np.linalg.norm(hankel_adjoint(Z)))
    return r_p, r_d, eps_p, eps_d


class HankelAdmm:
    """Stateful solver for one data vector ``g_o``.

    Iterates are kept between calls to :meth:`solve` so consecutive grid
    points of a path can warm start.  Not safe to share between threads
    during a solve.
    """

    def __init__(self, g_o, cfg: AdmmConfig | None = None):
        self.g_o = as_impulse_response(g_o)
        self.cfg = cfg or AdmmConfig()
        self.n = self.g_o.shape[0]
        self.p = order(self.n)
        self.norm_go = float(np.linalg.norm(self.g_o))
        self._weights = multiplicities(self.n)
        self._Hgo = hankel_map(self.g_o)
        idx = np.arange(self.p)
        self._idx = idx[:, None] + idx[None, :]
        self.reset()

    def reset(self):
        self.H = np.zeros((self.p, self.p))
        self.g = np.zeros(self.n)
        self.Z = np.zeros((self.p, self.p))
        self.rho = self.cfg.rho

    def _endpoint(self, lam: float) -> AdmmReport | None:
        if lam == 0.0:
            g = self.g_o.copy()
            svd = compact_svd(self._Hgo)
            Z = svd.uvt()
        elif lam >= self.norm_go:
            g = np.zeros(self.n)
            Z = np.zeros((self.p, self.p))
        else:
            return None
        H = hankel_map(g)
        return AdmmReport(
            g_opt=g, lam=lam, iterations=0, primal_residual=0.0, dual_residual=0.0,
            eps_primal=0.0, eps_dual=0.0, converged=True, objective=nuclear_norm(H),
            rho=self.rho, H=H, Z=Z,
        )

    def solve(self, lam: float, warm_start: bool | None = None) -> AdmmReport:
        lam = float(lam)
        if not lam >= 0:
            raise ValidationError(f"lambda must be >= 0, got {lam}")
        # both ends of the path have closed-form solutions
        report = self._endpoint(lam)
        if report is not None:
            return report

        cfg = self.cfg
        if not (cfg.warm_start if warm_start is None else warm_start):
            self.reset()
        H, g, Z, rho = self.H, self.g, self.Z, self.rho
        P = self._weights
        trace = []
        r_p = r_d = eps_p = eps_d = math.inf
        converged = False
        it = 0
        Hg = hankel_map(g)
        t_prev = None
        for it in range(1, cfg.max_iters + 1):
            H_prev = H
            H = svt(Hg + Z / rho, 1.0 / rho)
            q = hankel_adjoint(Z + rho * (self._Hgo - H))
            x, t_prev = solve_ball_qp(
                q, rho * P, lam, cfg.newton_tol, cfg.newton_max_iters, t0=t_prev
            )
            g = self.g_o + x
            Hg = g[self._idx]
            Z = Z + rho * (Hg - H)

            if not (np.all(np.isfinite(Z)) and np.all(np.isfinite(g))):
                raise NumericalError(f"non-finite ADMM iterate at iteration {it} (lambda={lam})")

            r_p, r_d, eps_p, eps_d = residuals(
                H_prev, H, g, Z, rho, cfg.eps_abs, cfg.eps_rel, Hg=Hg
            )
            if cfg.record_trace:
                trace.append(nuclear_norm(Hg))
            if r_p <= eps_p and r_d <= eps_d:
                converged = True
                break
            if cfg.adaptive_rho:
                # Z is the unscaled multiplier, so it needs no rescaling here
                if r_p > 10.0 * r_d:
                    rho *= 2.0
                elif r_d > 10.0 * r_p:
                    rho /= 2.0

        self.H, self.g, self.Z, self.rho = H, g, Z, rho
        if not converged:
            log.warning(
                "ADMM hit max_iters=%d at lambda=%.6g (r_p=%.3g/%.3g, r_d=%.3g/%.3g)",
                cfg.max_iters, lam, r_p, eps_p, r_d, eps_d,
            )
        return AdmmReport(
            g_opt=g.copy(), lam=lam, iterations=it, primal_residual=r_p,
            dual_residual=r_d, eps_primal=eps_p, eps_dual=eps_d, converged=converged,
            objective=nuclear_norm(hankel_map(g)), rho=rho, H=H.copy(), Z=Z.copy(),
            objective_trace=trace,
        )


def solve(g_o, lam: float, cfg: AdmmConfig | None = None) -> AdmmReport:
    """One cold-started solve; see :class:`HankelAdmm`."""
    return HankelAdmm(g_o, cfg).solve(lam, warm_start=False)
