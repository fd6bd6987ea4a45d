"""Adaptive gridding of the regularization path and the a-priori grid-count bounds.

Starting at ``lam_0 = 0`` the loop solves at ``lam_i``, builds a certificate
and places ``lam_{i+1}`` where the chosen error bound reaches ``eps``:

* ``"cost"``: ``d(lam_{i+1}, W) = eps``   (nuclear-norm error <= eps)
* ``"sv"``:   ``s(lam_{i+1}) = eps``      (squared singular-value error <= eps)

``x_i`` is then accepted on ``[lam_i, lam_{i+1})``.  The domain ends at
``lam_max = ||g_o||``, beyond which the solution is exactly zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from hankelpath.admm import AdmmConfig, AdmmReport, HankelAdmm
from hankelpath.certify import (
    build_certificate,
    duality_gap,
    gap_raw,
    next_lambda_cost,
    next_lambda_sv,
    recover_w_perp,
    sv_bound,
)
from hankelpath.errors import PathError, ValidationError
from hankelpath.fw import FwConfig, optimize_w
from hankelpath.hankel import (
    as_impulse_response,
    cn_constant,
    frobenius_constant,
    hankel_map,
    order,
)
from hankelpath.spectral import compact_svd, singular_values

__all__ = [
    "ToleranceSpec",
    "PathResult",
    "run_path",
    "max_evals_cost",
    "max_evals_sv",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("cost", "sv")
# grid counts above this multiple of the a-priori bound abort the run
ABORT_FACTOR = 10


def _floor(x: float) -> int:
    # eps = C ||g||^2 / M must give back exactly M despite rounding
    return math.floor(x * (1.0 + 1e-12))


def max_evals_cost(g_o, eps: float, w_mode: str = "zero") -> int:
    """A-priori grid count for the cost-certified algorithm.

    ``floor(c_n ||g_o|| / eps)`` for ``W = 0`` and twice that for a general ``W``.
    """
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    g_o = as_impulse_response(g_o)
    factor = {"zero": 1.0, "general": 2.0}.get(w_mode)
    if factor is None:
        raise ValidationError(f"w_mode must be 'zero' or 'general', got {w_mode!r}")
    cn = cn_constant(order(g_o.shape[0]))
    return max(1, _floor(factor * cn * float(np.linalg.norm(g_o)) / eps))


def max_evals_sv(g_o, eps: float, C_A: float) -> int:
    """A-priori grid count ``floor(C_A ||g_o||^2 / eps)`` for the singular-value algorithm."""
    if not eps > 0:
        raise ValidationError(f"eps must be > 0, got {eps}")
    g_o = as_impulse_response(g_o)
    return max(1, _floor(C_A * float(g_o @ g_o) / eps))


@dataclass(frozen=True)
class ToleranceSpec:
    """What the path certifies and how.

    ``w_policy="zero"`` places the cost-certified grid with ``W = 0`` only.
    ``"best"`` also tries the ``W`` recovered from the ADMM multiplier, whose
    gap vanishes at the grid point, and keeps whichever interval is longer.
    ``use_fw`` additionally refines ``W`` by Frank-Wolfe from ``W = 0``.
    ``use_first_bound=False`` drops the fixed-nuclear-norm term from the
    singular-value bound, which reproduces the worst-case grid.
    """

    algorithm: str = "cost"
    eps: float = 0.1
    c_a_mode: str = "loose"
    use_fw: bool = False
    fw_iters: int = 200
    w_policy: str = "best"
    use_first_bound: bool = True

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not self.eps > 0:
            raise ValidationError(f"eps must be > 0, got {self.eps}")
        if self.c_a_mode not in ("loose", "tight"):
            raise ValidationError(f"c_a_mode must be 'loose' or 'tight', got {self.c_a_mode!r}")
        if self.w_policy not in ("zero", "best"):
            raise ValidationError(f"w_policy must be 'zero' or 'best', got {self.w_policy!r}")
        if self.fw_iters < 0:
            raise ValidationError("fw_iters must be >= 0")


@dataclass
class PathResult:
    g_o: np.ndarray
    spec: ToleranceSpec
    lam_max: float
    C_A: float
    grid: list = field(default_factory=list)
    right: list = field(default_factory=list)
    solutions: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    bound_trace: list = field(default_factory=list)
    gap_at_star: list = field(default_factory=list)
    w_modes: list = field(default_factory=list)
    admm_reports: list = field(default_factory=list)
    m_bound: int = 1
    complete: bool = False

    @property
    def m(self) -> int:
        """Number of solves beyond the closed-form point ``lam = 0``."""
        return max(0, len(self.grid) - 1)

    @property
    def j_max(self) -> float:
        return float(singular_values(hankel_map(self.g_o)).sum())

    def interval_index(self, lam: float) -> int | None:
        """Index ``i`` with ``grid[i] <= lam < right[i]``; None past ``lam_max``."""
        if lam >= self.lam_max:
            return None
        i = int(np.searchsorted(np.asarray(self.grid), lam, side="right")) - 1
        return max(i, 0)

    def solution_at(self, lam: float) -> np.ndarray:
        i = self.interval_index(lam)
        return np.zeros_like(self.g_o) if i is None else self.solutions[i]

    def sigma_at(self, lam: float) -> np.ndarray:
        i = self.interval_index(lam)
        p = order(self.g_o.shape[0])
        return np.zeros(p) if i is None else self.sigma[i]

    def objective_at(self, lam: float) -> float:
        i = self.interval_index(lam)
        return 0.0 if i is None else self.objectives[i]

    def uses_general_w(self) -> bool:
        return any(mode != "zero" for mode in self.w_modes)


def _admm_rank(report: AdmmReport) -> int:
    # H is the thresholded iterate, so its rank is exact up to roundoff
    return compact_svd(report.H, rank_tol=1e-9).rank


def _cost_step(res, spec, report, lam, g_o, fw_cfg):
    lam_max = res.lam_max
    eps = spec.eps
    cert0 = build_certificate(lam, report.g_opt)
    gap0 = gap_raw(cert0, g_o, lam)
    cert, nxt, mode = cert0, next_lambda_cost(cert0, g_o, eps, lam_max), "zero"

    candidates = []
    if spec.w_policy == "best" or spec.use_fw:
        base = build_certificate(lam, report.g_opt, rank=_admm_rank(report))
        if spec.w_policy == "best":
            W = recover_w_perp(base, g_o, report.Z)
            candidates.append(("perp", base.with_w(W)))
        if spec.use_fw:
            target = max(lam, nxt)
            candidates.append(("fw", optimize_w(base, g_o, target, fw_cfg)))
    for name, cand in candidates:
        cand_nxt = next_lambda_cost(cand, g_o, eps, lam_max)
        if cand_nxt > nxt:
            cert, nxt, mode = cand, cand_nxt, name
    if nxt <= lam:
        raise PathError(
            f"cannot advance past lambda={lam:.6g}: gap at the grid point is "
            f"{gap0:.4g} >= eps={eps:.4g} (raise eps, use w_policy='best' or enable FW)",
            partial=res,
        )
    return nxt, duality_gap(cert, g_o, nxt), gap0, mode


def _sv_step(res, spec, report, lam, g_o):
    cert = build_certificate(lam, report.g_opt)
    nxt = next_lambda_sv(cert, spec.eps, res.C_A, res.lam_max, spec.use_first_bound)
    bound = sv_bound(cert, nxt, res.C_A, spec.use_first_bound)
    return nxt, bound, gap_raw(cert, g_o, lam), "zero"


def run_path(
    g_o,
    spec: ToleranceSpec,
    cfg: AdmmConfig | None = None,
    solver: HankelAdmm | None = None,
) -> PathResult:
    """Certified approximate regularization path for ``g_o``.

    Raises :class:`PathError` (with ``.partial``) when ADMM fails to converge
    or the grid would exceed ``10 * m_bound`` points.
    """
    g_o = as_impulse_response(g_o)
    n = g_o.shape[0]
    C_A = frobenius_constant(n, spec.c_a_mode)
    lam_max = float(np.linalg.norm(g_o))
    res = PathResult(g_o=g_o, spec=spec, lam_max=lam_max, C_A=C_A)

    if lam_max == 0.0:
        res.grid, res.right = [0.0], [0.0]
        res.solutions = [g_o.copy()]
        res.sigma = [np.zeros(order(n))]
        res.objectives, res.bound_trace, res.gap_at_star = [0.0], [0.0], [0.0]
        res.w_modes = ["zero"]
        res.complete = True
        return res

    if spec.algorithm == "cost":
        # any subgradient S has |S_ij| <= 1, so ||H*(S)|| <= c_n for every W
        res.m_bound = max_evals_cost(g_o, spec.eps, "zero")
    else:
        res.m_bound = max_evals_sv(g_o, spec.eps, C_A)

    solver = solver or HankelAdmm(g_o, cfg)
    fw_cfg = FwConfig(max_iters=spec.fw_iters)
    lam = 0.0
    while True:
        report = solver.solve(lam)
        if not report.converged:
            raise PathError(
                f"ADMM did not converge at lambda={lam:.6g} after {report.iterations} "
                f"iterations (r_p={report.primal_residual:.3g}, r_d={report.dual_residual:.3g})",
                partial=res,
            )
        if spec.algorithm == "cost":
            nxt, bound, gap0, mode = _cost_step(res, spec, report, lam, g_o, fw_cfg)
        else:
            nxt, bound, gap0, mode = _sv_step(res, spec, report, lam, g_o)
        if nxt >= lam_max * (1.0 - 1e-12):
            nxt = lam_max

        res.grid.append(lam)
        res.right.append(nxt)
        res.solutions.append(report.g_opt)
        res.sigma.append(singular_values(hankel_map(report.g_opt)))
        res.objectives.append(report.objective)
        res.bound_trace.append(bound)
        res.gap_at_star.append(max(0.0, gap0))
        res.w_modes.append(mode)
        res.admm_reports.append(report)
        log.info("grid point %d: lambda=%.6g -> %.6g (%s)", res.m, lam, nxt, mode)

        if nxt >= lam_max:
            break
        if res.m >= ABORT_FACTOR * res.m_bound:
            raise PathError(
                f"grid exceeded {ABORT_FACTOR} x the a-priori bound ({res.m_bound})",
                partial=res,
            )
        lam = nxt
    res.complete = True
    return res
