"""Independent reference solver for small instances (n <= ~9).

Used by the test-suite and the ``verify`` CLI command to check the ADMM
solver and the path certificates.  It shares nothing with :mod:`admm`
beyond the Hankel map itself.

Each solve runs several randomly started projected-subgradient descents,
polishes every start by minimizing the smoothed nuclear norm
``sum_i sqrt(ev_i^2 + mu^2)`` for a decreasing sequence of ``mu`` with
SLSQP, and then certifies the result two ways:

* all restarts must agree in objective to ``agree_tol``;
* weak duality: for any symmetric ``Y`` with ``||Y||_2 <= 1``,
  ``<H*(Y), g_o> - lam ||H*(Y)||_2`` is a lower bound on the optimum.
  Candidates for ``Y`` are the smoothed gradient and ``U sign(L) U' + U_perp
  D U_perp'`` built from the eigendecomposition of ``H(g)``, with ``D`` fitted
  so that ``H*(Y)`` lines up with ``g_o - g`` and then refined by projected
  gradient ascent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from hankelpath.errors import OracleError, ValidationError
from hankelpath.hankel import as_impulse_response, hankel_adjoint, hankel_map
from hankelpath.spectral import nuclear_norm, singular_values

__all__ = [
    "OracleSolution",
    "oracle_solve",
    "brute_solve",
    "dense_path",
    "nuclear_norm_2x2_sym",
    "default_workers",
]

THREADS_ENV = "HANKELPATH_THREADS"


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def nuclear_norm_2x2_sym(a: float, b: float, c: float) -> float:
    """Nuclear norm of ``[[a, b], [b, c]]`` from its eigenvalues."""
    return max(abs(a + c), math.sqrt((a - c) ** 2 + 4 * b * b))


@dataclass
class OracleSolution:
    g: np.ndarray
    objective: float
    lower_bound: float
    restart_objectives: list

    @property
    def gap(self) -> float:
        return self.objective - self.lower_bound


def _project(g, g_o, lam):
    d = g - g_o
    nrm = np.linalg.norm(d)
    if nrm > lam:
        d *= lam / nrm
    return g_o + d


def _smoothed(g, mu):
    H = hankel_map(g)
    ev, Q = np.linalg.eigh(H)
    root = np.sqrt(ev * ev + mu * mu)
    Y = (Q * (ev / root)) @ Q.T
    return float(root.sum()), hankel_adjoint(Y), Y


def _dual_bound(Y, g_o, lam):
    # rescale defensively: the smoothed gradient already has ||Y|| < 1
    s = float(np.abs(np.linalg.eigvalsh(Y)).max()) if Y.size else 0.0
    if s > 1.0:
        Y = Y / s
    a = hankel_adjoint(Y)
    return float(a @ g_o - lam * np.linalg.norm(a))


def _clip_sym(D):
    ev, Q = np.linalg.eigh(D)
    return (Q * np.clip(ev, -1.0, 1.0)) @ Q.T


def _structured_dual(g, g_o, lam, rel_tol, ascent_iters=300):
    """Best ``Y = U sign(L) U' + Q D Q'`` for the support of ``H(g)`` at ``rel_tol``."""
    H = hankel_map(g)
    ev, E = np.linalg.eigh(H)
    top = float(np.abs(ev).max()) if ev.size else 0.0
    keep = np.abs(ev) > rel_tol * top
    U, Q = E[:, keep], E[:, ~keep]
    Y0 = (U * np.sign(ev[keep])) @ U.T
    k = Q.shape[1]
    if k == 0:
        return _dual_bound(Y0, g_o, lam)
    err = g_o - g
    # columns: H*(Q B Q') for a basis B of symmetric k x k, then -err for the scale t
    basis = []
    for i in range(k):
        for j in range(i, k):
            B = np.zeros((k, k))
            B[i, j] = B[j, i] = 1.0
            basis.append(B)
    A = np.column_stack([hankel_adjoint(Q @ B @ Q.T) for B in basis] + [-err])
    coef, *_ = np.linalg.lstsq(A, -hankel_adjoint(Y0), rcond=None)
    D = _clip_sym(sum(c * B for c, B in zip(coef[:-1], basis)))

    def value(D):
        return _dual_bound(Y0 + Q @ D @ Q.T, g_o, lam)

    best = value(D)
    step = 1.0 / max(1.0, float(np.linalg.norm(Q, 2)) ** 2 * (lam + 1.0) * g_o.shape[0])
    for _ in range(ascent_iters):
        a = hankel_adjoint(Y0 + Q @ D @ Q.T)
        na = float(np.linalg.norm(a))
        if na == 0.0:
            break
        grad = Q.T @ hankel_map(g_o - lam * a / na) @ Q
        D = _clip_sym(D + step * grad)
        v = value(D)
        best = max(best, v)
    return best


def _subgradient_descent(g, g_o, lam, iters):
    best_g, best_f = g.copy(), nuclear_norm(hankel_map(g))
    for k in range(iters):
        ev, Q = np.linalg.eigh(hankel_map(g))
        sub = hankel_adjoint((Q * np.sign(ev)) @ Q.T)
        nrm = np.linalg.norm(sub)
        if nrm == 0:
            break
        g = _project(g - (lam / math.sqrt(k + 1)) * sub / nrm, g_o, lam)
        f = float(np.abs(ev).sum())
        if f < best_f:
            best_g, best_f = g.copy(), f
    return best_g


def _polish(g, g_o, lam, scale, mus):
    cons = {
        "type": "ineq",
        "fun": lambda x: lam * lam - float((x - g_o) @ (x - g_o)),
        "jac": lambda x: -2.0 * (x - g_o),
    }
    Y = None
    for mu in mus:
        m = mu * scale

        def fun(x, m=m):
            val, grad, _ = _smoothed(x, m)
            return val / scale, grad / scale

        res = scipy.optimize.minimize(
            fun, g, jac=True, method="SLSQP", constraints=[cons],
            options={"maxiter": 500, "ftol": 1e-15},
        )
        g = _project(res.x, g_o, lam)
        _, _, Y = _smoothed(g, m)
    return g, Y


def oracle_solve(
    g_o,
    lam: float,
    restarts: int = 6,
    subgrad_iters: int = 200,
    agree_tol: float = 1e-4,
    seed: int = 0,
) -> OracleSolution:
    g_o = as_impulse_response(g_o)
    lam = float(lam)
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    norm_go = float(np.linalg.norm(g_o))
    if lam == 0.0:
        f = nuclear_norm(hankel_map(g_o))
        return OracleSolution(g_o.copy(), f, f, [f])
    if lam >= norm_go:
        return OracleSolution(np.zeros_like(g_o), 0.0, 0.0, [0.0])

    n = g_o.shape[0]
    scale = max(float(singular_values(hankel_map(g_o))[0]), 1e-300)
    mus = [10.0 ** (-k) for k in range(2, 11)]
    rng = np.random.default_rng(seed)
    candidates = []
    for r in range(restarts):
        if r == 0:
            start = g_o * (1.0 - lam / norm_go)
        else:
            d = rng.standard_normal(n)
            d *= lam * rng.uniform() ** (1.0 / n) / np.linalg.norm(d)
            start = g_o + d
        g = _subgradient_descent(start, g_o, lam, subgrad_iters)
        g, Y = _polish(g, g_o, lam, scale, mus)
        candidates.append((nuclear_norm(hankel_map(g)), g, Y))

    objs = [c[0] for c in candidates]
    best = min(range(restarts), key=lambda i: objs[i])
    f_best, g_best, _ = candidates[best]
    lower = max(_dual_bound(c[2], g_o, lam) for c in candidates)
    if f_best - lower > agree_tol * (1.0 + f_best):
        for tol in (1e-4, 1e-6, 1e-8):
            lower = max(lower, _structured_dual(g_best, g_o, lam, tol))
    spread = max(objs) - min(objs)
    if spread > agree_tol * (1.0 + f_best):
        raise OracleError(
            f"oracle restarts disagree at lambda={lam:.6g}: spread {spread:.3g} "
            f"(objectives {objs})"
        )
    if f_best - lower > agree_tol * (1.0 + f_best):
        raise OracleError(
            f"oracle duality gap {f_best - lower:.3g} too large at lambda={lam:.6g}"
        )
    return OracleSolution(g_best, f_best, lower, objs)


def brute_solve(g_o, lam: float, resolution: int = 6, seed: int = 0) -> np.ndarray:
    """Reference minimizer of ``||H(g)||_*`` over the ball; ``resolution`` = restarts."""
    return oracle_solve(g_o, lam, restarts=resolution, seed=seed).g


def dense_path(g_o, num_points: int, workers: int | None = None, **kwargs):
    """Oracle solutions at ``num_points`` equally spaced ``lam`` in ``[0, ||g_o||]``.

    Returns a list of ``(lam, g, sigma, objective)`` tuples.
    """
    g_o = as_impulse_response(g_o)
    if num_points < 2:
        raise ValidationError("dense_path needs at least 2 points")
    lams = np.linspace(0.0, float(np.linalg.norm(g_o)), num_points)
    workers = workers or default_workers()

    def one(lam):
        sol = oracle_solve(g_o, lam, **kwargs)
        return (float(lam), sol.g, singular_values(hankel_map(sol.g)), sol.objective)

    if workers == 1:
        return [one(lam) for lam in lams]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, lams))
